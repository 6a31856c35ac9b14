#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nicis/errors.hpp"
#include "nicis/fixed_point.hpp"

namespace nicis {

// Closed interval known to contain the real number.
struct Enclosure {
  BigRational lo;
  BigRational hi;
};

// Parsed description of a real alpha in (0,1) with certified enclosures at any requested width.
//
// Accepted spellings:
//   golden                     (sqrt5 - 1)/2
//   silver | sqrt2-1           sqrt2 - 1
//   surd:a,b,d,c               (a + b*sqrt(d))/c, d > 0 not a square, b, c nonzero
//   series:factorial<B>        sum_{k>=1} B^(-k!), integer B >= 2 (also "liouville" for B = 10)
//   decimal:0.ddd | 0.ddd      digits are a prefix of the expansion: alpha in [v, v + 10^-k]
class AlphaSource {
 public:
  enum class Kind { QuadraticSurd, FactorialSeries, Decimal };

  static AlphaSource parse(std::string_view text) {
    std::string s(trim(text));
    std::string lower = s;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    AlphaSource a;
    a.spec_ = s;
    if (lower == "golden") {
      a.set_surd(-1, 1, 5, 2);
    } else if (lower == "silver" || lower == "sqrt2-1") {
      a.set_surd(-1, 1, 2, 1);
    } else if (lower.rfind("surd:", 0) == 0) {
      auto parts = split(lower.substr(5), ',');
      if (parts.size() != 4) throw ConfigError("surd spec needs a,b,d,c: " + s);
      a.set_surd(parse_int(parts[0], s), parse_int(parts[1], s), parse_int(parts[2], s),
                 parse_int(parts[3], s));
    } else if (lower == "liouville") {
      a.set_series(10);
    } else if (lower.rfind("series:factorial", 0) == 0) {
      std::string b = lower.substr(16);
      if (!b.empty() && b.front() == ':') b.erase(0, 1);
      const long long base = b.empty() ? 10 : parse_int(b, s);
      if (base < 2 || base > 1000000) throw ConfigError("series base out of range: " + s);
      a.set_series(base);
    } else {
      std::string d = lower.rfind("decimal:", 0) == 0 ? lower.substr(8) : lower;
      a.set_decimal(d, s);
    }
    a.check_unit_interval();
    return a;
  }

  Kind kind() const { return kind_; }
  const std::string& spec() const { return spec_; }

  // Maximum enclosure resolution in bits; nullopt when unbounded.
  std::optional<unsigned> max_bits() const {
    if (kind_ == Kind::Decimal) return decimal_bits_;
    return std::nullopt;
  }

  // Enclosure of width at most 2^-bits when the source allows it; otherwise the tightest available.
  Enclosure enclose(unsigned bits) const {
    switch (kind_) {
      case Kind::QuadraticSurd: return enclose_surd(bits);
      case Kind::FactorialSeries: return enclose_series(bits);
      case Kind::Decimal: return {dec_lo_, dec_hi_};
    }
    return {};
  }

 private:
  static std::string_view trim(std::string_view v) {
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
    return v;
  }

  static std::vector<std::string> split(const std::string& v, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : v) {
      if (ch == sep) {
        out.push_back(std::string(trim(cur)));
        cur.clear();
      } else {
        cur += ch;
      }
    }
    out.push_back(std::string(trim(cur)));
    return out;
  }

  static long long parse_int(const std::string& v, const std::string& whole) {
    long long x = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("bad integer in alpha spec: " + whole);
    return x;
  }

  void set_surd(long long a, long long b, long long d, long long c) {
    if (d <= 0 || b == 0 || c == 0) throw ConfigError("degenerate surd spec: " + spec_);
    BigInt dd(d);
    BigInt r = boost::multiprecision::sqrt(dd);
    if (r * r == dd) throw ConfigError("surd radicand is a perfect square (rational alpha): " + spec_);
    kind_ = Kind::QuadraticSurd;
    sa_ = a;
    sb_ = b;
    sd_ = d;
    sc_ = c;
  }

  void set_series(long long base) {
    kind_ = Kind::FactorialSeries;
    base_ = base;
  }

  void set_decimal(const std::string& d, const std::string& whole) {
    std::string digits = d;
    if (digits.rfind("0.", 0) == 0) {
      digits = digits.substr(2);
    } else if (!digits.empty() && digits.front() == '.') {
      digits = digits.substr(1);
    } else {
      throw ConfigError("unrecognised alpha spec: " + whole);
    }
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                       [](unsigned char ch) { return std::isdigit(ch); }))
      throw ConfigError("unrecognised alpha spec: " + whole);
    kind_ = Kind::Decimal;
    BigInt num(digits);
    BigInt den = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(digits.size()));
    dec_lo_ = BigRational(num, den);
    dec_hi_ = BigRational(num + 1, den);
    decimal_bits_ = static_cast<unsigned>(static_cast<double>(digits.size()) * 3.3219280948873622);
  }

  void check_unit_interval() const {
    Enclosure e = enclose(64);
    if (!(e.lo > 0 && e.hi < 1) && !(kind_ == Kind::Decimal && e.lo > 0 && e.hi <= 1))
      throw ConfigError("alpha must lie in (0,1): " + spec_);
  }

  Enclosure enclose_surd(unsigned bits) const {
    // |b|*sqrt(d) in [s, s+1] / 2^bits with s = isqrt(b^2 d 4^bits).
    const unsigned prec = bits + 8;
    BigInt rad = BigInt(sb_) * BigInt(sb_) * BigInt(sd_) << (2 * prec);
    BigInt s = boost::multiprecision::sqrt(rad);
    BigRational scale(BigInt(1), pow2_big(prec));
    BigRational root_lo = BigRational(s) * scale;
    BigRational root_hi = BigRational(s + 1) * scale;
    BigRational n_lo = sb_ > 0 ? BigRational(sa_) + root_lo : BigRational(sa_) - root_hi;
    BigRational n_hi = sb_ > 0 ? BigRational(sa_) + root_hi : BigRational(sa_) - root_lo;
    if (sc_ > 0) return {n_lo / BigRational(sc_), n_hi / BigRational(sc_)};
    return {n_hi / BigRational(sc_), n_lo / BigRational(sc_)};
  }

  Enclosure enclose_series(unsigned bits) const {
    // Tail after K terms is below 2*B^-(K+1)!.
    const double lb = std::log2(static_cast<double>(base_));
    unsigned k = 1;
    unsigned long long fact_next = 2;  // (k+1)!
    while (static_cast<double>(fact_next) * lb < bits + 2.0) {
      ++k;
      fact_next *= (k + 1);
      if (fact_next > 400000ULL) throw InsufficientPrecision("factorial series enclosure too fine");
    }
    BigRational sum = 0;
    unsigned long long f = 1;
    for (unsigned j = 1; j <= k; ++j) {
      f *= j;
      sum += BigRational(BigInt(1), boost::multiprecision::pow(BigInt(base_), static_cast<unsigned>(f)));
    }
    BigRational tail(BigInt(2), boost::multiprecision::pow(BigInt(base_), static_cast<unsigned>(fact_next)));
    return {sum, sum + tail};
  }

  Kind kind_ = Kind::QuadraticSurd;
  std::string spec_;
  long long sa_ = 0, sb_ = 1, sd_ = 5, sc_ = 2;
  long long base_ = 10;
  BigRational dec_lo_, dec_hi_;
  unsigned decimal_bits_ = 0;
};

}  // namespace nicis
