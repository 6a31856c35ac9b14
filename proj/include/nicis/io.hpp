#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nicis/conjugation/scheme.hpp"
#include "nicis/dynamics/classify.hpp"
#include "nicis/dynamics/denjoy_koksma.hpp"
#include "nicis/dynamics/pushforward.hpp"
#include "nicis/errors.hpp"
#include "nicis/number_theory/returns.hpp"
#include "nicis/skew_product/phi_series.hpp"
#include "nicis/skew_product/skew_product.hpp"

namespace nicis::io {

// std::map-backed, so keys are emitted in sorted order.
using Json = nlohmann::json;

// RFC 4180: quote when the field holds a comma, quote, CR or LF; double embedded quotes.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

// Shortest decimal that round-trips the double.
inline std::string num(double v) { return Json(v).dump(); }

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) os_ << ',';
      os_ << csv_field(fields[i]);
    }
    os_ << "\r\n";
  }

 private:
  std::ostream& os_;
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* d = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = d[v & 15];
  return s;
}

// Hash of the canonical (sorted, compact) dump.
inline std::string config_hash(const Json& config) { return hex64(fnv1a64(config.dump())); }

// JSON with // and /* */ comments. The seed is mandatory.
inline Json parse_config(const std::string& text, const std::string& origin = "config") {
  Json j;
  try {
    j = Json::parse(text, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(origin + ": top level must be an object");
  if (!j.contains("seed")) throw ConfigError(origin + ": missing mandatory \"seed\"");
  if (!j["seed"].is_number_unsigned()) throw ConfigError(origin + ": \"seed\" must be a non-negative integer");
  return j;
}

inline Json load_config(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot read config " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), p.string());
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

inline void write_json(const std::filesystem::path& p, const Json& j) { write_text(p, j.dump(2) + "\n"); }

inline std::string big(const BigInt& v) { return v.str(); }
inline std::string rat(const BigRational& v) {
  return boost::multiprecision::numerator(v).str() + "/" + boost::multiprecision::denominator(v).str();
}

inline Json to_json(const Rational& r) { return Json{{"p", big(r.p)}, {"q", big(r.q)}}; }

// ---- number theory

inline void write_convergents_csv(std::ostream& os, const RotationNumber& alpha) {
  CsvWriter w(os);
  w.row({"k", "a_k", "p_k", "q_k"});
  for (const auto& r : convergent_table(alpha)) w.row({std::to_string(r.k), big(r.a), big(r.p), big(r.q)});
}

// ---- skew product

inline Json to_json(const PhiSeries& phi) {
  Json qs = Json::array();
  for (const auto& q : phi.qs()) qs.push_back(big(q));
  return Json{{"alpha_spec", phi.alpha_spec()}, {"qs", qs}, {"n_terms", phi.n_terms()}};
}

inline PhiSeries phi_from_json(const Json& j) {
  try {
    const auto spec = j.at("alpha_spec").get<std::string>();
    std::vector<BigInt> qs;
    for (const auto& q : j.at("qs")) qs.emplace_back(q.get<std::string>());
    if (qs.size() != j.at("n_terms").get<std::size_t>()) throw ConfigError("n_terms does not match qs");
    return PhiSeries::from_denominators(RotationNumber::expand(spec, 16), qs);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("PhiSeries JSON: ") + e.what());
  }
}

// Columns m, x_m (decimal, 40 digits), y_m - y_0.
inline void write_orbit_csv(std::ostream& os, const OrbitTrace& tr) {
  CsvWriter w(os);
  w.row({"m", "x_m", "dy"});
  for (const auto& s : tr.samples) w.row({std::to_string(s.m), s.x.to_decimal(40), num(s.dy)});
}

// ---- dynamics

inline void write_dk_csv(std::ostream& os, const std::vector<DKEntry>& prof) {
  CsvWriter w(os);
  w.row({"q", "sup_abs_phi_q", "crosscheck"});
  for (const auto& e : prof) w.row({big(e.q), num(e.sup), std::isnan(e.crosscheck) ? "" : num(e.crosscheck)});
}

inline Json to_json(const CoverageReport& r) {
  return Json{{"n_terms", r.n_terms},         {"samples", r.samples},
              {"cols", r.grid.cols},          {"rows", r.grid.rows},
              {"Y", r.grid.Y},                {"outside", r.outside},
              {"covered_fraction", r.covered_fraction}, {"chi2", r.chi2},
              {"chi2_critical", r.chi2_critical},       {"chi2_pass", r.chi2_pass},
              {"marginal_3sigma_pass", r.marginal_3sigma_pass}};
}

// ---- conjugation scheme

inline Json to_json(const RotationEstimate& r) {
  return Json{{"value", r.value}, {"error_bar", r.error_bar}, {"steps", r.steps}};
}

inline Json to_json(const BandCertificate& c) {
  return Json{{"by", to_string(c.by)},
              {"q", big(c.q)},
              {"lipschitz_threshold", c.lipschitz_threshold},
              {"image_circles_ok", c.image_circles_ok},
              {"orbits_checked", c.orbits_checked},
              {"orbits_hit", c.orbits_hit},
              {"worst_orbit_max_y", c.worst_orbit_max_y},
              {"note", c.note}};
}

inline Json to_json(const Selection& s) {
  Json rows = Json::array();
  for (const auto& r : s.rows) {
    Json row{{"k", r.k},
             {"candidate", to_json(r.r)},
             {"error_hi", static_cast<double>(r.error.hi)},
             {"monotone", to_string(r.monotone)},
             {"bound_22", to_string(r.bound22)},
             {"mode_bound", to_string(r.mode_bound)}};
    if (r.band) row["band"] = to_string(r.band->by);
    rows.push_back(row);
  }
  Json j{{"feasible", s.feasible}, {"rows", rows}, {"surrogate_constant", s.surrogate_constant}, {"note", s.note}};
  if (s.feasible) {
    j["chosen"] = to_json(s.chosen);
    j["k"] = s.k;
    j["certificate"] = to_json(s.band);
  } else {
    j["binding"] = s.binding;
  }
  return j;
}

inline Json to_json(const SchemeReport& rep) {
  Json stages = Json::array();
  for (const auto& st : rep.stages) {
    Json s{{"n", st.n},
           {"alpha_n", to_json(st.alpha_n)},
           {"q_n", big(st.alpha_n.q)},
           {"band", {{"a", rat(st.band.a)}, {"b", rat(st.band.b)}, {"c", rat(st.band.c)}}},
           {"a_next", st.outer},
           {"eps_n", rat(st.eps)},
           {"L_k", st.L_k},
           {"L_h", st.L_h},
           {"C_n", st.C},
           {"L_H", st.L_H},
           {"kmap",
            {{"jacobian_residual", st.kmap.jacobian_residual},
             {"graph_residual", st.kmap.graph_residual},
             {"identity_residual", st.kmap.identity_residual},
             {"fixed_line_residual", st.kmap.fixed_line_residual},
             {"precision_gap", st.kmap.precision_gap},
             {"steps", st.kmap.steps},
             {"halvings", st.kmap.halvings}}},
           {"commutation_residual", st.commutation_residual},
           {"inverse_residual", st.inverse_residual},
           {"image_circles_ok", st.image_circles_ok},
           {"selection", to_json(st.selection)}};
    if (st.rotation) s["rotation"] = to_json(*st.rotation);
    if (st.entry) {
      const auto& e = *st.entry;
      s["orbit_entry"] = {{"samples", e.samples},
                          {"entered", e.entered},
                          {"entered_witness", e.entered_witness},
                          {"lipschitz_certified", e.lipschitz_certified},
                          {"failed", e.failed},
                          {"max_iterations_used", e.max_iterations_used},
                          {"max_witness_j", big(e.max_witness_j)},
                          {"all_certified", e.all_certified()}};
    }
    if (st.distance) {
      const auto& d = *st.distance;
      Json dj{{"from", d.from},
              {"to", d.to},
              {"measured", d.measured},
              {"j_max", d.j_max},
              {"grid", d.grid},
              {"below_eps", d.below_eps},
              {"lipschitz_bound", d.lipschitz_bound},
              {"printed_bound", d.printed_bound},
              {"bound", d.bound}};
      if (d.eps) dj["eps"] = rat(*d.eps);
      s["distance"] = dj;
    }
    stages.push_back(s);
  }
  Json j{{"alpha_spec", rep.alpha_spec},
         {"mode", to_string(rep.mode)},
         {"n_stages", rep.n_stages},
         {"alpha_1", to_json(rep.alpha_1)},
         {"feasible", rep.feasible},
         {"completed", rep.completed},
         {"stages", stages},
         {"notes", rep.notes}};
  if (rep.infeasible_stage) {
    j["infeasible_stage"] = *rep.infeasible_stage;
    j["binding"] = rep.binding;
  }
  if (rep.f0_rotation) j["f0_rotation"] = to_json(*rep.f0_rotation);
  return j;
}

}  // namespace nicis::io
