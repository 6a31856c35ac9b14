#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nicis/conjugation/scheme.hpp"
#include "nicis/dynamics/classify.hpp"
#include "nicis/dynamics/denjoy_koksma.hpp"
#include "nicis/dynamics/density.hpp"
#include "nicis/dynamics/pushforward.hpp"
#include "nicis/dynamics/rotation.hpp"
#include "nicis/io.hpp"
#include "nicis/number_theory/returns.hpp"
#include "nicis/parallel.hpp"
#include "nicis/skew_product/phi_series.hpp"
#include "nicis/skew_product/skew_product.hpp"

namespace fs = std::filesystem;
using namespace nicis;
using io::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

// Keys that only affect where output goes or how much is logged; kept out of the config hash.
const std::vector<std::string> kPlacementKeys = {"out", "run-name", "config", "verbose"};

struct Run {
  std::string command;  // "cf", "skew dk", ...
  Json params = Json::object();
  std::string hash;
  fs::path dir;
  Json results = Json::object();
  bool checks_ok = true;
  // Created on first write, so a run that fails early leaves nothing behind.
  fs::path file(const std::string& name) const {
    fs::create_directories(dir);
    return dir / name;
  }
};

std::string option_key(const CLI::Option* o) {
  std::string n = o->get_name(false, true);
  while (!n.empty() && n.front() == '-') n.erase(0, 1);
  return n;
}

bool placement_key(const std::string& k) {
  return std::find(kPlacementKeys.begin(), kPlacementKeys.end(), k) != kPlacementKeys.end();
}

// Config lookup order: block[cmd][sub][key], block[cmd][key], block[key]; '-' and '_' are interchangeable.
const Json* config_value(const Json& cfg, const std::vector<std::string>& path, const std::string& key) {
  std::string alt = key;
  std::replace(alt.begin(), alt.end(), '-', '_');
  for (std::size_t depth = path.size() + 1; depth-- > 0;) {
    const Json* node = &cfg;
    bool ok = true;
    for (std::size_t i = 0; i < depth && ok; ++i) {
      if (!node->contains(path[i]) || !(*node)[path[i]].is_object()) ok = false;
      else node = &(*node)[path[i]];
    }
    if (!ok) continue;
    for (const auto& k : {key, alt})
      if (node->contains(k) && !(*node)[k].is_object()) return &(*node)[k];
  }
  return nullptr;
}

std::vector<std::string> json_tokens(const Json& v) {
  std::vector<std::string> out;
  auto one = [](const Json& x) { return x.is_string() ? x.get<std::string>() : x.dump(); };
  if (v.is_array())
    for (const auto& e : v) out.push_back(one(e));
  else if (v.is_boolean())
    out.push_back(v.get<bool>() ? "true" : "false");
  else
    out.push_back(one(v));
  return out;
}

// Fills options not given on the command line from the config, then records every effective value.
void resolve_options(const std::vector<CLI::App*>& chain, const Json* cfg, const std::vector<std::string>& path,
                     Run& run) {
  for (CLI::App* app : chain) {
    for (CLI::Option* o : app->get_options()) {
      if (o == app->get_help_ptr()) continue;
      const std::string key = option_key(o);
      if (key.empty()) continue;
      const bool flag = o->get_expected_max() == 0;
      if (cfg && o->count() == 0) {
        if (const Json* v = config_value(*cfg, path, key)) {
          for (const auto& t : json_tokens(*v)) o->add_result(t);
          o->run_callback();
        }
      }
      if (placement_key(key)) continue;
      std::vector<std::string> vals = o->count() ? o->results() : std::vector<std::string>{o->get_default_str()};
      if (flag) {
        run.params[key] = o->as<bool>();
        continue;
      }
      if (o->get_expected_max() > 1 && vals.size() == 1 && o->count() == 0) {
        // vector default "[a,b]" from CLI11
        std::string s = vals[0];
        if (s.size() >= 2 && s.front() == '[') s = s.substr(1, s.size() - 2);
        vals.clear();
        std::stringstream ss(s);
        for (std::string t; std::getline(ss, t, ',');) vals.push_back(t);
      }
      if (o->get_expected_max() > 1) run.params[key] = vals;
      else run.params[key] = vals.empty() ? "" : vals.back();
    }
  }
}

fs::path output_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("NICIS_OUTPUT_ROOT"); env && *env) return env;
  return "nicis-runs";
}

void open_run(Run& run, const std::string& out_flag, const std::string& run_name) {
  Json hashed = run.params;
  hashed["command"] = run.command;
  run.hash = io::config_hash(hashed);
  std::string name = run_name;
  if (name.empty()) {
    name = run.command;
    std::replace(name.begin(), name.end(), ' ', '-');
    name += "-" + run.hash.substr(0, 8);
  }
  run.dir = output_root(out_flag) / name;
}

void close_run(const Run& run) {
  Json j{{"command", run.command},
         {"config", run.params},
         {"config_hash", run.hash},
         {"results", run.results},
         {"checks_ok", run.checks_ok}};
  io::write_json(run.file("run.json"), j);
  std::cout << "wrote " << run.dir.string() << "\n";
}

template <class F>
void write_csv_file(const fs::path& p, F&& body) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  body(os);
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream ss;
  ss << std::setprecision(prec) << v;
  return ss.str();
}

BigRational parse_rational(const std::string& s) {
  try {
    if (auto slash = s.find('/'); slash != std::string::npos)
      return BigRational(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
    auto dot = s.find('.');
    if (dot == std::string::npos) return BigRational(BigInt(s));
    const std::string frac = s.substr(dot + 1);
    const std::string whole = s.substr(0, dot).empty() ? "0" : s.substr(0, dot);
    BigInt den = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac.size()));
    return BigRational(BigInt(whole) * den + (frac.empty() ? BigInt(0) : BigInt(frac)), den);
  } catch (const std::exception&) {
    throw ConfigError("not a rational number: '" + s + "'");
  }
}

// "a,b,c;a,b,c;..." with entries p/q or decimals.
BandSchedule parse_bands(const std::string& s) {
  std::vector<Band> bands;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ';');) {
    std::vector<BigRational> v;
    std::stringstream is(item);
    for (std::string t; std::getline(is, t, ',');) v.push_back(parse_rational(t));
    if (v.size() != 3) throw ConfigError("each band needs a,b,c: '" + item + "'");
    bands.push_back({v[0], v[1], v[2]});
  }
  try {
    return BandSchedule(std::move(bands));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

PhiSeries make_phi(const RotationNumber& alpha, std::size_t terms) {
  return terms == 0 ? PhiSeries::machine_precision(alpha) : PhiSeries::build(alpha, terms);
}

Json big_list(const std::vector<BigInt>& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(x.str());
  return a;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Annulus maps without interior compact invariant sets: number theory, skew products, conjugation scheme"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, run_name;
  std::uint64_t seed = 1;
  app.add_option("--config", config_path, "JSON config (// comments allowed); must contain \"seed\"");
  app.add_option("--out", out_dir, "output root (default $NICIS_OUTPUT_ROOT, else ./nicis-runs)");
  app.add_option("--run-name", run_name, "run directory name (default <command>-<config hash>)");
  app.add_option("--seed", seed, "random seed");

  // cf
  auto* cf = app.add_subcommand("cf", "continued fraction, closest returns, Liouville witness, phi denominators");
  std::string cf_alpha = "golden";
  std::size_t cf_depth = 10, cf_phi_count = 0;
  std::uint64_t cf_returns_qmax = 0;
  double cf_tau = 0.0, cf_eps = 1e-3;
  std::string cf_witness_qmax;
  cf->add_option("--alpha", cf_alpha, "alpha spec");
  cf->add_option("--depth", cf_depth, "partial quotients")->check(CLI::Range(1, 100000));
  cf->add_option("--liouville-tau", cf_tau, "search a witness |alpha - p/q| < eps / q^tau (0: skip)");
  cf->add_option("--liouville-eps", cf_eps, "eps of the witness search");
  cf->add_option("--liouville-qmax", cf_witness_qmax, "largest q searched (default 2^4000)");
  cf->add_option("--returns-qmax", cf_returns_qmax, "list closest return times up to this bound (0: skip)");
  cf->add_option("--phi-count", cf_phi_count, "select this many phi denominators (0: skip)");

  // skew
  auto* skew = app.add_subcommand("skew", "skew product F(x,y) = (x + alpha, y + phi(x))");
  skew->require_subcommand(1);
  skew->fallthrough();
  std::string sk_alpha = "golden";
  skew->add_option("--alpha", sk_alpha, "alpha spec");

  auto* dk = skew->add_subcommand("dk", "Denjoy-Koksma profile over the series' own q_n");
  std::size_t dk_terms = 6;
  std::uint64_t dk_grid = 1u << 20;
  dk->add_option("--terms", dk_terms, "phi terms (0: machine precision)");
  dk->add_option("--grid", dk_grid, "grid points for the sup")->check(CLI::PositiveNumber);

  auto* res = skew->add_subcommand("residuals", "coboundary, symmetry, involution and mean residuals");
  std::size_t res_terms = 6, res_samples = 10000, res_starts = 100;
  std::int64_t res_steps = 1000;
  res->add_option("--terms", res_terms, "phi terms (0: machine precision)");
  res->add_option("--samples", res_samples, "random x for coboundary and symmetry");
  res->add_option("--involution-starts", res_starts, "orbits for the involution residual");
  res->add_option("--involution-steps", res_steps, "steps per involution orbit");

  auto* cls = skew->add_subcommand("classify", "finite-horizon D/P/N verdicts over uniform fibers");
  std::size_t cls_terms = 0, cls_samples = 1000;
  std::int64_t cls_horizon = 1000000;
  double cls_a = 0.5, cls_b = 1.0, cls_strip = 1e-3;
  cls->add_option("--terms", cls_terms, "phi terms (0: machine precision)");
  cls->add_option("--samples", cls_samples, "fibers");
  cls->add_option("--horizon", cls_horizon, "steps in each time direction")->check(CLI::PositiveNumber);
  cls->add_option("--a", cls_a, "band lower edge");
  cls->add_option("--b", cls_b, "band upper edge");
  cls->add_option("--strip-eps", cls_strip, "strip half-width");

  auto* orb = skew->add_subcommand("orbit", "one orbit as CSV");
  std::size_t orb_terms = 6;
  double orb_x0 = 0.0, orb_y0 = 0.0;
  std::int64_t orb_steps = 1000, orb_stride = 1;
  orb->add_option("--terms", orb_terms, "phi terms (0: machine precision)");
  orb->add_option("--x0", orb_x0, "start x");
  orb->add_option("--y0", orb_y0, "start y");
  orb->add_option("--steps", orb_steps, "steps (negative: backward)");
  orb->add_option("--stride", orb_stride, "record every stride-th step")->check(CLI::PositiveNumber);

  auto* cov = skew->add_subcommand("coverage", "pushforward of dx under x -> (x, h_N(x))");
  std::vector<std::size_t> cov_n = {10, 40};
  std::uint64_t cov_samples = 1000000;
  int cov_cols = 50, cov_rows = 20;
  double cov_Y = 2.0;
  cov->add_option("--n-values", cov_n, "truncations N")->delimiter(',');
  cov->add_option("--samples", cov_samples, "uniform x samples");
  cov->add_option("--cols", cov_cols, "x cells");
  cov->add_option("--rows", cov_rows, "y cells");
  cov->add_option("--Y", cov_Y, "y window [-Y, Y]");

  auto* dns = skew->add_subcommand("dense", "finest eps such that an orbit is eps-dense in S^1 x [-Y, Y]");
  std::size_t dns_terms = 0;
  double dns_Y = 0.5;
  std::int64_t dns_horizon = 1000000;
  int dns_trials = 1;
  dns->add_option("--terms", dns_terms, "phi terms (0: machine precision)");
  dns->add_option("--Y", dns_Y, "window half-height");
  dns->add_option("--horizon", dns_horizon, "orbit length");
  dns->add_option("--trials", dns_trials, "orbits");

  // akc
  auto* akc = app.add_subcommand("akc", "approximation-by-conjugation scheme");
  std::string akc_alpha = "series:factorial10", akc_mode = "c0", akc_bands;
  std::size_t akc_stages = 3, akc_cap = 4, akc_entry = 200, akc_reps = 200, akc_depth = 60;
  double akc_safety = 1e3;
  bool akc_verbose = false;
  akc->add_option("--alpha", akc_alpha, "alpha spec");
  akc->add_option("--stages", akc_stages, "stages to run");
  akc->add_option("--stage-cap", akc_cap, "largest allowed stage count");
  akc->add_option("--mode", akc_mode, "c0 or cinf");
  akc->add_option("--bands", akc_bands, "a,b,c;a,b,c;... (default dyadic schedule)");
  akc->add_option("--entry-samples", akc_entry, "sampled f_n-orbits per stage");
  akc->add_option("--fiber-reps", akc_reps, "fiber representatives for band certification");
  akc->add_option("--depth-cap", akc_depth, "convergent indices considered per stage");
  akc->add_option("--cinf-safety", akc_safety, "surrogate safety factor in cinf mode");
  akc->add_flag("--verbose", akc_verbose, "log stage phases to stderr");

  // report
  auto* rep = app.add_subcommand("report", "merge run directories into a manifest");
  std::vector<std::string> rep_runs;
  std::string rep_manifest;
  rep->add_option("runs", rep_runs, "run directories")->required();
  rep->add_option("--manifest", rep_manifest, "manifest path (default <output root>/manifest.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    std::optional<Json> cfg;
    if (!config_path.empty()) cfg = io::load_config(config_path);

    std::vector<CLI::App*> chain{&app};
    std::vector<std::string> path;
    for (CLI::App* a = &app; !a->get_subcommands().empty();) {
      a = a->get_subcommands().front();
      chain.push_back(a);
      path.push_back(a->get_name());
    }
    Run run;
    for (std::size_t i = 0; i < path.size(); ++i) run.command += (i ? " " : "") + path[i];
    resolve_options(chain, cfg ? &*cfg : nullptr, path, run);

    if (rep->parsed()) {
      Json runs = Json::array();
      for (const auto& r : rep_runs) {
        const fs::path d(r);
        if (!fs::is_directory(d)) throw ConfigError("run directory not found: " + r);
        if (!fs::exists(d / "run.json")) throw ConfigError("not a run directory (no run.json): " + r);
        std::ifstream in(d / "run.json");
        const Json rj = Json::parse(in);
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(d))
          if (e.is_regular_file()) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        Json fl = Json::array();
        for (const auto& f : files) {
          std::ifstream fin(f, std::ios::binary);
          std::stringstream ss;
          ss << fin.rdbuf();
          const std::string bytes = ss.str();
          fl.push_back({{"name", f.filename().string()}, {"bytes", bytes.size()}, {"fnv1a64", io::hex64(io::fnv1a64(bytes))}});
        }
        runs.push_back({{"dir", fs::absolute(d).lexically_normal().string()},
                        {"command", rj.value("command", "")},
                        {"config_hash", rj.value("config_hash", "")},
                        {"config", rj.value("config", Json::object())},
                        {"checks_ok", rj.value("checks_ok", true)},
                        {"files", fl}});
      }
      const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
      std::ostringstream ts;
      ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
      const fs::path mp = rep_manifest.empty() ? output_root(out_dir) / "manifest.json" : fs::path(rep_manifest);
      if (mp.has_parent_path()) fs::create_directories(mp.parent_path());
      io::write_json(mp, Json{{"generated_at", ts.str()}, {"runs", runs}});
      std::cout << "manifest " << mp.string() << " (" << runs.size() << " runs)\n";
      return kExitOk;
    }

    open_run(run, out_dir, run_name);

    if (cf->parsed()) {
      const RotationNumber alpha = RotationNumber::expand(cf_alpha, cf_depth);
      write_csv_file(run.file("convergents.csv"), [&](std::ostream& os) { io::write_convergents_csv(os, alpha); });
      run.results["partial_quotients"] = big_list(alpha.partial_quotients());
      std::cout << "k,a_k,p_k,q_k\n";
      for (const auto& r : convergent_table(alpha)) std::cout << r.k << "," << r.a << "," << r.p << "," << r.q << "\n";
      if (cf_tau > 0) {
        const BigInt qmax = cf_witness_qmax.empty() ? BigInt(1) << 4000 : BigInt(cf_witness_qmax);
        const auto w = liouville_witness(alpha, cf_tau, cf_eps, qmax);
        run.results["liouville_witness"] = w ? io::to_json(*w) : Json(nullptr);
        std::cout << "liouville witness (tau " << cf_tau << ", eps " << cf_eps << "): "
                  << (w ? w->p.str() + "/" + w->q.str() : std::string("NotFound")) << "\n";
      }
      if (cf_returns_qmax > 0) {
        const auto cr = closest_return_times(alpha, cf_returns_qmax);
        run.results["closest_returns"] = cr;
        std::cout << "closest returns:";
        for (auto q : cr) std::cout << " " << q;
        std::cout << "\n";
      }
      if (cf_phi_count > 0) {
        const auto qs = select_phi_denominators(alpha, cf_phi_count);
        run.results["phi_denominators"] = big_list(qs);
        std::cout << "phi denominators:";
        for (const auto& q : qs) std::cout << " " << q;
        std::cout << "\n";
      }
    } else if (skew->parsed()) {
      const RotationNumber alpha = RotationNumber::expand(sk_alpha, 16);
      auto emit_phi = [&](const PhiSeries& phi) { io::write_json(run.file("phi.json"), io::to_json(phi)); };
      if (dk->parsed()) {
        const PhiSeries phi = make_phi(alpha, dk_terms);
        emit_phi(phi);
        const auto prof = denjoy_koksma_profile(phi, phi.qs(), dk_grid, seed);
        const double var = total_variation(phi, default_variation_grid(phi));
        write_csv_file(run.file("dk.csv"), [&](std::ostream& os) { io::write_dk_csv(os, prof); });
        bool bounded = true, decreasing = true;
        Json rows = Json::array();
        for (std::size_t i = 0; i < prof.size(); ++i) {
          bounded = bounded && prof[i].sup <= var;
          if (i >= 2) decreasing = decreasing && prof[i].sup < prof[i - 1].sup;
          rows.push_back({{"q", prof[i].q.str()}, {"sup", prof[i].sup}});
          std::cout << "q " << prof[i].q << "  sup|phi_q| " << fmt(prof[i].sup) << "\n";
        }
        std::cout << "Var(phi_N) " << fmt(var) << "  bounded " << bounded << "  decreasing after 2nd " << decreasing << "\n";
        run.results = {{"profile", rows}, {"variation", var}, {"var_bound_holds", bounded}, {"decreasing_after_second", decreasing}};
        run.checks_ok = bounded;
      } else if (res->parsed()) {
        const PhiSeries phi = make_phi(alpha, res_terms);
        emit_phi(phi);
        const TransferFunction h(phi);
        std::mt19937_64 rng(seed);
        double cob = 0, sym = 0;
        for (std::size_t i = 0; i < res_samples; ++i) {
          const Angle x = Angle::from_raw((static_cast<u128>(rng()) << 64) | rng());
          cob = std::max(cob, std::fabs(h.eval(x + phi.alpha()) - h.eval(x) - phi.eval(x)));
          sym = std::max(sym, std::fabs(phi.eval(-x - phi.alpha()) - phi.eval(x)));
        }
        const double inv = involution_residual(SkewProduct(phi), res_starts, res_steps, seed);
        const double mean = mean_residual(phi);
        const bool ok = cob < 1e-12 && sym < 1e-12 && inv < 1e-10 && mean < 1e-12;
        std::cout << "coboundary " << fmt(cob, 3) << "\nsymmetry " << fmt(sym, 3) << "\ninvolution " << fmt(inv, 3)
                  << "\nmean " << fmt(mean, 3) << "\n" << (ok ? "all below thresholds" : "THRESHOLD EXCEEDED") << "\n";
        run.results = {{"coboundary", cob}, {"symmetry", sym}, {"involution", inv}, {"mean", mean},
                       {"thresholds", {{"coboundary", 1e-12}, {"symmetry", 1e-12}, {"involution", 1e-10}, {"mean", 1e-12}}}};
        run.checks_ok = ok;
      } else if (cls->parsed()) {
        const PhiSeries phi = make_phi(alpha, cls_terms);
        emit_phi(phi);
        const SkewProduct F(phi);
        std::mt19937_64 rng(seed);
        std::vector<Angle> xs(cls_samples);
        for (auto& x : xs) x = Angle::from_raw((static_cast<u128>(rng()) << 64) | rng());
        std::vector<Verdict> v(cls_samples), vm(cls_samples);
        parallel_for(cls_samples, [&](std::size_t i) {
          v[i] = classify_fiber(F, xs[i], cls_horizon, cls_a, cls_b, cls_strip).verdict;
          vm[i] = classify_fiber(F, -xs[i], cls_horizon, cls_a, cls_b, cls_strip).verdict;
        });
        std::map<std::string, std::size_t> hist;
        std::size_t decided = 0, agree = 0;
        for (std::size_t i = 0; i < cls_samples; ++i) {
          ++hist[to_string(v[i])];
          if (v[i] != Verdict::Undecided && vm[i] != Verdict::Undecided) {
            ++decided;
            if (vm[i] == mirror(v[i])) ++agree;
          }
        }
        write_csv_file(run.file("verdicts.csv"), [&](std::ostream& os) {
          io::CsvWriter w(os);
          w.row({"x", "verdict", "verdict_of_minus_x"});
          for (std::size_t i = 0; i < cls_samples; ++i) w.row({xs[i].to_decimal(20), to_string(v[i]), to_string(vm[i])});
        });
        const double dense = cls_samples ? static_cast<double>(hist["DenseLike"]) / static_cast<double>(cls_samples) : 0.0;
        const double mirror_frac = decided ? static_cast<double>(agree) / static_cast<double>(decided) : 1.0;
        for (const auto& [k, c] : hist) std::cout << k << " " << c << "\n";
        std::cout << "DenseLike fraction " << fmt(dense) << "  mirror agreement " << fmt(mirror_frac) << " of " << decided
                  << " decided pairs\n";
        run.results = {{"histogram", hist}, {"dense_fraction", dense}, {"mirror_agreement", mirror_frac}, {"decided_pairs", decided}};
      } else if (orb->parsed()) {
        const PhiSeries phi = make_phi(alpha, orb_terms);
        emit_phi(phi);
        const OrbitTrace tr = SkewProduct(phi).iterate(AnnulusPoint::make(orb_x0, orb_y0), orb_steps, orb_stride);
        write_csv_file(run.file("orbit.csv"), [&](std::ostream& os) { io::write_orbit_csv(os, tr); });
        std::cout << "y range [" << fmt(tr.y_min) << ", " << fmt(tr.y_max) << "] over " << orb_steps << " steps\n";
        run.results = {{"y_min", tr.y_min}, {"y_max", tr.y_max}, {"recorded", tr.samples.size()}};
      } else if (cov->parsed()) {
        const auto reps = pushforward_histogram(alpha, cov_n, CellGrid{cov_cols, cov_rows, cov_Y}, cov_samples, seed);
        write_csv_file(run.file("coverage.csv"), [&](std::ostream& os) {
          io::CsvWriter w(os);
          w.row({"n_terms", "row", "col", "count"});
          for (const auto& r : reps)
            for (int i = 0; i < r.grid.rows; ++i)
              for (int j = 0; j < r.grid.cols; ++j)
                w.row({std::to_string(r.n_terms), std::to_string(i), std::to_string(j), std::to_string(r.count(i, j))});
        });
        Json arr = Json::array();
        bool chi_ok = true;
        for (const auto& r : reps) {
          arr.push_back(io::to_json(r));
          chi_ok = chi_ok && r.chi2_pass;
          std::cout << "N " << r.n_terms << "  covered " << fmt(r.covered_fraction) << "  chi2 " << fmt(r.chi2) << " (crit "
                    << fmt(r.chi2_critical) << ")\n";
        }
        run.results = {{"reports", arr}};
        run.checks_ok = chi_ok;
      } else if (dns->parsed()) {
        const PhiSeries phi = make_phi(alpha, dns_terms);
        emit_phi(phi);
        const auto d = dense_orbit_search(SkewProduct(phi), dns_Y, dns_horizon, dns_trials, seed);
        std::cout << "best eps " << fmt(d.best_eps) << " at horizon " << dns_horizon << "\n";
        run.results = {{"best_eps", std::isfinite(d.best_eps) ? Json(d.best_eps) : Json(nullptr)}, {"per_trial", Json::array()}};
        for (double e : d.per_trial) run.results["per_trial"].push_back(std::isfinite(e) ? Json(e) : Json(nullptr));
      }
    } else if (akc->parsed()) {
      SchemeOptions opt;
      opt.n_stages = akc_stages;
      opt.stage_cap = akc_cap;
      opt.mode = parse_mode(akc_mode);
      opt.cinf_safety = akc_safety;
      opt.depth_cap = akc_depth;
      opt.entry_samples = akc_entry;
      opt.fiber_reps = akc_reps;
      opt.seed = seed;
      if (akc_verbose) opt.progress = [](const std::string& m) { std::cerr << m << "\n"; };
      const BandSchedule bands = akc_bands.empty() ? BandSchedule::dyadic_default(std::max<std::size_t>(akc_stages + 1, 2))
                                                   : parse_bands(akc_bands);
      const SchemeReport sr = run_scheme(RotationNumber::expand(akc_alpha, 8), bands, opt);
      const Json sj = io::to_json(sr);
      io::write_json(run.file("scheme.json"), sj);
      write_csv_file(run.file("stages.csv"), [&](std::ostream& os) {
        io::CsvWriter w(os);
        w.row({"n", "q_n", "eps_n", "C_n", "L_H", "next_q", "certified_by", "distance", "distance_eps", "entry_certified"});
        for (const auto& st : sr.stages) {
          const bool chosen = st.selection.feasible;
          w.row({std::to_string(st.n), st.alpha_n.q.str(), io::rat(st.eps), io::num(st.C), io::num(st.L_H),
                 chosen ? st.selection.chosen.q.str() : "", chosen ? to_string(st.selection.band.by) : "",
                 st.distance ? io::num(st.distance->measured) : "",
                 st.distance && st.distance->eps ? io::rat(*st.distance->eps) : "",
                 st.entry ? (st.entry->all_certified() ? "true" : "false") : ""});
        }
      });
      bool ok = true;
      for (const auto& st : sr.stages) {
        std::cout << "stage " << st.n << "  q_n " << st.alpha_n.q << "  eps_n " << io::rat(st.eps) << "  C_n " << fmt(st.C);
        if (st.selection.feasible) {
          std::cout << "  next q " << st.selection.chosen.q << " (" << to_string(st.selection.band.by) << ")";
        } else {
          std::cout << "  Infeasible, binding " << st.selection.binding;
        }
        std::cout << "\n";
        if (st.distance) {
          std::cout << "  d(f_" << st.distance->from << ", f_" << st.distance->to << ") " << fmt(st.distance->measured, 4);
          if (st.distance->eps) std::cout << " vs eps " << io::rat(*st.distance->eps);
          std::cout << "\n";
          ok = ok && st.distance->below_eps;
        }
        if (st.entry) {
          std::cout << "  orbit entry: " << st.entry->entered << " direct, " << st.entry->entered_witness << " witness, "
                    << st.entry->lipschitz_certified << " Lipschitz, " << st.entry->failed << " failed\n";
          ok = ok && st.entry->all_certified();
        }
      }
      if (sr.f0_rotation) std::cout << "f_0 rotation " << fmt(sr.f0_rotation->value, 12) << "\n";
      std::cout << (sr.feasible ? "feasible" : "Infeasible at stage " + std::to_string(*sr.infeasible_stage) + ", binding " + sr.binding)
                << "\n";
      run.results = sj;
      run.checks_ok = ok;
    }
    close_run(run);
    return run.checks_ok ? kExitOk : kExitCheckFailed;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InsufficientPrecision& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}
