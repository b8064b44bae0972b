// Run configurations and the four command-line workflows. A single JSON file
// describes a run (workflow tag, system parameters, grid, time control,
// optional parameter sweep, output directory); each workflow writes CSV,
// JSON, and SVG artifacts under the output directory and returns a Report
// whose JSON lists every file written. Identical configurations produce
// byte-identical artifacts; sweep items run concurrently into disjoint
// subdirectories, so the worker count never changes any file's content.
#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bdtaxis/evolve.hpp"
#include "bdtaxis/grid.hpp"
#include "bdtaxis/io.hpp"
#include "bdtaxis/kinetics.hpp"
#include "bdtaxis/params.hpp"
#include "bdtaxis/shadow.hpp"
#include "bdtaxis/spectral.hpp"
#include "bdtaxis/steady.hpp"

namespace bdtaxis {

enum class Workflow { analyze, simulate, continuation, shadow };

inline std::string workflow_name(Workflow w) {
  switch (w) {
    case Workflow::analyze: return "analyze";
    case Workflow::simulate: return "simulate";
    case Workflow::continuation: return "continue";
    case Workflow::shadow: return "shadow";
  }
  return "analyze";
}

inline Workflow workflow_from_name(const std::string& s) {
  if (s == "analyze") return Workflow::analyze;
  if (s == "simulate") return Workflow::simulate;
  if (s == "continue") return Workflow::continuation;
  if (s == "shadow") return Workflow::shadow;
  throw ConfigError("unknown workflow '" + s +
                    "' (expected analyze, simulate, continue, or shadow)");
}

/// Grid block: cell count (the length always comes from params.L).
struct GridConfig {
  int n = 256;
};

/// Time-integration block for the simulate workflow.
struct TimeConfig {
  double T = 200.0;
  double tol = 1e-8;   // steady-state residual target
  int stride = 0;      // snapshot every `stride` accepted steps (0: ends only)
  double dt_max = 0.25;
  double dt_fixed = 0.0;
  double cfl = 0.4;
  bool advection_implicit = false;
};

/// One cosine perturbation mode of the initial state.
struct IcMode {
  int k = 1;
  double amp_u = 0.0;
  double amp_v = 0.0;
};

/// Initial state: the coexistence state plus an optional perturbation.
struct IcConfig {
  std::string kind = "cosine";  // equilibrium | cosine | random
  std::vector<IcMode> modes = {{1, 0.01, 0.01}};
  double amplitude = 0.01;      // random kind: uniform(-amplitude, amplitude)
  unsigned long seed = 1;       // random kind: generator seed
};

struct AnalyzeConfig {
  int k_max = 0;  // 0: pick automatically
};

struct ContinueConfig {
  double s_max = 0.05;
  double ds = 2.5e-3;
  int k0 = 0;  // 0: critical mode
  double tol = 1e-10;
};

struct ShadowConfig {
  std::vector<double> eps;   // empty: use sqrt(D2) from params
  double lambda = 0.0;       // 0: solve the integral constraint
  int n_min = 0;
};

struct SweepConfig {
  std::string parameter;
  std::vector<double> values;
};

struct RunConfig {
  std::optional<Workflow> workflow;  // may be supplied by the subcommand
  SystemParams params{};
  GridConfig grid{};
  TimeConfig time{};
  IcConfig ic{};
  AnalyzeConfig analyze{};
  ContinueConfig cont{};
  ShadowConfig shadow{};
  std::optional<SweepConfig> sweep;
  std::string out = "out";
  int workers = 0;  // sweep concurrency; 0: hardware default
  bool check = false;
};

// --- JSON <-> RunConfig -----------------------------------------------------

namespace detail {

inline void check_keys(const Json& j, const std::string& ctx,
                       std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(ctx + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + ctx);
  }
}

inline double get_num(const Json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw ConfigError("'" + key + "' must be a number");
  return j.at(key).get<double>();
}

inline int get_int(const Json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer())
    throw ConfigError("'" + key + "' must be an integer");
  return j.at(key).get<int>();
}

inline bool get_bool(const Json& j, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean())
    throw ConfigError("'" + key + "' must be a boolean");
  return j.at(key).get<bool>();
}

inline std::string get_str(const Json& j, const std::string& key,
                           const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string())
    throw ConfigError("'" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

inline std::vector<double> get_num_list(const Json& j, const std::string& key) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array())
    throw ConfigError("'" + key + "' must be an array of numbers");
  for (const auto& e : j.at(key)) {
    if (!e.is_number()) throw ConfigError("'" + key + "' must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace detail

inline Json sensitivity_to_json(const Sensitivity& s) {
  switch (s.kind()) {
    case Sensitivity::Kind::constant:
      return Json{{"kind", "constant"}, {"value", s.intercept()}};
    case Sensitivity::Kind::linear:
      return Json{{"kind", "linear"}, {"intercept", s.intercept()}, {"slope", s.slope()}};
    case Sensitivity::Kind::table:
      return Json{{"kind", "table"}, {"v", s.knots()}, {"phi", s.values()}};
  }
  return Json{{"kind", "constant"}, {"value", 1.0}};
}

inline Sensitivity sensitivity_from_json(const Json& j) {
  const std::string kind = detail::get_str(j, "kind", "constant");
  if (kind == "constant") {
    detail::check_keys(j, "params.phi", {"kind", "value"});
    return Sensitivity::constant(detail::get_num(j, "value", 1.0));
  }
  if (kind == "linear") {
    detail::check_keys(j, "params.phi", {"kind", "intercept", "slope"});
    return Sensitivity::linear(detail::get_num(j, "intercept", 1.0),
                               detail::get_num(j, "slope", 0.0));
  }
  if (kind == "table") {
    detail::check_keys(j, "params.phi", {"kind", "v", "phi"});
    return Sensitivity::table(detail::get_num_list(j, "v"),
                              detail::get_num_list(j, "phi"));
  }
  throw ConfigError("params.phi.kind must be constant, linear, or table");
}

inline const std::vector<std::string>& sweepable_parameters() {
  static const std::vector<std::string> names = {
      "D1", "D2", "chi", "a1", "b1", "c1", "a2", "b2",
      "c2", "L",  "n",   "T",  "eps"};
  return names;
}

inline RunConfig parse_config(const Json& j) {
  detail::check_keys(j, "config",
                     {"workflow", "params", "grid", "time", "ic", "analyze",
                      "continue", "shadow", "sweep", "out", "workers", "check"});
  RunConfig cfg;
  if (j.contains("workflow"))
    cfg.workflow = workflow_from_name(detail::get_str(j, "workflow", ""));

  if (j.contains("params")) {
    const Json& p = j.at("params");
    detail::check_keys(p, "params",
                       {"D1", "D2", "chi", "alpha1", "alpha2", "beta1", "beta2",
                        "a1", "b1", "c1", "a2", "b2", "c2", "L", "phi"});
    SystemParams d{};
    cfg.params.D1 = detail::get_num(p, "D1", d.D1);
    cfg.params.D2 = detail::get_num(p, "D2", d.D2);
    cfg.params.chi = detail::get_num(p, "chi", d.chi);
    cfg.params.alpha1 = detail::get_num(p, "alpha1", d.alpha1);
    cfg.params.alpha2 = detail::get_num(p, "alpha2", d.alpha2);
    cfg.params.beta1 = detail::get_num(p, "beta1", d.beta1);
    cfg.params.beta2 = detail::get_num(p, "beta2", d.beta2);
    cfg.params.a1 = detail::get_num(p, "a1", d.a1);
    cfg.params.b1 = detail::get_num(p, "b1", d.b1);
    cfg.params.c1 = detail::get_num(p, "c1", d.c1);
    cfg.params.a2 = detail::get_num(p, "a2", d.a2);
    cfg.params.b2 = detail::get_num(p, "b2", d.b2);
    cfg.params.c2 = detail::get_num(p, "c2", d.c2);
    cfg.params.L = detail::get_num(p, "L", d.L);
    if (p.contains("phi")) cfg.params.phi = sensitivity_from_json(p.at("phi"));
  }

  if (j.contains("grid")) {
    const Json& g = j.at("grid");
    detail::check_keys(g, "grid", {"n"});
    cfg.grid.n = detail::get_int(g, "n", cfg.grid.n);
  }

  if (j.contains("time")) {
    const Json& t = j.at("time");
    detail::check_keys(t, "time",
                       {"T", "tol", "stride", "dt_max", "dt_fixed", "cfl",
                        "advection_implicit"});
    cfg.time.T = detail::get_num(t, "T", cfg.time.T);
    cfg.time.tol = detail::get_num(t, "tol", cfg.time.tol);
    cfg.time.stride = detail::get_int(t, "stride", cfg.time.stride);
    cfg.time.dt_max = detail::get_num(t, "dt_max", cfg.time.dt_max);
    cfg.time.dt_fixed = detail::get_num(t, "dt_fixed", cfg.time.dt_fixed);
    cfg.time.cfl = detail::get_num(t, "cfl", cfg.time.cfl);
    cfg.time.advection_implicit =
        detail::get_bool(t, "advection_implicit", cfg.time.advection_implicit);
  }

  if (j.contains("ic")) {
    const Json& ic = j.at("ic");
    detail::check_keys(ic, "ic", {"kind", "modes", "amplitude", "seed"});
    cfg.ic.kind = detail::get_str(ic, "kind", cfg.ic.kind);
    if (cfg.ic.kind != "equilibrium" && cfg.ic.kind != "cosine" &&
        cfg.ic.kind != "random")
      throw ConfigError("ic.kind must be equilibrium, cosine, or random");
    if (ic.contains("modes")) {
      if (!ic.at("modes").is_array())
        throw ConfigError("ic.modes must be an array");
      cfg.ic.modes.clear();
      for (const auto& m : ic.at("modes")) {
        detail::check_keys(m, "ic.modes[]", {"k", "amp_u", "amp_v"});
        IcMode mode;
        mode.k = detail::get_int(m, "k", 1);
        mode.amp_u = detail::get_num(m, "amp_u", 0.0);
        mode.amp_v = detail::get_num(m, "amp_v", 0.0);
        if (mode.k < 1) throw ConfigError("ic mode index k must be >= 1");
        cfg.ic.modes.push_back(mode);
      }
    }
    cfg.ic.amplitude = detail::get_num(ic, "amplitude", cfg.ic.amplitude);
    if (ic.contains("seed")) {
      if (!ic.at("seed").is_number_integer() || ic.at("seed").get<long long>() < 0)
        throw ConfigError("'seed' must be a nonnegative integer");
      cfg.ic.seed = ic.at("seed").get<unsigned long>();
    }
  }

  if (j.contains("analyze")) {
    const Json& a = j.at("analyze");
    detail::check_keys(a, "analyze", {"k_max"});
    cfg.analyze.k_max = detail::get_int(a, "k_max", cfg.analyze.k_max);
  }

  if (j.contains("continue")) {
    const Json& c = j.at("continue");
    detail::check_keys(c, "continue", {"s_max", "ds", "k0", "tol"});
    cfg.cont.s_max = detail::get_num(c, "s_max", cfg.cont.s_max);
    cfg.cont.ds = detail::get_num(c, "ds", cfg.cont.ds);
    cfg.cont.k0 = detail::get_int(c, "k0", cfg.cont.k0);
    cfg.cont.tol = detail::get_num(c, "tol", cfg.cont.tol);
  }

  if (j.contains("shadow")) {
    const Json& s = j.at("shadow");
    detail::check_keys(s, "shadow", {"eps", "lambda", "n_min"});
    cfg.shadow.eps = detail::get_num_list(s, "eps");
    for (double e : cfg.shadow.eps)
      if (!(e > 0.0)) throw ConfigError("shadow.eps entries must be positive");
    cfg.shadow.lambda = detail::get_num(s, "lambda", cfg.shadow.lambda);
    cfg.shadow.n_min = detail::get_int(s, "n_min", cfg.shadow.n_min);
  }

  if (j.contains("sweep")) {
    const Json& s = j.at("sweep");
    detail::check_keys(s, "sweep", {"parameter", "values"});
    SweepConfig sw;
    sw.parameter = detail::get_str(s, "parameter", "");
    sw.values = detail::get_num_list(s, "values");
    bool known = false;
    for (const auto& name : sweepable_parameters()) known = known || name == sw.parameter;
    if (!known)
      throw ConfigError("sweep.parameter '" + sw.parameter + "' is not sweepable");
    if (sw.values.empty()) throw ConfigError("sweep.values must be nonempty");
    cfg.sweep = sw;
  }

  cfg.out = detail::get_str(j, "out", cfg.out);
  cfg.workers = detail::get_int(j, "workers", cfg.workers);
  if (cfg.workers < 0) throw ConfigError("'workers' must be nonnegative");
  cfg.check = detail::get_bool(j, "check", cfg.check);
  return cfg;
}

/// Serialize with every default materialized; parse(config_to_json(c))
/// reproduces c field for field.
inline Json config_to_json(const RunConfig& cfg) {
  Json j;
  if (cfg.workflow) j["workflow"] = workflow_name(*cfg.workflow);
  Json p;
  p["D1"] = cfg.params.D1;
  p["D2"] = cfg.params.D2;
  p["chi"] = cfg.params.chi;
  p["alpha1"] = cfg.params.alpha1;
  p["alpha2"] = cfg.params.alpha2;
  p["beta1"] = cfg.params.beta1;
  p["beta2"] = cfg.params.beta2;
  p["a1"] = cfg.params.a1;
  p["b1"] = cfg.params.b1;
  p["c1"] = cfg.params.c1;
  p["a2"] = cfg.params.a2;
  p["b2"] = cfg.params.b2;
  p["c2"] = cfg.params.c2;
  p["L"] = cfg.params.L;
  p["phi"] = sensitivity_to_json(cfg.params.phi);
  j["params"] = p;
  j["grid"] = Json{{"n", cfg.grid.n}};
  j["time"] = Json{{"T", cfg.time.T},
                   {"tol", cfg.time.tol},
                   {"stride", cfg.time.stride},
                   {"dt_max", cfg.time.dt_max},
                   {"dt_fixed", cfg.time.dt_fixed},
                   {"cfl", cfg.time.cfl},
                   {"advection_implicit", cfg.time.advection_implicit}};
  Json modes = Json::array();
  for (const auto& m : cfg.ic.modes)
    modes.push_back(Json{{"k", m.k}, {"amp_u", m.amp_u}, {"amp_v", m.amp_v}});
  j["ic"] = Json{{"kind", cfg.ic.kind},
                 {"modes", modes},
                 {"amplitude", cfg.ic.amplitude},
                 {"seed", cfg.ic.seed}};
  j["analyze"] = Json{{"k_max", cfg.analyze.k_max}};
  j["continue"] = Json{{"s_max", cfg.cont.s_max},
                       {"ds", cfg.cont.ds},
                       {"k0", cfg.cont.k0},
                       {"tol", cfg.cont.tol}};
  j["shadow"] = Json{{"eps", cfg.shadow.eps},
                     {"lambda", cfg.shadow.lambda},
                     {"n_min", cfg.shadow.n_min}};
  if (cfg.sweep)
    j["sweep"] = Json{{"parameter", cfg.sweep->parameter},
                      {"values", cfg.sweep->values}};
  j["out"] = cfg.out;
  j["workers"] = cfg.workers;
  j["check"] = cfg.check;
  return j;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

// --- Reports ----------------------------------------------------------------

/// Workflow result: the JSON written as report.json (machine-readable, with
/// an artifact manifest and check outcomes) plus a one-paragraph summary.
struct Report {
  Json data;
  std::string summary;
  bool checks_passed = true;
};

/// Numeric report entry tagged with the producing operation and the
/// tolerance that governed it (0 marks closed-form algebra).
inline Json tagged(double value, const std::string& op, double tol) {
  return Json{{"value", value}, {"op", op}, {"tol", tol}};
}

namespace detail {

struct CheckList {
  Json entries = Json::array();
  bool all_passed = true;

  void add(const std::string& name, bool pass, const std::string& note) {
    entries.push_back(Json{{"name", name}, {"pass", pass}, {"detail", note}});
    all_passed = all_passed && pass;
  }
};

inline std::string slug(double v) {
  std::string out;
  for (char c : fmt6(v)) {
    if (c == '.') out += 'p';
    else if (c == '-') out += 'm';
    else if (c == '+') continue;
    else out += c;
  }
  return out;
}

inline std::string join_path(const std::string& dir, const std::string& name) {
  return dir.empty() ? name : dir + "/" + name;
}

/// Initial state prescribed by the ic block (built around coexistence).
inline StateField initial_state(const RunConfig& cfg, const ScaledParams& p,
                                const Grid1D& g) {
  const auto eq = coexistence_equilibrium(p);
  if (!eq)
    throw SolveError("initial state needs a positive coexistence state");
  StateField s = constant_state(g, eq->u, eq->v);
  if (cfg.ic.kind == "cosine") {
    for (const auto& m : cfg.ic.modes) {
      for (int i = 0; i < g.n; ++i) {
        const double c = std::cos(m.k * pi * g.x(i) / g.L);
        s.u[i] += m.amp_u * c;
        s.v[i] += m.amp_v * c;
      }
    }
  } else if (cfg.ic.kind == "random") {
    std::mt19937 rng(static_cast<std::mt19937::result_type>(cfg.ic.seed));
    // Map raw 32-bit draws to [-amplitude, amplitude] directly so the
    // perturbation is identical on every platform.
    auto draw = [&]() {
      return cfg.ic.amplitude * (2.0 * (rng() * 2.3283064365386963e-10) - 1.0);
    };
    for (int i = 0; i < g.n; ++i) s.u[i] += draw();
    for (int i = 0; i < g.n; ++i) s.v[i] += draw();
  }
  for (int i = 0; i < g.n; ++i) {
    s.u[i] = std::max(s.u[i], 1e-12);
    s.v[i] = std::max(s.v[i], 1e-12);
  }
  return s;
}

}  // namespace detail

// --- Workflows ---------------------------------------------------------------

/// Linear analysis: regime, equilibria, mode table, critical mode, cubic
/// normal form. Writes report.json, modes.csv, thresholds.svg.
inline Report run_analyze(const RunConfig& cfg, const std::string& out_dir) {
  const ScaledParams p = nondimensionalize(cfg.params);
  ensure_dir(out_dir);

  Json data;
  data["workflow"] = "analyze";
  Json artifacts = Json::array();
  artifacts.push_back("report.json");

  const CompetitionRegime regime = classify_regime(p);
  const char* tag = regime.tag == CompetitionRegime::Tag::weak     ? "weak"
                    : regime.tag == CompetitionRegime::Tag::strong ? "strong"
                                                                   : "none";
  data["regime"] = Json{{"tag", tag},
                        {"ratio_c", regime.ratio_c},
                        {"ratio_growth", regime.ratio_growth},
                        {"ratio_b", regime.ratio_b},
                        {"degenerate", regime.degenerate}};

  Json eqs = Json::array();
  for (const auto& e : compute_equilibria(p)) {
    const char* kind = e.kind == Equilibrium::Kind::extinction   ? "extinction"
                       : e.kind == Equilibrium::Kind::u_only     ? "u_only"
                       : e.kind == Equilibrium::Kind::v_only     ? "v_only"
                                                                 : "coexistence";
    eqs.push_back(Json{{"kind", kind}, {"u", e.u}, {"v", e.v}});
  }
  data["equilibria"] = eqs;

  detail::CheckList checks;
  std::ostringstream sum;
  const auto co = coexistence_equilibrium(p);
  if (!co) {
    data["coexistence"] = nullptr;
    data["reason"] =
        "no positive coexistence state for these parameters; the mode table "
        "and normal form are undefined and were skipped";
    sum << "analyze: " << tag
        << " competition, no positive coexistence state; mode analysis skipped.";
  } else {
    data["coexistence"] = Json{{"u", tagged(co->u, "coexistence_equilibrium", 0.0)},
                               {"v", tagged(co->v, "coexistence_equilibrium", 0.0)}};

    const ModeSelection sel = find_critical_mode(p, cfg.analyze.k_max);
    std::vector<std::vector<double>> rows;
    std::vector<double> ks, chis;
    for (int k = 1; k <= sel.k_max; ++k) {
      const ModeAnalysis m = analyze_mode(p, k);
      rows.push_back({static_cast<double>(m.k), m.mu, m.T, m.D, m.chi_k, m.Q,
                      m.lambda_plus.real(), m.lambda_plus.imag(),
                      m.lambda_minus.real(), m.lambda_minus.imag()});
      ks.push_back(m.k);
      chis.push_back(m.chi_k);
    }
    write_csv(detail::join_path(out_dir, "modes.csv"),
              {"k", "mu", "T", "D", "chi_k", "Q", "re_lambda_plus",
               "im_lambda_plus", "re_lambda_minus", "im_lambda_minus"},
              rows);
    artifacts.push_back("modes.csv");

    std::vector<Series> series;
    series.push_back({"instability threshold chi_k", ks, chis, true, false});
    if (p.chi > 0.0) {
      series.push_back({"configured chi",
                        {ks.front(), ks.back()},
                        {p.chi, p.chi},
                        false,
                        true});
    }
    write_svg_chart(detail::join_path(out_dir, "thresholds.svg"),
                    "Mode instability thresholds", "mode index k", "chi_k", series);
    artifacts.push_back("thresholds.svg");

    const BifurcationReport wnl = weakly_nonlinear(p, sel.k0);
    const double md = mu_dot(p, sel.k0);
    data["selection"] = Json{{"k0", sel.k0},
                             {"chi_k0", tagged(sel.chi_k0, "find_critical_mode", 1e-12)},
                             {"simple", sel.simple},
                             {"tie_partner", sel.tie_partner},
                             {"k_max", sel.k_max}};
    data["normal_form"] =
        Json{{"K1", tagged(wnl.K1, "weakly_nonlinear", 0.0)},
             {"K2", tagged(wnl.K2, "weakly_nonlinear", 1e-10)},
             {"Q", tagged(wnl.Q, "weakly_nonlinear", 0.0)},
             {"detA", tagged(wnl.detA, "weakly_nonlinear", 0.0)},
             {"branch", wnl.branch_stable ? "supercritical (stable)"
                                          : "subcritical (unstable)"}};
    data["mu_dot"] = tagged(md, "mu_dot", 0.0);

    // Self-checks: threshold exactness, destabilizing crossing, simplicity.
    ScaledParams pc = p;
    pc.chi = sel.chi_k0;
    const ModeAnalysis crit = analyze_mode(pc, sel.k0);
    const double dscale =
        std::max(1.0, (p.D1 * crit.mu + p.b1 * co->u) * (p.D2 * crit.mu + p.c2 * co->v));
    checks.add("determinant vanishes at the threshold",
               std::abs(crit.D) <= 1e-12 * dscale,
               "|D_k0(chi_k0)| = " + fmt17(std::abs(crit.D)) + " vs " +
                   fmt17(1e-12 * dscale));
    checks.add("crossing eigenvalue is destabilizing", md < 0.0,
               "mu_dot = " + fmt17(md));
    checks.add("critical threshold is simple", sel.simple,
               sel.simple ? "no tie"
                          : "tie with mode " + std::to_string(sel.tie_partner));
    checks.add("critical mode inside the searched range",
               sel.k0 >= 1 && sel.k0 < sel.k_max,
               "k0 = " + std::to_string(sel.k0) + ", searched up to " +
                   std::to_string(sel.k_max));

    sum << "analyze: " << tag << " competition, coexistence (u, v) = ("
        << fmt6(co->u) << ", " << fmt6(co->v) << "); critical mode k0 = "
        << sel.k0 << " at chi_k0 = " << fmt6(sel.chi_k0) << "; K2 = "
        << fmt6(wnl.K2) << " ("
        << (wnl.branch_stable ? "supercritical" : "subcritical")
        << "), mu_dot = " << fmt6(md) << ".";
  }

  data["checks"] = checks.entries;
  data["artifacts"] = artifacts;
  data["summary"] = sum.str();
  data["config"] = config_to_json(cfg);
  write_json(detail::join_path(out_dir, "report.json"), data);
  return Report{data, sum.str(), checks.all_passed};
}

/// Time evolution: snapshots, diagnostics, space-time heat map of u.
inline Report run_simulate(const RunConfig& cfg, const std::string& out_dir) {
  const ScaledParams p = nondimensionalize(cfg.params);
  const Grid1D g(p.L, cfg.grid.n);
  ensure_dir(out_dir);

  SimOptions opts;
  opts.tol = cfg.time.tol;
  opts.stride = cfg.time.stride;
  opts.dt_max = cfg.time.dt_max;
  opts.dt_fixed = cfg.time.dt_fixed;
  opts.cfl = cfg.time.cfl;
  opts.advection_implicit = cfg.time.advection_implicit;

  const StateField init = detail::initial_state(cfg, p, g);
  const Trajectory tr = simulate(p, g, init, cfg.time.T, opts);

  Json data;
  data["workflow"] = "simulate";
  Json artifacts = Json::array();
  artifacts.push_back("report.json");

  Json times = Json::array();
  Json snap_files = Json::array();
  for (std::size_t s = 0; s < tr.snapshots.size(); ++s) {
    const StateField& f = tr.snapshots[s];
    std::vector<std::vector<double>> rows;
    rows.reserve(g.n);
    for (int i = 0; i < g.n; ++i)
      rows.push_back({g.x(i), f.u[i], f.v[i]});
    char name[32];
    std::snprintf(name, sizeof(name), "snap_%04zu.csv", s);
    write_csv(detail::join_path(out_dir, name), {"x", "u", "v"}, rows);
    artifacts.push_back(name);
    snap_files.push_back(name);
    times.push_back(f.t);
  }

  std::vector<std::vector<double>> diag_rows;
  for (const auto& d : tr.diagnostics)
    diag_rows.push_back({d.t, d.mass_u, d.mass_v, d.sup_u, d.sup_v, d.residual,
                         static_cast<double>(d.dominant_mode_u)});
  write_csv(detail::join_path(out_dir, "diagnostics.csv"),
            {"t", "mass_u", "mass_v", "sup_u", "sup_v", "residual",
             "dominant_mode_u"},
            diag_rows);
  artifacts.push_back("diagnostics.csv");

  if (tr.snapshots.size() >= 2) {
    std::vector<std::vector<double>> field;
    for (const auto& f : tr.snapshots) field.push_back(f.u);
    write_svg_heatmap(detail::join_path(out_dir, "heatmap.svg"),
                      "u(x, t) space-time field", "x", "t", field, 0.0, g.L,
                      tr.snapshots.front().t, tr.snapshots.back().t);
    artifacts.push_back("heatmap.svg");
  }

  const StateField& fin = tr.snapshots.back();
  const int mode = dominant_mode(g, fin.u);
  double min_u = fin.u[0], min_v = fin.v[0];
  for (int i = 0; i < g.n; ++i) {
    min_u = std::min(min_u, fin.u[i]);
    min_v = std::min(min_v, fin.v[i]);
  }

  data["grid"] = Json{{"n", g.n}, {"L", g.L}, {"dx", g.dx()}};
  data["times"] = times;
  data["snapshots"] = snap_files;
  data["steps"] = tr.steps;
  data["converged"] = tr.converged;
  data["final_residual"] = tagged(tr.final_residual, "simulate", cfg.time.tol);
  data["dominant_mode_u"] = mode;

  detail::CheckList checks;
  checks.add("final state is nonnegative", min_u >= 0.0 && min_v >= 0.0,
             "min u = " + fmt17(min_u) + ", min v = " + fmt17(min_v));
  checks.add("mass and sup bounds hold along the trajectory",
             mass_bounds_check(p, g, tr), "book-keeping over all diagnostics");
  if (tr.converged)
    checks.add("converged run meets the residual target",
               tr.final_residual <= cfg.time.tol,
               "residual " + fmt17(tr.final_residual) + " vs tol " +
                   fmt17(cfg.time.tol));

  std::ostringstream sum;
  sum << "simulate: T = " << fmt6(cfg.time.T) << ", steps = " << tr.steps
      << ", " << (tr.converged ? "converged to a steady state" : "ran to the horizon")
      << " (final residual " << fmt6(tr.final_residual)
      << "); dominant u-mode = " << mode << ".";

  data["checks"] = checks.entries;
  data["artifacts"] = artifacts;
  data["summary"] = sum.str();
  data["config"] = config_to_json(cfg);
  write_json(detail::join_path(out_dir, "report.json"), data);
  return Report{data, sum.str(), checks.all_passed};
}

/// Amplitude continuation of the bifurcating branch plus a quadratic fit.
inline Report run_continue(const RunConfig& cfg, const std::string& out_dir) {
  const ScaledParams p = nondimensionalize(cfg.params);
  const Grid1D g(p.L, cfg.grid.n);
  ensure_dir(out_dir);

  ContinueOptions opts;
  opts.ds = cfg.cont.ds;
  opts.k0 = cfg.cont.k0;
  opts.newton.tol = cfg.cont.tol;

  // Both branch directions, so the quadratic fit sees symmetric data and the
  // odd coefficients are not polluted by the window.
  const std::vector<BranchPoint> plus = continue_branch(p, g, cfg.cont.s_max, opts);
  const std::vector<BranchPoint> minus = continue_branch(p, g, -cfg.cont.s_max, opts);
  std::vector<BranchPoint> pts(minus.rbegin(), minus.rend());
  pts.insert(pts.end(), plus.begin(), plus.end());
  const BranchFit fit = fit_branch(pts);
  const ModeSelection sel = find_critical_mode(p, 0);
  const int k0 = cfg.cont.k0 > 0 ? cfg.cont.k0 : sel.k0;
  const double chi_k0 = chi_threshold(p, k0);
  const BifurcationReport wnl = weakly_nonlinear(p, k0);

  std::vector<std::vector<double>> rows;
  std::vector<double> chis, amps;
  double max_res = 0.0;
  for (const auto& b : pts) {
    rows.push_back({b.s, b.chi, b.amplitude, b.residual});
    chis.push_back(b.chi);
    amps.push_back(b.amplitude);
    max_res = std::max(max_res, b.residual);
  }
  write_csv(detail::join_path(out_dir, "branch.csv"),
            {"s", "chi", "amplitude", "residual"}, rows);

  write_svg_chart(detail::join_path(out_dir, "branch.svg"),
                  "Bifurcation diagram near the threshold", "chi",
                  "u-amplitude at k0",
                  {{"computed branch", chis, amps, true, false},
                   {"threshold chi_k0", {chi_k0}, {0.0}, true, false}});

  Json data;
  data["workflow"] = "continue";
  data["k0"] = k0;
  data["points"] = pts.size();
  data["max_residual"] = tagged(max_res, "continue_branch", cfg.cont.tol);
  data["fit"] = Json{{"beta0", tagged(fit.beta0, "fit_branch", 0.0)},
                     {"beta1", tagged(fit.beta1, "fit_branch", 0.0)},
                     {"beta2", tagged(fit.beta2, "fit_branch", 0.0)}};
  data["normal_form"] = Json{
      {"chi_k0", tagged(chi_k0, "chi_threshold", 1e-12)},
      {"K2", tagged(wnl.K2, "weakly_nonlinear", 1e-10)},
      {"beta0_rel_gap", std::abs(fit.beta0 - chi_k0) / std::max(1.0, std::abs(chi_k0))},
      {"beta2_rel_gap", std::abs(fit.beta2 - wnl.K2) / std::max(1.0, std::abs(wnl.K2))}};

  detail::CheckList checks;
  checks.add("corrector residuals stay at the Newton target",
             max_res <= 100.0 * cfg.cont.tol,
             "max residual " + fmt17(max_res) + " vs " + fmt17(100.0 * cfg.cont.tol));
  checks.add("fitted intercept matches the linear threshold",
             std::abs(fit.beta0 - chi_k0) <= 5e-3 * std::max(1.0, std::abs(chi_k0)),
             "beta0 = " + fmt17(fit.beta0) + ", chi_k0 = " + fmt17(chi_k0));
  checks.add("linear term is negligible against the quadratic",
             std::abs(fit.beta1) <= 1e-3 * std::abs(fit.beta2 * cfg.cont.s_max),
             "|beta1| = " + fmt17(std::abs(fit.beta1)) + " vs " +
                 fmt17(1e-3 * std::abs(fit.beta2 * cfg.cont.s_max)));
  checks.add("branch curvature sign matches the normal form",
             fit.beta2 * wnl.K2 > 0.0,
             "beta2 = " + fmt17(fit.beta2) + ", K2 = " + fmt17(wnl.K2));

  std::ostringstream sum;
  sum << "continue: traced " << pts.size() << " points of the k0 = " << k0
      << " branch to |s| = " << fmt6(cfg.cont.s_max) << "; chi(s) fit beta0 = "
      << fmt6(fit.beta0) << " (threshold " << fmt6(chi_k0) << "), beta2 = "
      << fmt6(fit.beta2) << " (normal form K2 = " << fmt6(wnl.K2) << ").";

  data["checks"] = checks.entries;
  data["artifacts"] = Json::array({"report.json", "branch.csv", "branch.svg"});
  data["summary"] = sum.str();
  data["config"] = config_to_json(cfg);
  write_json(detail::join_path(out_dir, "report.json"), data);
  return Report{data, sum.str(), checks.all_passed};
}

/// Singular limit: per-epsilon boundary-layer profiles and the constrained
/// constant, plus an overlay chart across epsilon.
inline Report run_shadow(const RunConfig& cfg, const std::string& out_dir) {
  const ScaledParams p = nondimensionalize(cfg.params);
  ShadowParams base = ShadowParams::from_scaled(p);
  ensure_dir(out_dir);

  std::vector<double> eps_list = cfg.shadow.eps;
  if (eps_list.empty()) eps_list.push_back(base.eps);

  Json data;
  data["workflow"] = "shadow";
  Json artifacts = Json::array();
  artifacts.push_back("report.json");
  Json records = Json::array();
  detail::CheckList checks;
  std::vector<Series> overlay;
  std::ostringstream sum;
  sum << "shadow: r = " << fmt6(base.r) << ", vstar = " << fmt6(base.vstar())
      << ";";

  for (double e : eps_list) {
    ShadowParams sp = base;
    sp.eps = e;
    const double lmax = shadow_lambda_max(sp);

    SpikeSolution sol;
    if (cfg.shadow.lambda > 0.0) {
      const ShadowProfile pr =
          solve_shadow_profile(sp, cfg.shadow.lambda, cfg.shadow.n_min);
      sol.lambda_eps = cfg.shadow.lambda;
      sol.x = pr.x;
      sol.v_profile.resize(pr.w.size());
      sol.u_profile.resize(pr.w.size());
      for (std::size_t i = 0; i < pr.w.size(); ++i) {
        sol.v_profile[i] = sp.vstar() - pr.s1 - pr.w[i];
        sol.u_profile[i] = sol.lambda_eps * std::exp(-sp.r * sol.v_profile[i]);
      }
      sol.profile_residual = pr.residual;
      sol.constraint_residual =
          std::abs(shadow_constraint(sp, sol.lambda_eps, sol.x, sol.v_profile));
    } else {
      sol = solve_lambda(sp);
    }

    const std::string tag = detail::slug(e);
    const std::string csv_name = "profile_eps_" + tag + ".csv";
    std::vector<std::vector<double>> rows;
    rows.reserve(sol.x.size());
    for (std::size_t i = 0; i < sol.x.size(); ++i)
      rows.push_back({sol.x[i], sol.v_profile[i], sol.u_profile[i]});
    write_csv(detail::join_path(out_dir, csv_name), {"x", "v_eps", "u_eps"}, rows);
    artifacts.push_back(csv_name);

    const GRootStructure rs = g_roots(sp, sol.lambda_eps);
    double v_min = sol.v_profile[0], v_mid = sol.v_profile[sol.v_profile.size() / 2];
    double u_max = sol.u_profile[0];
    for (std::size_t i = 0; i < sol.v_profile.size(); ++i) {
      v_min = std::min(v_min, sol.v_profile[i]);
      u_max = std::max(u_max, sol.u_profile[i]);
    }
    records.push_back(Json{
        {"eps", e},
        {"lambda_eps", tagged(sol.lambda_eps,
                              cfg.shadow.lambda > 0.0 ? "configured" : "solve_lambda",
                              1e-10)},
        {"lambda_max", tagged(lmax, "shadow_lambda_max", 0.0)},
        {"constraint_residual",
         tagged(sol.constraint_residual, "shadow_constraint", 1e-10)},
        {"profile_residual",
         tagged(sol.profile_residual, "solve_shadow_profile", 1e-10)},
        {"roots", Json{{"s1", rs.s1},
                       {"s2", rs.s2},
                       {"s3", rs.s3},
                       {"s4", rs.s4},
                       {"sstar", rs.sstar}}},
        {"v_min", v_min},
        {"v_mid", v_mid},
        {"u_max", u_max},
        {"profile_csv", csv_name}});

    const std::string label = "v (eps = " + fmt6(e) + ")";
    overlay.push_back({label, sol.x, sol.v_profile, false, false});

    checks.add("lambda inside the admissible interval (eps = " + fmt6(e) + ")",
               sol.lambda_eps > 0.0 && sol.lambda_eps < lmax,
               "lambda = " + fmt17(sol.lambda_eps) + ", lambda_max = " + fmt17(lmax));
    checks.add("growth constraint annihilated (eps = " + fmt6(e) + ")",
               sol.constraint_residual <= 1e-9,
               "|constraint| = " + fmt17(sol.constraint_residual));
    checks.add("layer equation residual small (eps = " + fmt6(e) + ")",
               sol.profile_residual <= 1e-9,
               "sup residual = " + fmt17(sol.profile_residual));
    checks.add("u positive with its maximum at the boundary (eps = " + fmt6(e) + ")",
               sol.u_profile[0] >= u_max * (1.0 - 1e-12) && sol.u_profile[0] > 0.0,
               "u(0) = " + fmt17(sol.u_profile[0]));

    sum << " eps = " << fmt6(e) << ": lambda = " << fmt6(sol.lambda_eps)
        << " (max " << fmt6(lmax) << "), v dips to " << fmt6(v_min) << ";";
  }

  write_svg_chart(detail::join_path(out_dir, "profiles.svg"),
                  "Boundary-layer profiles across epsilon", "x", "v", overlay);
  artifacts.push_back("profiles.svg");

  data["records"] = records;
  data["checks"] = checks.entries;
  data["artifacts"] = artifacts;
  data["summary"] = sum.str();
  data["config"] = config_to_json(cfg);
  write_json(detail::join_path(out_dir, "report.json"), data);
  return Report{data, sum.str(), checks.all_passed};
}

// --- Dispatch and sweeps -----------------------------------------------------

namespace detail {

inline Report run_single(const RunConfig& cfg, const std::string& out_dir) {
  if (!cfg.workflow) throw ConfigError("no workflow selected");
  switch (*cfg.workflow) {
    case Workflow::analyze: return run_analyze(cfg, out_dir);
    case Workflow::simulate: return run_simulate(cfg, out_dir);
    case Workflow::continuation: return run_continue(cfg, out_dir);
    case Workflow::shadow: return run_shadow(cfg, out_dir);
  }
  throw ConfigError("no workflow selected");
}

inline void apply_sweep_value(RunConfig& cfg, const std::string& name, double v) {
  if (name == "D1") cfg.params.D1 = v;
  else if (name == "D2") cfg.params.D2 = v;
  else if (name == "chi") cfg.params.chi = v;
  else if (name == "a1") cfg.params.a1 = v;
  else if (name == "b1") cfg.params.b1 = v;
  else if (name == "c1") cfg.params.c1 = v;
  else if (name == "a2") cfg.params.a2 = v;
  else if (name == "b2") cfg.params.b2 = v;
  else if (name == "c2") cfg.params.c2 = v;
  else if (name == "L") cfg.params.L = v;
  else if (name == "T") cfg.time.T = v;
  else if (name == "n") {
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9 || r < 1.0)
      throw ConfigError("sweep over n needs positive integer values");
    cfg.grid.n = static_cast<int>(r);
  } else if (name == "eps") {
    cfg.shadow.eps = {v};
  } else {
    throw ConfigError("sweep.parameter '" + name + "' is not sweepable");
  }
}

}  // namespace detail

/// Execute the configured run under cfg.out. A sweep fans items out to
/// per-value subdirectories (concurrently, up to the worker limit) and then
/// writes a combined report; item artifacts never overlap, so the results are
/// independent of the scheduling order.
inline Report run(const RunConfig& cfg) {
  if (!cfg.workflow) throw ConfigError("no workflow selected");
  if (!cfg.sweep) return detail::run_single(cfg, cfg.out);

  const SweepConfig& sw = *cfg.sweep;
  ensure_dir(cfg.out);
  const std::size_t count = sw.values.size();
  std::vector<Json> item_data(count);
  std::vector<std::string> item_error(count);
  std::vector<std::string> item_dir(count);
  std::vector<bool> item_checks(count, true);

  unsigned workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));

  std::atomic<std::size_t> cursor{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= count) return;
      RunConfig item = cfg;
      item.sweep.reset();
      detail::apply_sweep_value(item, sw.parameter, sw.values[i]);
      const std::string dir = sw.parameter + "_" + detail::slug(sw.values[i]);
      item_dir[i] = dir;
      item.out = detail::join_path(cfg.out, dir);
      try {
        const Report rep = detail::run_single(item, item.out);
        item_data[i] = rep.data;
        item_checks[i] = rep.checks_passed;
      } catch (const std::exception& e) {
        item_error[i] = e.what();
        item_checks[i] = false;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  Json data;
  data["workflow"] = workflow_name(*cfg.workflow);
  data["sweep"] = Json{{"parameter", sw.parameter}, {"values", sw.values}};
  Json items = Json::array();
  Json artifacts = Json::array();
  artifacts.push_back("report.json");
  bool checks_passed = true;
  std::size_t failures = 0;
  std::ostringstream sum;
  sum << "sweep over " << sw.parameter << " (" << count << " items):";
  for (std::size_t i = 0; i < count; ++i) {
    Json item;
    item["value"] = sw.values[i];
    item["dir"] = item_dir[i];
    if (!item_error[i].empty()) {
      item["status"] = "error";
      item["error"] = item_error[i];
      ++failures;
      sum << " " << sw.parameter << " = " << fmt6(sw.values[i]) << ": FAILED;";
    } else {
      item["status"] = "ok";
      item["report"] = detail::join_path(item_dir[i], "report.json");
      artifacts.push_back(item["report"]);
      // Per-workflow headline numbers for the combined table.
      const Json& d = item_data[i];
      if (d.contains("selection")) {
        item["k0"] = d["selection"]["k0"];
        item["chi_k0"] = d["selection"]["chi_k0"]["value"];
        sum << " " << sw.parameter << " = " << fmt6(sw.values[i]) << ": k0 = "
            << d["selection"]["k0"].get<int>() << ";";
      } else if (d.contains("final_residual")) {
        item["converged"] = d["converged"];
        item["dominant_mode_u"] = d["dominant_mode_u"];
        sum << " " << sw.parameter << " = " << fmt6(sw.values[i]) << ": mode "
            << d["dominant_mode_u"].get<int>() << ";";
      } else if (d.contains("fit")) {
        item["beta2"] = d["fit"]["beta2"]["value"];
        sum << " " << sw.parameter << " = " << fmt6(sw.values[i]) << ": beta2 = "
            << fmt6(d["fit"]["beta2"]["value"].get<double>()) << ";";
      } else if (d.contains("records") && !d["records"].empty()) {
        item["lambda_eps"] = d["records"][0]["lambda_eps"]["value"];
        sum << " " << sw.parameter << " = " << fmt6(sw.values[i]) << ": lambda = "
            << fmt6(d["records"][0]["lambda_eps"]["value"].get<double>()) << ";";
      }
    }
    checks_passed = checks_passed && item_checks[i];
    items.push_back(item);
  }
  data["items"] = items;
  data["failures"] = failures;
  data["artifacts"] = artifacts;
  std::string s = sum.str();
  data["summary"] = s;
  data["config"] = config_to_json(cfg);
  write_json(detail::join_path(cfg.out, "report.json"), data);
  if (failures > 0)
    throw SolveError(std::to_string(failures) + " of " + std::to_string(count) +
                     " sweep items failed; see " +
                     detail::join_path(cfg.out, "report.json"));
  return Report{data, s, checks_passed};
}

}  // namespace bdtaxis
