#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "diagnostics.hpp"
#include "json.hpp"
#include "regime.hpp"

namespace rnsm {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { alpha_sweep, inviscid_limit, absorbing_ball, determining_modes, twin };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::alpha_sweep: return "alpha-sweep";
    case ExperimentKind::inviscid_limit: return "inviscid-limit";
    case ExperimentKind::absorbing_ball: return "absorbing-ball";
    case ExperimentKind::determining_modes: return "determining-modes";
    case ExperimentKind::twin: return "twin";
  }
  return "?";
}

inline ExperimentKind experiment_kind_from(const std::string& s) {
  for (auto k : {ExperimentKind::alpha_sweep, ExperimentKind::inviscid_limit,
                 ExperimentKind::absorbing_ball, ExperimentKind::determining_modes,
                 ExperimentKind::twin})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

// The swept quantity of each kind and the direction its list must run in.
inline std::string sweep_param_of(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::alpha_sweep: return "alpha";
    case ExperimentKind::inviscid_limit: return "nu";
    case ExperimentKind::absorbing_ball: return "amplitude";
    case ExperimentKind::determining_modes: return "m";
    case ExperimentKind::twin: return "delta0";
  }
  return "";
}

struct InitialSpec {
  double slope = -2;
  double amplitude = 1;
  double k_max = 0;  // band limit in lattice units, 0 = none
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::alpha_sweep;
  std::string model = "NSE";
  double alpha = 0.1, nu = 0.01, eta = 0.01;
  double theta = 1, theta1 = 0, theta2 = 0;  // theta1 only for custom models
  Form form = Form::B1;                      // custom models only
  int dims = 2;
  int resolution = 64;
  double length = 2 * M_PI;
  double dt = 1e-3;
  double t_end = 1;
  std::uint64_t seed = 1;
  int sample_every = 10;
  ForcingSpec forcing;
  InitialSpec initial;
  std::vector<double> sweep;
  double tolerance = 1e-6;
  double perturbation = 0;     // determining-modes: amplitude of the decaying part of g - f
  bool same_initial = false;   // determining-modes: start both runs from the same data
  int jobs = 1;
  std::string output;
};

namespace detail {

template <class T>
T take(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline void only_keys(const nlohmann::json& j, std::initializer_list<const char*> keys,
                      const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

inline bool strictly_monotone(const std::vector<double>& v) {
  if (v.size() < 2) return true;
  bool up = true, down = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    up = up && v[i] > v[i - 1];
    down = down && v[i] < v[i - 1];
  }
  return up || down;
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
  if (c.dims != 2 && c.dims != 3) throw ConfigError("grid.dims must be 2 or 3");
  if (c.resolution < 8 || (c.resolution & (c.resolution - 1)) != 0)
    throw ConfigError("grid.resolution must be a power of two >= 8");
  if (!(c.length > 0)) throw ConfigError("grid.length must be positive");
  if (!(c.dt > 0)) throw ConfigError("dt must be positive");
  if (!(c.t_end > 0)) throw ConfigError("t_end must be positive");
  const double ratio = c.t_end / c.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio))
    throw ConfigError("dt must divide t_end");
  if (c.sample_every < 1) throw ConfigError("sample_every must be >= 1");
  if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (!(c.tolerance > 0)) throw ConfigError("tolerance must be positive");
  if (c.sweep.empty()) throw ConfigError("sweep.values must not be empty");
  if (!detail::strictly_monotone(c.sweep)) throw ConfigError("sweep.values must be strictly monotone");
  for (double v : c.sweep)
    if (!std::isfinite(v) || v < 0) throw ConfigError("sweep values must be finite and >= 0");
  if (c.forcing.k_lo > c.forcing.k_hi) throw ConfigError("forcing band is empty");
  if (c.kind == ExperimentKind::alpha_sweep &&
      !std::is_sorted(c.sweep.rbegin(), c.sweep.rend()))
    throw ConfigError("alpha-sweep values must decrease toward 0");
  if (c.kind == ExperimentKind::inviscid_limit) {
    if (!std::is_sorted(c.sweep.rbegin(), c.sweep.rend()))
      throw ConfigError("inviscid-limit values must decrease toward 0");
    const auto key = canonical_model_name(c.model);
    if (key != "sbm" && key != "leray-alpha")
      throw ConfigError("inviscid reference runs are only supported for SBM and Leray-alpha; " +
                        c.model +
                        " has no vanishing-viscosity convergence result, since its smoothing "
                        "does not act on the advecting velocity");
  }
}

// Reads the schema without requiring a kind or validating; single runs use
// the same file format with the experiment fields left out.
inline ExperimentConfig config_fields_from_json(const nlohmann::json& j) {
  using detail::take;
  detail::only_keys(j, {"kind", "model", "params", "grid", "dt", "t_end", "seed", "sample_every",
                        "forcing", "initial", "sweep", "tolerance", "perturbation",
                        "same_initial", "jobs", "output"},
                    "config");
  ExperimentConfig c;
  if (j.contains("kind")) c.kind = experiment_kind_from(take<std::string>(j, "kind", ""));
  c.model = take<std::string>(j, "model", c.model);
  if (j.contains("params")) {
    const auto& p = j["params"];
    detail::only_keys(p, {"alpha", "nu", "eta", "theta", "theta1", "theta2", "form"}, "params");
    c.alpha = take(p, "alpha", c.alpha);
    c.nu = take(p, "nu", c.nu);
    c.eta = take(p, "eta", c.eta);
    c.theta = take(p, "theta", c.theta);
    c.theta1 = take(p, "theta1", c.theta1);
    c.theta2 = take(p, "theta2", c.theta2);
    if (p.contains("form")) {
      try {
        c.form = form_from(take<std::string>(p, "form", ""));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    detail::only_keys(g, {"dims", "resolution", "length"}, "grid");
    c.dims = take(g, "dims", c.dims);
    c.resolution = take(g, "resolution", c.resolution);
    c.length = take(g, "length", c.length);
  }
  c.dt = take(j, "dt", c.dt);
  c.t_end = take(j, "t_end", c.t_end);
  c.seed = take(j, "seed", c.seed);
  c.sample_every = take(j, "sample_every", c.sample_every);
  c.forcing.seed = c.seed + 1000;
  if (j.contains("forcing")) {
    const auto& f = j["forcing"];
    detail::only_keys(f, {"mode", "k_lo", "k_hi", "amplitude", "secondary_amplitude", "decay_rate", "seed"},
                      "forcing");
    try {
      c.forcing.mode = forcing_mode_from(take<std::string>(f, "mode", "zero"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    c.forcing.k_lo = take(f, "k_lo", c.forcing.k_lo);
    c.forcing.k_hi = take(f, "k_hi", c.forcing.k_hi);
    c.forcing.amplitude = take(f, "amplitude", c.forcing.amplitude);
    c.forcing.secondary_amplitude = take(f, "secondary_amplitude", c.forcing.secondary_amplitude);
    c.forcing.decay_rate = take(f, "decay_rate", c.forcing.decay_rate);
    c.forcing.seed = take(f, "seed", c.forcing.seed);
  }
  if (j.contains("initial")) {
    const auto& i = j["initial"];
    detail::only_keys(i, {"slope", "amplitude", "k_max"}, "initial");
    c.initial.slope = take(i, "slope", c.initial.slope);
    c.initial.amplitude = take(i, "amplitude", c.initial.amplitude);
    c.initial.k_max = take(i, "k_max", c.initial.k_max);
  }
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    detail::only_keys(s, {"param", "values"}, "sweep");
    const auto param = take<std::string>(s, "param", sweep_param_of(c.kind));
    if (param != sweep_param_of(c.kind))
      throw ConfigError(to_string(c.kind) + " sweeps '" + sweep_param_of(c.kind) + "', not '" +
                        param + "'");
    c.sweep = take<std::vector<double>>(s, "values", {});
  }
  c.tolerance = take(j, "tolerance", c.tolerance);
  c.perturbation = take(j, "perturbation", c.perturbation);
  c.same_initial = take(j, "same_initial", c.same_initial);
  c.jobs = take(j, "jobs", c.jobs);
  c.output = take<std::string>(j, "output", c.output);
  return c;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("config needs a 'kind'");
  auto c = config_fields_from_json(j);
  validate(c);
  return c;
}

inline nlohmann::json read_config_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path);
  try {
    return nlohmann::json::parse(is, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  return config_from_json(read_config_json(path));
}

// The effective configuration, in the same schema it is read from. `jobs`
// and `output` are left out so the echo is a pure function of the run.
inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["kind"] = to_string(c.kind);
  j["model"] = c.model;
  j["params"] = {{"alpha", c.alpha}, {"nu", c.nu},         {"eta", c.eta},
                 {"theta", c.theta}, {"theta1", c.theta1}, {"theta2", c.theta2},
                 {"form", to_string(c.form)}};
  j["grid"] = {{"dims", c.dims}, {"resolution", c.resolution}, {"length", c.length}};
  j["dt"] = c.dt;
  j["t_end"] = c.t_end;
  j["seed"] = c.seed;
  j["sample_every"] = c.sample_every;
  j["forcing"] = {{"mode", to_string(c.forcing.mode)},
                  {"k_lo", c.forcing.k_lo},
                  {"k_hi", c.forcing.k_hi},
                  {"amplitude", c.forcing.amplitude},
                  {"secondary_amplitude", c.forcing.secondary_amplitude},
                  {"decay_rate", c.forcing.decay_rate},
                  {"seed", c.forcing.seed}};
  j["initial"] = {{"slope", c.initial.slope},
                  {"amplitude", c.initial.amplitude},
                  {"k_max", c.initial.k_max}};
  j["sweep"] = {{"param", sweep_param_of(c.kind)}, {"values", c.sweep}};
  j["tolerance"] = c.tolerance;
  j["perturbation"] = c.perturbation;
  j["same_initial"] = c.same_initial;
  return j;
}

inline ModelParams model_of(const ExperimentConfig& c) {
  try {
    if (canonical_model_name(c.model) == "custom")
      return custom_model(c.theta, c.theta1, c.theta2, c.form, c.alpha, c.nu, c.dims, c.eta);
    PresetOptions o;
    o.alpha = c.alpha;
    o.nu = c.nu;
    o.eta = c.eta;
    o.n_dim = c.dims;
    o.theta = c.theta;
    o.theta2 = c.theta2;
    return preset(c.model, o);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

inline GridPtr grid_of(const ExperimentConfig& c) {
  return make_grid(c.dims, c.resolution, c.length);
}

inline State initial_state(const ExperimentConfig& c, const GridPtr& g, bool coupled,
                           std::uint64_t seed) {
  std::optional<Band> band;
  if (c.initial.k_max > 0) band = Band{0, c.initial.k_max * g->k0()};
  State s{random_divfree_field(g, seed, c.initial.slope, c.initial.amplitude, band)};
  if (coupled) {
    s.push_back(random_divfree_field(g, seed + 7, c.initial.slope, c.initial.amplitude, band));
    s[1].set_kind(FieldKind::magnetic);
  }
  return s;
}

// Runs fn(0..count-1) on up to `jobs` threads. Each index writes only its
// own result slot; the first exception is rethrown after all threads join.
inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t nthreads = std::min<std::size_t>(std::max(1, jobs), count);
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < nthreads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct ExperimentCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::alpha_sweep;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> notes;
  std::vector<ExperimentCheck> checks;
  nlohmann::json summary = nlohmann::json::object();
  bool blew_up = false;
  std::string blowup_detail;
  // Per-member time series written next to the table.
  std::vector<std::pair<std::string, TrajectoryRecord>> series;

  bool passed() const {
    return !blew_up && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }

  void check(std::string name, bool ok, std::string detail = {}) {
    checks.push_back({std::move(name), ok, std::move(detail)});
  }

  std::string format() const {
    std::ostringstream os;
    os << to_string(kind) << '\n';
    for (const auto& n : notes) os << "  " << n << '\n';
    std::vector<std::size_t> w;
    for (const auto& c : columns) w.push_back(std::max<std::size_t>(c.size(), 13));
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "  " : "") << std::setw(w[i]) << columns[i];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i)
        os << (i ? "  " : "") << std::setw(w[i]) << std::setprecision(6) << r[i];
      os << '\n';
    }
    if (blew_up) os << "BLOW-UP: " << blowup_detail << '\n';
    for (const auto& c : checks)
      os << (c.passed ? "[ok]   " : "[FAIL] ") << c.name << (c.detail.empty() ? "" : ": " + c.detail)
         << '\n';
    return os.str();
  }
};

inline void write_table_csv(const std::string& path, const std::vector<std::string>& cols,
                            const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n' << std::setprecision(17);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
}

// table.csv, summary.json, manifest.json and one CSV per member series.
inline void write_outputs(const std::string& dir, const ExperimentConfig& c, const ExperimentResult& r) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_table_csv((fs::path(dir) / "table.csv").string(), r.columns, r.rows);
  nlohmann::json s = r.summary;
  s["passed"] = r.passed();
  s["blew_up"] = r.blew_up;
  for (const auto& ch : r.checks) s["checks"].push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
  s["notes"] = r.notes;
  std::ofstream((fs::path(dir) / "summary.json").string()) << s.dump(2) << '\n';
  nlohmann::json m;
  m["config"] = to_json(c);
  m["files"] = nlohmann::json::array({"table.csv", "summary.json"});
  for (const auto& [name, rec] : r.series) {
    rec.write_csv((fs::path(dir) / (name + ".csv")).string());
    m["files"].push_back(name + ".csv");
  }
  std::ofstream((fs::path(dir) / "manifest.json").string()) << m.dump(2) << '\n';
}

inline std::string member_name(const std::string& param, double v) {
  std::ostringstream os;
  os << param << '=' << std::setprecision(10) << v;
  return os.str();
}

inline double l2_distance(const State& a, const State& b) {
  State d = a;
  axpy(d, -1.0, b);
  return std::sqrt(std::max(0.0, inner(d, d)));
}

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= x.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

namespace detail {

struct SampledRun {
  Trajectory traj;
  std::vector<State> states;
};

inline SampledRun sampled_run(const Solver& s, const State& u0, const ExperimentConfig& c,
                              std::vector<double> orders = {}) {
  SampledRun r;
  IntegrateOptions opt;
  opt.sample_every = c.sample_every;
  opt.sobolev_orders = std::move(orders);
  opt.observers.push_back([&](double, const State& u) { r.states.push_back(u); });
  r.traj = s.integrate(u0, 0, c.t_end, c.dt, opt);
  return r;
}

// max_k |m(k) - 1| over the retained lattice.
inline double symbol_deviation(const MultiplierSpec& m, const Grid& g) {
  double d = 0;
  for (std::size_t i = 0; i < g.spectral_size(); ++i)
    if (g.retained(i)) d = std::max(d, std::abs(m(g.k2(i)) - 1));
  return d;
}

inline double symbol_inverse_sup(const MultiplierSpec& m, const Grid& g) {
  double d = 0;
  for (std::size_t i = 0; i < g.spectral_size(); ++i)
    if (g.retained(i)) d = std::max(d, 1 / m(g.k2(i)));
  return d;
}

// Deviation sweep shared by the alpha and viscosity limits: member 0 is the
// reference, the rest follow `values`.
inline void deviation_sweep(const ExperimentConfig& c, const std::vector<ModelParams>& members,
                            const ModelParams& reference, const std::string& param,
                            ExperimentResult& res) {
  const auto g = grid_of(c);
  const State u0 = initial_state(c, g, reference.coupled(), c.seed);
  std::vector<SampledRun> runs(members.size() + 1);
  parallel_for(runs.size(), c.jobs, [&](std::size_t i) {
    const ModelParams& p = i == 0 ? reference : members[i - 1];
    runs[i] = sampled_run(Solver(p, g, c.forcing), u0, c);
  });
  res.series.emplace_back("reference", runs[0].traj.record);
  if (runs[0].traj.record.blew_up) {
    res.blew_up = true;
    res.blowup_detail = "reference run blew up at t = " + std::to_string(runs[0].traj.record.blowup_time);
    return;
  }
  // Second measure: the filtered fields Nu, the velocity the smoothed models
  // are usually compared through.
  res.columns = {param, "deviation", "filtered_deviation"};
  std::vector<double> xs, ds, fs;
  for (std::size_t i = 0; i < c.sweep.size(); ++i) {
    const auto& run = runs[i + 1];
    res.series.emplace_back(member_name(param, c.sweep[i]), run.traj.record);
    if (run.traj.record.blew_up) {
      res.blew_up = true;
      res.blowup_detail = member_name(param, c.sweep[i]) + " blew up at t = " +
                          std::to_string(run.traj.record.blowup_time);
      return;
    }
    const auto& n_spec = members[i].selector.n_spec;
    double d = 0, fd = 0;
    for (std::size_t k = 0; k < run.states.size(); ++k) {
      d = std::max(d, l2_distance(run.states[k], runs[0].states[k]));
      fd = std::max(fd, l2_distance(apply_multiplier(n_spec, run.states[k]),
                                    apply_multiplier(reference.selector.n_spec, runs[0].states[k])));
    }
    res.rows.push_back({c.sweep[i], d, fd});
    if (c.sweep[i] > 0) {
      xs.push_back(c.sweep[i]);
      ds.push_back(d);
      fs.push_back(fd);
    }
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < res.rows.size(); ++i) decreasing = decreasing && res.rows[i][1] < res.rows[i - 1][1];
  res.check("deviation strictly decreasing along the sweep", decreasing);
  for (const auto& r : res.rows)
    if (r[0] == 0) res.check("zero " + param + " reproduces the reference", r[1] == 0);
  if (xs.size() >= 2 && std::all_of(ds.begin(), ds.end(), [](double d) { return d > 0; })) {
    const double slope = loglog_slope(xs, ds);
    res.summary["loglog_slope"] = slope;
    res.notes.push_back("fitted log-log slope of deviation vs " + param + ": " + std::to_string(slope));
  }
  if (xs.size() >= 2 && std::all_of(fs.begin(), fs.end(), [](double d) { return d > 0; })) {
    const double slope = loglog_slope(xs, fs);
    res.summary["filtered_loglog_slope"] = slope;
    res.notes.push_back("fitted log-log slope of filtered deviation vs " + param + ": " +
                        std::to_string(slope));
  }
}

}  // namespace detail

// NS-alpha style family against its alpha = 0 member on shared grid, dt and data.
inline ExperimentResult run_alpha_sweep(const ExperimentConfig& c) {
  ExperimentResult res;
  res.kind = ExperimentKind::alpha_sweep;
  const auto g = grid_of(c);
  ExperimentConfig rc = c;
  rc.alpha = 0;
  const ModelParams reference = model_of(rc);
  std::vector<ModelParams> members;
  double prev_dev = INFINITY;
  bool filters_converge = true;
  for (double a : c.sweep) {
    ExperimentConfig mc = c;
    mc.alpha = a;
    members.push_back(model_of(mc));
    const auto& p = members.back();
    const double dm = detail::symbol_deviation(p.selector.m_spec, *g);
    const double dn = detail::symbol_deviation(p.selector.n_spec, *g);
    const double inv = detail::symbol_inverse_sup(p.selector.n_spec, *g);
    const double dev = std::max(dm, dn);
    filters_converge = filters_converge && (dev < prev_dev || dev == 0);
    prev_dev = dev;
    std::ostringstream os;
    os << "alpha = " << a << ": max|m-1| = " << dm << ", max|n-1| = " << dn
       << ", sup 1/n = " << inv;
    res.notes.push_back(os.str());
  }
  if (members.empty() || std::all_of(members.begin(), members.end(), [](const ModelParams& p) {
        return p.selector.m_spec.is_identity() && p.selector.n_spec.is_identity();
      }))
    throw ConfigError("alpha-sweep needs a model whose filters depend on alpha");
  res.check("filter symbols approach the identity as alpha decreases", filters_converge);
  detail::deviation_sweep(c, members, reference, "alpha", res);
  if (res.summary.contains("loglog_slope")) {
    const double s = res.summary["loglog_slope"];
    res.check("log-log slope near the O(alpha^2) symbol expansion", s >= 1.6 && s <= 2.4,
              "slope " + std::to_string(s) + ", expected [1.6, 2.4]");
  }
  return res;
}

inline ExperimentResult run_inviscid_limit(const ExperimentConfig& c) {
  validate(c);
  ExperimentResult res;
  res.kind = ExperimentKind::inviscid_limit;
  ExperimentConfig rc = c;
  rc.nu = 0;
  const ModelParams reference = model_of(rc);
  std::vector<ModelParams> members;
  for (double nu : c.sweep) {
    ExperimentConfig mc = c;
    mc.nu = nu;
    members.push_back(model_of(mc));
  }
  res.notes.push_back("reference: " + reference.label + " with nu = 0");
  detail::deviation_sweep(c, members, reference, "nu", res);
  return res;
}

// Decay into the absorbing ball from initial data of several sizes.
inline ExperimentResult run_absorbing_ball(const ExperimentConfig& c) {
  ExperimentResult res;
  res.kind = ExperimentKind::absorbing_ball;
  const auto g = grid_of(c);
  const ModelParams p = model_of(c);
  const double order = 0.0 - p.theta2;
  const std::string col = norm_column(order);
  const auto cc = coercivity_constants(p.a_spec, p.selector.n_spec, *g, p.theta, p.theta2);
  const double k = cc.decay_rate;
  res.notes.push_back("slowest linear decay rate on the lattice k = " + std::to_string(k));
  res.summary["k"] = k;

  struct Member {
    Trajectory traj;
    double initial = 0;
  };
  std::vector<Member> runs(c.sweep.size());
  const Solver solver(p, g, c.forcing);
  parallel_for(runs.size(), c.jobs, [&](std::size_t i) {
    ExperimentConfig mc = c;
    mc.initial.amplitude = c.sweep[i];
    const State u0 = initial_state(mc, g, p.coupled(), c.seed);
    runs[i].initial = sobolev_norm_sq(solver.admit(u0)[0], order);
    IntegrateOptions opt;
    opt.sample_every = c.sample_every;
    opt.sobolev_orders = {order};
    runs[i].traj = solver.integrate(u0, 0, c.t_end, c.dt, opt);
  });

  const bool forced = c.forcing.mode != ForcingMode::zero && c.forcing.amplitude != 0;
  res.columns = {"amplitude", "initial", "plateau", "decay_rate"};
  std::vector<double> plateaus;
  bool initial_exact = true;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& rec = runs[i].traj.record;
    res.series.emplace_back(member_name("amplitude", c.sweep[i]), rec);
    if (rec.blew_up) {
      res.blew_up = true;
      res.blowup_detail = member_name("amplitude", c.sweep[i]) + " blew up";
      return res;
    }
    const auto v = rec.series(col);
    initial_exact = initial_exact && v.front() == runs[i].initial;
    const double plateau = trailing_average(v).value;
    // Transient rate: slope of log|v - plateau| over the first quarter of
    // the record (the whole trailing half when unforced).
    std::vector<double> ts, ls;
    const std::size_t lo = forced ? 0 : v.size() / 2, hi = forced ? std::max<std::size_t>(v.size() / 4, 2) : v.size();
    for (std::size_t s = lo; s < hi; ++s) {
      const double e = std::abs(v[s] - (forced ? plateau : 0.0));
      if (e > 0 && std::isfinite(e)) {
        ts.push_back(rec.times[s]);
        ls.push_back(std::log(e));
      }
    }
    double rate = NAN;
    if (ts.size() >= 2) {
      double mt = 0, ml = 0;
      for (std::size_t s = 0; s < ts.size(); ++s) {
        mt += ts[s];
        ml += ls[s];
      }
      mt /= ts.size();
      ml /= ts.size();
      double sxy = 0, sxx = 0;
      for (std::size_t s = 0; s < ts.size(); ++s) {
        sxy += (ts[s] - mt) * (ls[s] - ml);
        sxx += (ts[s] - mt) * (ts[s] - mt);
      }
      rate = -sxy / sxx;
    }
    res.rows.push_back({c.sweep[i], v.front(), plateau, rate});
    plateaus.push_back(plateau);
    if (!forced)
      res.check("unforced decay rate >= 2k (5% tolerance) at amplitude " + std::to_string(c.sweep[i]),
                rate >= 0.95 * 2 * k, "rate " + std::to_string(rate) + " vs 2k = " + std::to_string(2 * k));
  }
  res.check("t = 0 sample equals the initial norm", initial_exact);
  if (forced) {
    const double lo = *std::min_element(plateaus.begin(), plateaus.end());
    const double hi = *std::max_element(plateaus.begin(), plateaus.end());
    res.summary["plateau_spread"] = hi > 0 ? (hi - lo) / hi : 0.0;
    res.check("plateau independent of the initial amplitude within 10%", hi > 0 && (hi - lo) <= 0.1 * hi,
              "min " + std::to_string(lo) + ", max " + std::to_string(hi));
  }
  return res;
}

// The box-and-viscosity rescaled Grashof number of a forcing:
// L^{2 theta}/nu^2 times the box-averaged ||f||_{-theta-theta2}. For the
// Navier-Stokes case this is the dimensional number with rho = 1.
inline double run_grashof(const ModelParams& p, const Forcing& f, const Grid& g) {
  if (!f.active()) return 0;
  if (!(p.nu > 0)) return INFINITY;
  return std::pow(g.length(), 2 * p.theta) / (p.nu * p.nu) *
         volume_averaged_norm(f.base()[0], -p.theta - p.theta2);
}

// Number of nonzero lattice wavevectors with |m| <= r.
inline long modes_within(const Grid& g, double r) {
  long n = 0;
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    if (!g.retained(i)) continue;
    double m2 = 0;
    for (int d = 0; d < g.dims(); ++d) m2 += double(g.m(d, i)) * g.m(d, i);
    if (m2 <= r * r + 1e-9) n += static_cast<long>(g.weight(i));
  }
  return n;
}

// Copies the modes with lattice radius <= r from `from` into `to`.
inline void replace_low_modes(State& to, const State& from, double r) {
  const Grid& g = to[0].grid();
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    double m2 = 0;
    for (int d = 0; d < g.dims(); ++d) m2 += double(g.m(d, i)) * g.m(d, i);
    if (m2 > r * r + 1e-9) continue;
    for (std::size_t b = 0; b < to.size(); ++b)
      for (int c = 0; c < to[b].dims(); ++c) to[b][c][i] = from[b][c][i];
  }
}

inline double low_mode_distance(const State& a, const State& b, double r) {
  State la = zeros_like(a), lb = zeros_like(b);
  replace_low_modes(la, a, r);
  replace_low_modes(lb, b, r);
  return l2_distance(la, lb);
}

// Two trajectories u (forcing f) and v (forcing g = f plus a decaying
// part). For each m the low modes |k| <= m of v are overwritten by those of
// u after every step, which realizes R_m(u - v) -> 0 exactly; the question
// is whether the high modes follow. m = 0 is the free run.
inline ExperimentResult run_determining_modes(const ExperimentConfig& c) {
  ExperimentResult res;
  res.kind = ExperimentKind::determining_modes;
  const auto g = grid_of(c);
  const ModelParams p = model_of(c);
  ForcingSpec gs = c.forcing;
  if (c.perturbation != 0) {
    if (gs.mode == ForcingMode::zero) gs.amplitude = 0;
    gs.mode = ForcingMode::time_decaying_pair;
    gs.secondary_amplitude = c.perturbation;
  }
  const Solver su(p, g, c.forcing), sv(p, g, gs);
  const State u0 = su.admit(initial_state(c, g, p.coupled(), c.seed));
  const State v0 = c.same_initial ? u0 : sv.admit(initial_state(c, g, p.coupled(), c.seed + 1));

  const double G = run_grashof(p, su.forcing(), *g);
  res.summary["G"] = G;
  res.notes.push_back("Grashof number G = " + std::to_string(G));

  const long nsteps = std::lround(c.t_end / c.dt);
  std::vector<State> vs(c.sweep.size(), v0);
  std::vector<double> low_before(c.sweep.size(), 0.0);
  TrajectoryRecord rec;
  rec.dt = c.dt;
  rec.steps_per_sample = c.sample_every;
  for (double m : c.sweep) {
    rec.columns.push_back("delta_full[" + member_name("m", m) + "]");
    rec.columns.push_back("delta_low[" + member_name("m", m) + "]");
  }
  State u = u0;
  double t = 0;
  auto sample = [&] {
    std::vector<double> row;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      row.push_back(l2_distance(u, vs[i]));
      row.push_back(low_before[i]);
    }
    rec.times.push_back(t);
    rec.rows.push_back(std::move(row));
  };
  for (std::size_t i = 0; i < vs.size(); ++i) low_before[i] = low_mode_distance(u, vs[i], c.sweep[i]);
  sample();
  try {
    for (long n = 1; n <= nsteps; ++n) {
      double tu = t, tv = t;
      su.step(tu, u, c.dt);
      parallel_for(vs.size(), c.jobs, [&](std::size_t i) {
        double ti = tv;
        sv.step(ti, vs[i], c.dt);
        low_before[i] = low_mode_distance(u, vs[i], c.sweep[i]);
        if (c.sweep[i] > 0) replace_low_modes(vs[i], u, c.sweep[i]);
      });
      t = n * c.dt;
      if (n % c.sample_every == 0 || n == nsteps) sample();
    }
  } catch (const BlowUp& b) {
    res.blew_up = true;
    res.blowup_detail = "blew up at t = " + std::to_string(b.time);
    rec.blew_up = true;
    rec.blowup_time = b.time;
  }
  res.series.emplace_back("gaps", rec);
  if (res.blew_up) return res;

  res.columns = {"m", "modes", "delta_full_end", "synchronized"};
  std::optional<double> sufficient;
  for (std::size_t i = vs.size(); i-- > 0;) {
    const double d = l2_distance(u, vs[i]);
    const bool ok = d <= c.tolerance;
    if (ok) {
      bool all_above = true;
      for (std::size_t j = i; j < vs.size(); ++j) all_above = all_above && l2_distance(u, vs[j]) <= c.tolerance;
      if (all_above) sufficient = c.sweep[i];
    }
  }
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const double d = l2_distance(u, vs[i]);
    res.rows.push_back({c.sweep[i], double(modes_within(*g, c.sweep[i])), d, d <= c.tolerance ? 1.0 : 0.0});
  }
  if (gs.mode == ForcingMode::time_decaying_pair && c.perturbation != 0) {
    const double left = std::abs(c.perturbation) * std::exp(-gs.decay_rate * c.t_end);
    if (left > c.tolerance)
      res.notes.push_back("forcing gap has not decayed below the tolerance by t_end (" +
                          std::to_string(left) + "); low-mode convergence is unconverged");
    res.summary["forcing_gap_end"] = left;
  }
  if (sufficient) {
    const long modes = modes_within(*g, *sufficient);
    res.summary["sufficient_m"] = *sufficient;
    res.summary["sufficient_modes"] = modes;
    if (p.theta > 0 && G > 0) {
      const double shape = std::pow(G, p.n_dim / p.theta);
      const long bound = determining_mode_count(G, p.n_dim, p.theta, p.theta2, 0,
                                                DeterminingRegime::dissipative);
      res.summary["bound_shape"] = bound;
      res.summary["fitted_C"] = modes / shape;
      res.notes.push_back("empirically sufficient m = " + std::to_string(*sufficient) + " (" +
                          std::to_string(modes) + " modes); G^{n/theta} = " + std::to_string(shape) +
                          "; fitted C = " + std::to_string(modes / shape));
    }
  } else {
    res.notes.push_back("no swept m synchronized within the tolerance");
  }
  if (G <= 1 && c.perturbation == 0) {
    bool all = true;
    for (const auto& r : res.rows) all = all && r[3] == 1.0;
    res.check("every projector synchronizes at G <= 1", all);
  }
  if (c.same_initial && c.perturbation == 0) {
    bool zero = true;
    for (const auto& r : rec.rows)
      for (std::size_t k = 0; k < r.size(); k += 2) zero = zero && r[k] == 0;
    res.check("identical forcing and data give identically zero gap", zero);
  }
  return res;
}

// Two runs whose initial data differ by delta0 in the V^{-theta2} norm.
inline ExperimentResult run_twin(const ExperimentConfig& c) {
  ExperimentResult res;
  res.kind = ExperimentKind::twin;
  const auto g = grid_of(c);
  const ModelParams p = model_of(c);
  const auto uniq = check_theorem(TheoremId::uniqueness_a, p, c.dims);
  res.notes.push_back(std::string("uniqueness in V^{-theta2}: ") +
                      (uniq.verdict == Verdict::holds ? "holds" : "does not hold") +
                      " for this model in dimension " + std::to_string(c.dims));
  res.check("model lies in the uniqueness regime", uniq.verdict == Verdict::holds);
  const double order = 0.0 - p.theta2;
  const Solver s(p, g, c.forcing);
  const State u0 = s.admit(initial_state(c, g, p.coupled(), c.seed));
  State w = s.admit(initial_state(c, g, p.coupled(), c.seed + 1));
  const double wn = sobolev_norm(w[0], order);
  for (auto& f : w) f *= 1 / wn;

  struct Member {
    TrajectoryRecord rec;
    double gap0 = 0;
  };
  std::vector<Member> runs(c.sweep.size());
  const long nsteps = std::lround(c.t_end / c.dt);
  parallel_for(runs.size(), c.jobs, [&](std::size_t i) {
    State a = u0, b = u0;
    axpy(b, c.sweep[i], w);
    auto& rec = runs[i].rec;
    rec.columns = {"gap", "ratio"};
    rec.dt = c.dt;
    rec.steps_per_sample = c.sample_every;
    double t = 0;
    auto gap = [&] {
      State d = a;
      axpy(d, -1.0, b);
      return sobolev_norm(d[0], order);
    };
    runs[i].gap0 = gap();
    auto sample = [&] {
      const double gp = gap();
      rec.times.push_back(t);
      rec.rows.push_back({gp, runs[i].gap0 > 0 ? gp / runs[i].gap0 : 0.0});
    };
    sample();
    try {
      for (long n = 1; n <= nsteps; ++n) {
        double ta = t, tb = t;
        s.step(ta, a, c.dt);
        s.step(tb, b, c.dt);
        t = n * c.dt;
        if (n % c.sample_every == 0 || n == nsteps) sample();
      }
    } catch (const BlowUp& e) {
      rec.blew_up = true;
      rec.blowup_time = e.time;
    }
  });

  res.columns = {"delta0", "gap0", "gap_end", "ratio_end", "ratio_max"};
  bool ratio_one = true, finite = true;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& rec = runs[i].rec;
    res.series.emplace_back(member_name("delta0", c.sweep[i]), rec);
    if (rec.blew_up) {
      res.blew_up = true;
      res.blowup_detail = member_name("delta0", c.sweep[i]) + " blew up";
      return res;
    }
    double rmax = 0;
    for (const auto& r : rec.rows) {
      finite = finite && std::isfinite(r[1]);
      rmax = std::max(rmax, r[1]);
    }
    if (runs[i].gap0 > 0) ratio_one = ratio_one && rec.rows.front()[1] == 1.0;
    else res.check("zero initial gap stays zero", rmax == 0 && rec.rows.back()[0] == 0);
    res.rows.push_back({c.sweep[i], runs[i].gap0, rec.rows.back()[0], rec.rows.back()[1], rmax});
  }
  res.check("gap ratio at t = 0 equals 1", ratio_one);
  res.check("gap ratio finite over the run", finite);
  for (std::size_t i = 1; i < res.rows.size(); ++i) {
    const double d1 = res.rows[i - 1][0], d2 = res.rows[i][0];
    if (d1 == 0 || d2 == 0 || std::max(d1, d2) > 1e-2) continue;
    const double want = d1 / d2, got = res.rows[i - 1][2] / res.rows[i][2];
    res.check("terminal gaps scale linearly (" + member_name("delta0", d1) + " vs " +
                  member_name("delta0", d2) + ")",
              std::abs(got / want - 1) <= 0.05,
              "ratio " + std::to_string(got) + ", expected " + std::to_string(want));
  }
  return res;
}

inline ExperimentResult run_experiment(const ExperimentConfig& c) {
  validate(c);
  ExperimentResult r;
  switch (c.kind) {
    case ExperimentKind::alpha_sweep: r = run_alpha_sweep(c); break;
    case ExperimentKind::inviscid_limit: r = run_inviscid_limit(c); break;
    case ExperimentKind::absorbing_ball: r = run_absorbing_ball(c); break;
    case ExperimentKind::determining_modes: r = run_determining_modes(c); break;
    case ExperimentKind::twin: r = run_twin(c); break;
  }
  if (!c.output.empty()) write_outputs(c.output, c, r);
  return r;
}

}  // namespace rnsm
