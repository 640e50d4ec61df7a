// rnsm: simulations, regime reports, sweeps and spectra for the regularized
// Navier-Stokes family. Tables go to stdout, data only to files.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "rnsm/experiments.hpp"
#include "rnsm/snapshot.hpp"

using namespace rnsm;
namespace fs = std::filesystem;

namespace {

enum Exit : int { ok = 0, check_failed = 1, config_error = 2, blow_up = 3, internal = 4 };

int default_jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

std::string default_out(const std::string& sub) {
  const char* root = std::getenv("RNSM_OUT");
  return (fs::path(root && *root ? root : "rnsm-out") / sub).string();
}

// Flags shared by the run-type subcommands. Each one only overrides the
// config file when it was given on the command line.
struct RunFlags {
  std::string config, out, model, form, kind, forcing_mode;
  double theta = 0, theta1 = 0, theta2 = 0, alpha = 0, nu = 0, eta = 0, dt = 0, t_end = 0;
  double forcing_amplitude = 0, tolerance = 0, perturbation = 0;
  int grid = 0, dims = 0, jobs = 0, sample_every = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;
  std::vector<std::pair<std::string, CLI::Option*>> opts;

  CLI::Option* get(const std::string& name) const {
    for (const auto& [n, o] : opts)
      if (n == name) return o;
    return nullptr;
  }
  bool given(const std::string& name) const {
    auto* o = get(name);
    return o && o->count() > 0;
  }
};

template <class T>
void add(CLI::App* app, RunFlags& f, const std::string& name, T& target, const std::string& help) {
  auto* o = app->add_option("--" + name, target, help);
  if constexpr (std::is_same_v<T, std::vector<double>>) o->delimiter(',');
  f.opts.emplace_back(name, o);
}

void add_model_flags(CLI::App* app, RunFlags& f) {
  add(app, f, "model", f.model, "preset name (see `presets`) or custom");
  add(app, f, "theta", f.theta, "dissipation exponent: A = nu(-Lap)^theta");
  add(app, f, "theta1", f.theta1, "M = (I - alpha^2 Lap)^-theta1 (custom models)");
  add(app, f, "theta2", f.theta2, "N = (I - alpha^2 Lap)^-theta2");
  add(app, f, "alpha", f.alpha, "filter length");
  add(app, f, "nu", f.nu, "viscosity");
  add(app, f, "eta", f.eta, "magnetic diffusivity (coupled models)");
  add(app, f, "form", f.form, "bilinear form B1..B5 (custom models)");
}

void add_run_flags(CLI::App* app, RunFlags& f) {
  add(app, f, "config", f.config, "JSON config; flags override its values");
  add_model_flags(app, f);
  add(app, f, "grid", f.grid, "points per side, a power of two");
  add(app, f, "dims", f.dims, "spatial dimension, 2 or 3");
  add(app, f, "dt", f.dt, "time step; must divide t-end");
  add(app, f, "t-end", f.t_end, "final time");
  add(app, f, "seed", f.seed, "seed of the initial data (forcing uses seed + 1000)");
  add(app, f, "sample-every", f.sample_every, "steps between recorded samples");
  add(app, f, "forcing", f.forcing_mode, "forcing mode: zero, steady-band, time-decaying-pair");
  add(app, f, "forcing-amplitude", f.forcing_amplitude, "L2 norm of the steady forcing");
  add(app, f, "out", f.out, "output directory (default $RNSM_OUT/<subcommand>, else rnsm-out/<subcommand>)");
  add(app, f, "jobs", f.jobs, "worker threads (default: cores for sweeps, 1 otherwise)");
}

ExperimentConfig effective_config(const RunFlags& f, const std::string& sub,
                                  std::optional<ExperimentKind> kind) {
  nlohmann::json j = nlohmann::json::object();
  if (!f.config.empty()) j = read_config_json(f.config);
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (kind) j["kind"] = to_string(*kind);
  ExperimentConfig c = config_fields_from_json(j);
  const bool had_forcing_seed = j.contains("forcing") && j["forcing"].contains("seed");
  if (f.given("model")) c.model = f.model;
  if (f.given("theta")) c.theta = f.theta;
  if (f.given("theta1")) c.theta1 = f.theta1;
  if (f.given("theta2")) c.theta2 = f.theta2;
  if (f.given("alpha")) c.alpha = f.alpha;
  if (f.given("nu")) c.nu = f.nu;
  if (f.given("eta")) c.eta = f.eta;
  if (f.given("form")) {
    try {
      c.form = form_from(f.form);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (f.given("grid")) c.resolution = f.grid;
  if (f.given("dims")) c.dims = f.dims;
  if (f.given("dt")) c.dt = f.dt;
  if (f.given("t-end")) c.t_end = f.t_end;
  if (f.given("seed")) {
    c.seed = f.seed;
    if (!had_forcing_seed) c.forcing.seed = c.seed + 1000;
  }
  if (f.given("sample-every")) c.sample_every = f.sample_every;
  if (f.given("forcing")) {
    try {
      c.forcing.mode = forcing_mode_from(f.forcing_mode);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (f.given("forcing-amplitude")) {
    c.forcing.amplitude = f.forcing_amplitude;
    if (!f.given("forcing") && c.forcing.mode == ForcingMode::zero) c.forcing.mode = ForcingMode::steady_band;
  }
  if (f.given("values")) c.sweep = f.values;
  if (f.given("tolerance")) c.tolerance = f.tolerance;
  if (f.given("perturbation")) c.perturbation = f.perturbation;
  if (f.given("jobs")) c.jobs = f.jobs;
  else if (!j.contains("jobs")) c.jobs = kind ? default_jobs() : 1;
  if (f.given("out")) c.output = f.out;
  else if (c.output.empty()) c.output = default_out(sub);
  return c;
}

// The single-run checks that validate() applies to experiments.
void validate_single(ExperimentConfig c) {
  c.sweep = {1};
  c.kind = ExperimentKind::twin;
  validate(c);
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

int cmd_presets(int n) {
  std::cout << std::left << std::setw(15) << "Model" << std::setw(8) << "theta" << std::setw(8)
            << "theta1" << std::setw(8) << "theta2" << "form\n";
  std::vector<RegimeReport> reps;
  for (const auto& name : table_presets()) {
    const auto p = preset(name, {.n_dim = n});
    std::cout << std::setw(15) << name << std::setw(8) << format_order(p.theta) << std::setw(8)
              << format_order(p.theta1) << std::setw(8) << format_order(p.theta2)
              << to_string(p.family()) << '\n';
    reps.push_back(full_report(p, n));
  }
  std::cout << "\nregime summary, n = " << n << ":\n" << format_table(reps);
  return ok;
}

int cmd_regime(const RunFlags& f, int n, bool verbose, const std::string& json_out) {
  ExperimentConfig c;
  c.dims = n;
  if (f.given("model")) c.model = f.model;
  if (f.given("theta")) c.theta = f.theta;
  if (f.given("theta1")) c.theta1 = f.theta1;
  if (f.given("theta2")) c.theta2 = f.theta2;
  if (f.given("alpha")) c.alpha = f.alpha;
  if (f.given("form")) {
    try {
      c.form = form_from(f.form);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (n != 2 && n != 3) throw ConfigError("--n must be 2 or 3");
  const auto rep = full_report(model_of(c), n);
  std::cout << format_report(rep, verbose);
  if (!json_out.empty()) {
    if (fs::path(json_out).has_parent_path()) fs::create_directories(fs::path(json_out).parent_path());
    std::ofstream(json_out) << to_json(rep).dump(2) << '\n';
  }
  return ok;
}

int cmd_simulate(const RunFlags& f) {
  const auto c = effective_config(f, "simulate", std::nullopt);
  validate_single(c);
  const auto p = model_of(c);
  const auto g = grid_of(c);
  const Solver s(p, g, c.forcing);
  IntegrateOptions opt;
  opt.sample_every = c.sample_every;
  const auto re = reynolds_orders(p.theta1, p.theta2);
  opt.sobolev_orders = {re[0], re[1]};
  const auto tr = s.integrate(initial_state(c, g, p.coupled(), c.seed), 0, c.t_end, c.dt, opt);
  const auto& rec = tr.record;

  fs::create_directories(c.output);
  const fs::path dir(c.output);
  rec.write_csv((dir / "trajectory.csv").string());
  {
    std::ofstream os(dir / "diagnostics.csv");
    os << std::setprecision(17) << "quantity,value\n";
    os << "final_time," << tr.final_time << '\n';
    os << "blew_up," << (rec.blew_up ? 1 : 0) << '\n';
    os << "cfl_dt," << rec.cfl_dt << '\n';
    if (!rec.blew_up && rec.size() >= 2) {
      const auto a = long_time_aggregates(rec, p, run_scales(p, c.forcing, *g));
      os << "grashof," << a.G << '\n';
      if (a.has_reynolds) {
        os << "reynolds," << a.re.Re << '\n'
           << "dissipation_rate," << a.re.eps << '\n'
           << "average_stable," << (a.re.stable ? 1 : 0) << '\n';
      }
      if (rec.size() >= 5)
        os << "budget_residual," << max_abs(energy_budget_residual(rec, BudgetQuadrature::stage)) << '\n';
    }
    if (p.coupled()) {
      const auto m = mhd_invariants(tr.final_state);
      os << "energy," << m.energy << '\n' << "cross_helicity," << m.cross_helicity << '\n';
    }
  }
  write_spectrum_csv((dir / "spectrum.csv").string(), shell_spectrum(tr.final_state[0]));
  write_snapshot((dir / "final.snap").string(), tr.final_state, tr.final_time, {{"model", p.label}});
  nlohmann::json m;
  auto echo = to_json(c);
  echo.erase("kind");
  echo.erase("sweep");
  echo.erase("tolerance");
  echo.erase("perturbation");
  echo.erase("same_initial");
  m["config"] = echo;
  m["files"] = {"trajectory.csv", "diagnostics.csv", "spectrum.csv", "final.snap"};
  std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';

  std::cout << p.label << " on " << c.resolution << "^" << c.dims << ", dt " << fmt(c.dt) << ", t_end "
            << fmt(c.t_end) << '\n';
  std::cout << std::left << std::setw(12) << "t" << std::setw(16) << "energy" << "energy_N\n";
  const auto e = rec.series("energy"), en = rec.series("energy_N");
  const std::size_t stride = std::max<std::size_t>(1, rec.size() / 10);
  for (std::size_t i = 0; i < rec.size(); i += stride)
    std::cout << std::setw(12) << fmt(rec.times[i]) << std::setw(16) << fmt(e[i]) << fmt(en[i]) << '\n';
  std::cout << "wrote " << c.output << '\n';
  if (rec.blew_up) {
    std::cerr << "blow-up at t = " << rec.blowup_time << '\n';
    return blow_up;
  }
  return ok;
}

int cmd_experiment(const RunFlags& f, const std::string& sub, std::optional<ExperimentKind> kind) {
  if (!kind && f.given("kind")) kind = experiment_kind_from(f.kind);
  if (!kind && !f.config.empty()) {
    const auto j = read_config_json(f.config);
    if (j.is_object() && j.contains("kind")) kind = experiment_kind_from(j["kind"].get<std::string>());
  }
  if (!kind) throw ConfigError("sweep needs --kind or a config with a 'kind'");
  if (*kind == ExperimentKind::determining_modes && sub == "sweep")
    throw ConfigError("use `determine` for determining-modes runs");
  const auto c = effective_config(f, sub, kind);
  const auto r = run_experiment(c);
  std::cout << r.format() << "wrote " << c.output << '\n';
  if (r.blew_up) return blow_up;
  return r.passed() ? ok : check_failed;
}

int cmd_spectrum(const std::string& input, int block, const std::string& out) {
  const auto snap = read_snapshot(input);
  if (block < 0 || block >= static_cast<int>(snap.state.size()))
    throw ConfigError("snapshot has " + std::to_string(snap.state.size()) + " block(s)");
  const auto E = shell_spectrum(snap.state[static_cast<std::size_t>(block)]);
  std::cout << "t = " << fmt(snap.time) << '\n' << std::left << std::setw(8) << "kappa" << "E\n";
  for (std::size_t k = 0; k < E.size(); ++k) std::cout << std::setw(8) << k << fmt(E[k]) << '\n';
  if (!out.empty()) {
    fs::create_directories(out);
    write_spectrum_csv((fs::path(out) / "spectrum.csv").string(), E);
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized Navier-Stokes family: simulation, regime reports, sweeps.\n"
               "Exit status: 0 ok, 1 a check failed, 2 usage or config error, 3 blow-up, 4 internal error."};
  app.require_subcommand(1);

  auto* presets = app.add_subcommand("presets", "table of the named models and their regimes");
  int presets_n = 3;
  presets->add_option("--n", presets_n, "dimension for the regime summary")->capture_default_str();

  RunFlags rf;
  auto* regime = app.add_subcommand("regime", "well-posedness report for one model");
  add_model_flags(regime, rf);
  int regime_n = 3;
  bool verbose = false;
  std::string regime_json;
  regime->add_option("--n", regime_n, "spatial dimension, 2 or 3")->capture_default_str();
  regime->add_flag("-v,--verbose", verbose, "print routes and inequality slacks");
  regime->add_option("--json", regime_json, "also write the report as JSON to this file");

  RunFlags sf;
  auto* simulate = app.add_subcommand("simulate", "one run: trajectory, diagnostics, spectrum, snapshot");
  add_run_flags(simulate, sf);

  RunFlags wf;
  auto* sweep = app.add_subcommand("sweep", "alpha-sweep, inviscid-limit, absorbing-ball or twin study");
  add_run_flags(sweep, wf);
  add(sweep, wf, "kind", wf.kind, "experiment kind (else taken from the config)");
  add(sweep, wf, "values", wf.values, "sweep values, strictly monotone");

  RunFlags df;
  auto* determine = app.add_subcommand("determine", "determining-modes study by low-mode replacement");
  add_run_flags(determine, df);
  add(determine, df, "values", df.values, "radii m of the replaced low modes; 0 = free run");
  add(determine, df, "tolerance", df.tolerance, "gap below which a run counts as synchronized");
  add(determine, df, "perturbation", df.perturbation, "amplitude of the decaying part of g - f");

  auto* spectrum = app.add_subcommand("spectrum", "shell energy spectrum of a snapshot");
  std::string snap_in, spec_out;
  int block = 0;
  spectrum->add_option("--input", snap_in, "snapshot written by simulate")->required();
  spectrum->add_option("--block", block, "0 velocity, 1 magnetic field")->capture_default_str();
  spectrum->add_option("--out", spec_out, "also write spectrum.csv into this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return config_error;
  }

  try {
    if (presets->parsed()) return cmd_presets(presets_n);
    if (regime->parsed()) return cmd_regime(rf, regime_n, verbose, regime_json);
    if (simulate->parsed()) return cmd_simulate(sf);
    if (sweep->parsed()) return cmd_experiment(wf, "sweep", std::nullopt);
    if (determine->parsed()) return cmd_experiment(df, "determine", ExperimentKind::determining_modes);
    if (spectrum->parsed()) return cmd_spectrum(snap_in, block, spec_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const BlowUp& e) {
    std::cerr << e.what() << '\n';
    return blow_up;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return internal;
  }
  return internal;
}
