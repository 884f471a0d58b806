// qzeno: simulate | oracle | validate
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "qzeno/csv_io.hpp"
#include "qzeno/ensemble.hpp"
#include "qzeno/errors.hpp"
#include "qzeno/oracles.hpp"
#include "qzeno/run_config.hpp"
#include "qzeno/validation.hpp"

#ifndef QZENO_VERSION
#define QZENO_VERSION "dev"
#endif

namespace fs = std::filesystem;
using namespace qzeno;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSimulation = 3;

int report_config_error(const ConfigError& e) {
  std::cerr << "config error: " << e.what();
  if (!e.key().empty()) std::cerr << " [key " << e.key() << "]";
  if (e.line() > 0) std::cerr << " [line " << e.line() << "]";
  std::cerr << "\n";
  return kExitConfig;
}

std::string num(double v) { return format_number(v); }

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string source;
  std::string config_file;
  std::vector<std::string> sets;
  std::optional<int> n_trajectories;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> t_max;
  std::optional<std::string> integrator;
  std::optional<std::string> output;
  std::optional<int> trajectory_files;
  int workers = 0;
  bool quiet = false;
};

RunConfig resolve_config(const SimulateArgs& a) {
  RunConfig config;
  if (!a.source.empty()) {
    if (is_preset(a.source)) {
      config = preset(a.source);
    } else if (fs::is_regular_file(a.source)) {
      config = load_config(a.source);
    } else {
      throw ConfigError("'" + a.source + "' is neither a preset nor a readable config file", "run.preset");
    }
  }
  if (!a.config_file.empty()) config = load_config(a.config_file, config);
  for (const auto& s : a.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + s + "'", s);
    apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
  }
  if (a.n_trajectories) apply_setting(config, "run.n_trajectories", std::to_string(*a.n_trajectories));
  if (a.seed) apply_setting(config, "run.seed", std::to_string(*a.seed));
  if (a.dt) apply_setting(config, "run.dt", num(*a.dt));
  if (a.t_max) apply_setting(config, "run.t_max", num(*a.t_max));
  if (a.integrator) apply_setting(config, "run.integrator", *a.integrator);
  if (a.output) apply_setting(config, "output.path", *a.output);
  if (a.trajectory_files) apply_setting(config, "output.trajectory_files", std::to_string(*a.trajectory_files));
  validate(config);
  return config;
}

int run_simulate(const SimulateArgs& args) {
  RunConfig config;
  try {
    config = resolve_config(args);
  } catch (const ConfigError& e) {
    return report_config_error(e);
  }

  const auto start = std::chrono::steady_clock::now();
  EnsembleResult result;
  try {
    const ModelSpec model = build_model(config);
    result = run_ensemble(model, config, {args.workers, config.trajectory_files > 0});
  } catch (const ConfigError& e) {
    return report_config_error(e);
  } catch (const std::exception& e) {
    std::cerr << "simulation failed: " << e.what() << "\n";
    return kExitSimulation;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const fs::path out_dir(config.output_path);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "cannot create output directory " << out_dir << ": " << ec.message() << "\n";
    return kExitSimulation;
  }
  const fs::path ensemble_path = out_dir / "ensemble.csv";
  write_ensemble_csv(ensemble_path.string(), result.stats);

  std::vector<std::string> trajectory_paths;
  const std::size_t n_files = std::min<std::size_t>(config.trajectory_files, result.records.size());
  for (std::size_t i = 0; i < n_files; ++i) {
    std::ostringstream name;
    name << "trajectory_" << std::setw(4) << std::setfill('0') << result.records[i].trajectory_id << ".csv";
    const fs::path p = out_dir / name.str();
    write_trajectory_csv(p.string(), result.records[i]);
    trajectory_paths.push_back(p.filename().string());
  }

  nlohmann::ordered_json manifest;
  manifest["version"] = QZENO_VERSION;
  manifest["name"] = config.name;
  manifest["model"] = to_string(config.model);
  manifest["master_seed"] = config.master_seed;
  nlohmann::ordered_json resolved = nlohmann::ordered_json::object();
  for (const auto& [key, value] : settings(config)) resolved[key] = value;
  manifest["config"] = resolved;
  manifest["observables"] = result.stats.names;
  manifest["n_trajectories"] = result.stats.n_trajectories;
  manifest["failed_trajectories"] = result.failures.size();
  manifest["total_jumps"] = result.stats.total_jumps;
  manifest["decimation_stride"] = result.stats.stride;
  manifest["max_jump_probability"] = result.stats.max_jump_probability;
  manifest["wall_time_seconds"] = wall;
  manifest["ensemble_csv"] = ensemble_path.filename().string();
  manifest["trajectory_csv"] = trajectory_paths;
  std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << "\n";

  for (const auto& f : result.failures) std::cerr << "warning: trajectory " << f.trajectory_id << " failed: " << f.message << "\n";
  if (result.stats.max_jump_probability > kJumpWarnProbability) {
    std::cerr << "warning: max jump probability per step " << result.stats.max_jump_probability
              << " exceeds " << kJumpWarnProbability << "; reduce dt\n";
  }
  if (!args.quiet) {
    std::cout << "wrote " << ensemble_path.string() << " (" << result.stats.n_trajectories << " trajectories, "
              << result.stats.times.size() << " points, " << result.stats.total_jumps << " jumps, " << wall
              << " s)\n";
  }
  return 0;
}

// ------------------------------------------------------------------ oracle

struct OracleArgs {
  std::string formula;
  std::map<std::string, double> values;
  std::vector<std::string> given;

  bool has(const std::string& k) const { return values.count(k) > 0; }
  double get(const std::string& k) const { return values.at(k); }
};

class MissingParameter : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double need(const OracleArgs& a, const std::string& key) {
  if (!a.has(key)) throw MissingParameter("formula '" + a.formula + "' needs --" + key);
  return a.get(key);
}

double need_tau_m(const OracleArgs& a) {
  if (a.has("tau-m")) return a.get("tau-m");
  if (a.has("gamma") && a.has("lambda")) return measurement_time(a.get("gamma"), a.get("lambda"));
  throw MissingParameter("formula '" + a.formula + "' needs --tau-m, or --gamma and --lambda");
}

// Band from --lambda-band and --gamma0 (or --g0), with optional --n-modes,
// --a and --omega-a.
ReservoirSpec need_reservoir(const OracleArgs& a) {
  ReservoirSpec r;
  r.half_width = need(a, "lambda-band");
  if (a.has("n-modes")) r.n_modes = static_cast<int>(a.get("n-modes"));
  if (a.has("a")) r.slope = a.get("a");
  if (a.has("omega-a")) r.omega_a = a.get("omega-a");
  if (a.has("g0")) {
    r.g0 = a.get("g0");
  } else if (a.has("gamma0")) {
    r.g0 = std::sqrt(a.get("gamma0") * r.spacing() / (2.0 * M_PI));
  } else {
    throw MissingParameter("formula '" + a.formula + "' needs --gamma0 or --g0");
  }
  r.validate();
  return r;
}

void print_prediction(const RatePrediction& p) {
  std::cout << "formula=" << to_string(p.formula_id) << " rate=" << num(p.rate) << " valid="
            << (p.validity_note.empty() ? "yes" : "marginal");
  if (!p.validity_note.empty()) std::cout << " note=\"" << p.validity_note << "\"";
  std::cout << "\n";
}

void print_value(const std::string& name, double v) { std::cout << name << "=" << num(v) << "\n"; }

int run_oracle(const OracleArgs& a) {
  try {
    const std::string& f = a.formula;
    if (f == "tau_m") {
      print_value("tau_m", measurement_time(need(a, "gamma"), need(a, "lambda")));
    } else if (f == "coherence") {
      print_value("coherence_factor", coherence_factor(need(a, "t"), need_tau_m(a)));
    } else if (f == "rabi") {
      const DriveParams drive{need(a, "omega-r"), a.has("detuning") ? a.get("detuning") : 0.0};
      const Complex c = rabi_amplitude(need(a, "t"), drive);
      std::cout << "c_g_re=" << num(c.real()) << " c_g_im=" << num(c.imag()) << " rho_gg=" << num(std::norm(c))
                << "\n";
    } else if (f == "zeno") {
      const DriveParams drive{need(a, "omega-r"), a.has("detuning") ? a.get("detuning") : 0.0};
      print_prediction(zeno_transition_rate(drive, need_tau_m(a)));
    } else if (f == "golden") {
      print_prediction(golden_rule_rate(need_reservoir(a)));
    } else if (f == "corrected-free") {
      print_prediction(corrected_free_decay_rate(need_reservoir(a)));
    } else if (f == "measured-decay") {
      print_prediction(measured_decay_rate(need_reservoir(a), need_tau_m(a)));
    } else if (f == "measured-decay-series") {
      print_prediction(measured_decay_rate_series(need_reservoir(a), need_tau_m(a)));
    } else if (f == "anti-zeno") {
      print_prediction(anti_zeno_rate(need_reservoir(a), need_tau_m(a)));
    } else if (f == "laplace") {
      const ReservoirSpec r = need_reservoir(a);
      const RootResult root = laplace_root(r, need_tau_m(a));
      print_prediction(laplace_decay_rate(r, need_tau_m(a)));
      std::cout << "root_re=" << num(root.root.real()) << " root_im=" << num(root.root.imag())
                << " residual=" << num(root.residual) << " iterations=" << root.iterations << "\n";
    } else if (f == "resolvent") {
      const RootResult root = resolvent_root(need_reservoir(a));
      std::cout << "rate=" << num(-2.0 * root.root.real()) << " root_re=" << num(root.root.real())
                << " root_im=" << num(root.root.imag()) << " iterations=" << root.iterations << "\n";
    } else {
      std::cerr << "unknown formula '" << f << "'\n";
      return kExitConfig;
    }
  } catch (const MissingParameter& e) {
    std::cerr << "missing parameter: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "oracle failed: " << e.what() << "\n";
    return kExitSimulation;
  }
  return 0;
}

// ---------------------------------------------------------------- validate

struct ValidateArgs {
  std::string suite = "all";
  int n_trajectories = 1000;
  int workers = 0;
  std::string integrator = "rk4";
  std::uint64_t seed = kDefaultSeed;
  bool quiet = false;
};

int run_validate(const ValidateArgs& a) {
  ValidationOptions options;
  options.n_trajectories = a.n_trajectories;
  options.workers = a.workers;
  options.seed = a.seed;
  options.log = a.quiet ? nullptr : &std::cerr;
  if (a.integrator == "euler") {
    options.integrator = Integrator::euler;
  } else if (a.integrator != "rk4") {
    std::cerr << "config error: integrator must be euler or rk4 [key integrator]\n";
    return kExitConfig;
  }
  std::vector<CriterionResult> results;
  try {
    results = run_suite(a.suite, options, &std::cout);
  } catch (const ConfigError& e) {
    return report_config_error(e);
  }
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.passed;
  std::cout << "summary suite=" << a.suite << " passed=" << passed << " total=" << results.size() << "\n";
  return passed == results.size() ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-jump simulator for Zeno and anti-Zeno dynamics"};
  app.set_version_flag("--version", QZENO_VERSION);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a preset or config file and write CSV output");
  simulate->add_option("source", sim.source, "Preset name (fig1..fig12) or config file");
  simulate->add_option("--config", sim.config_file, "Config file applied after the preset");
  simulate->add_option("--set", sim.sets, "Override, e.g. --set detector.gamma=20");
  simulate->add_option("--n-trajectories", sim.n_trajectories);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--dt", sim.dt);
  simulate->add_option("--t-max", sim.t_max);
  simulate->add_option("--integrator", sim.integrator);
  simulate->add_option("--output,-o", sim.output, "Output directory");
  simulate->add_option("--trajectory-files", sim.trajectory_files);
  simulate->add_option("--workers", sim.workers, "Worker threads (default: QZENO_WORKERS or all cores)");
  simulate->add_flag("--quiet,-q", sim.quiet);

  OracleArgs orc;
  auto* oracle = app.add_subcommand("oracle", "Evaluate a closed-form or semi-analytic prediction");
  oracle->add_option("formula", orc.formula,
                     "tau_m | coherence | rabi | zeno | golden | corrected-free | measured-decay | "
                     "measured-decay-series | anti-zeno | laplace | resolvent")
      ->required();
  const std::vector<std::string> oracle_keys = {"gamma",   "lambda", "tau-m", "t",       "omega-r", "detuning",
                                                "lambda-band", "gamma0", "g0", "n-modes", "a",       "omega-a"};
  std::map<std::string, double> raw;
  for (const auto& k : oracle_keys) oracle->add_option("--" + k, raw[k]);

  ValidateArgs val;
  auto* validate_cmd = app.add_subcommand("validate", "Run acceptance criteria and print one line per criterion");
  validate_cmd->add_option("suite", val.suite, "detector | zeno2level | antizeno2level | freedecay | "
                                               "measureddecay | antizenodecay | engine | all");
  validate_cmd->add_option("--n-trajectories", val.n_trajectories);
  validate_cmd->add_option("--workers", val.workers);
  validate_cmd->add_option("--integrator", val.integrator);
  validate_cmd->add_option("--seed", val.seed);
  validate_cmd->add_flag("--quiet,-q", val.quiet);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (simulate->parsed()) {
    if (sim.source.empty() && sim.config_file.empty()) {
      std::cerr << "config error: give a preset name or --config\n";
      return kExitConfig;
    }
    return run_simulate(sim);
  }
  if (oracle->parsed()) {
    for (const auto& k : oracle_keys) {
      if (oracle->count("--" + k) > 0) orc.values[k] = raw[k];
    }
    return run_oracle(orc);
  }
  return run_validate(val);
}
