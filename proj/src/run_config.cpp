#include "qzeno/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "qzeno/errors.hpp"

namespace qzeno {
namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

double parse_double(const std::string& key, const std::string& text, int line) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("'" + key + "': expected a number, got '" + s + "'", key, line);
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text, int line) {
  const std::string s = trim(text);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("'" + key + "': expected an integer, got '" + s + "'", key, line);
  }
  return v;
}

// "re" or "re,im"
Complex parse_complex(const std::string& key, const std::string& text, int line) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) return {parse_double(key, text, line), 0.0};
  return {parse_double(key, text.substr(0, comma), line),
          parse_double(key, text.substr(comma + 1), line)};
}

std::string format_complex(Complex c) { return format_double(c.real()) + "," + format_double(c.imag()); }

bool parse_bool_target(const std::string& key, const std::string& text, int line) {
  const std::string s = trim(text);
  if (s == "ground") return false;
  if (s == "excited") return true;
  throw ConfigError("'" + key + "': expected 'ground' or 'excited', got '" + s + "'", key, line);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string&, int)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Entry {
  std::string key;
  Setter set;
  Getter get;
};

Entry real_entry(std::string key, double RunConfig::*member) {
  return {key,
          [member](RunConfig& c, const std::string& k, const std::string& v, int line) {
            c.*member = parse_double(k, v, line);
          },
          [member](const RunConfig& c) { return format_double(c.*member); }};
}

template <typename Struct>
Entry nested_real(std::string key, Struct RunConfig::*outer, double Struct::*member) {
  return {key,
          [outer, member](RunConfig& c, const std::string& k, const std::string& v, int line) {
            (c.*outer).*member = parse_double(k, v, line);
          },
          [outer, member](const RunConfig& c) { return format_double((c.*outer).*member); }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    t.push_back({"run.name",
                 [](RunConfig& c, const std::string&, const std::string& v, int) { c.name = trim(v); },
                 [](const RunConfig& c) { return c.name; }});
    t.push_back({"run.model",
                 [](RunConfig& c, const std::string& k, const std::string& v, int line) {
                   const std::string s = trim(v);
                   if (s == "detector") c.model = ModelKind::detector;
                   else if (s == "rabi") c.model = ModelKind::rabi;
                   else if (s == "free_decay") c.model = ModelKind::free_decay;
                   else if (s == "measured_decay") c.model = ModelKind::measured_decay;
                   else throw ConfigError("'" + k + "': unknown model '" + s + "'", k, line);
                 },
                 [](const RunConfig& c) { return to_string(c.model); }});
    t.push_back(real_entry("run.dt", &RunConfig::dt));
    t.push_back(real_entry("run.t_max", &RunConfig::t_max));
    t.push_back({"run.n_trajectories",
                 [](RunConfig& c, const std::string& k, const std::string& v, int line) {
                   c.n_trajectories = parse_int<int>(k, v, line);
                 },
                 [](const RunConfig& c) { return std::to_string(c.n_trajectories); }});
    t.push_back({"run.seed",
                 [](RunConfig& c, const std::string& k, const std::string& v, int line) {
                   c.master_seed = parse_int<std::uint64_t>(k, v, line);
                 },
                 [](const RunConfig& c) { return std::to_string(c.master_seed); }});
    t.push_back({"run.integrator",
                 [](RunConfig& c, const std::string& k, const std::string& v, int line) {
                   const std::string s = trim(v);
                   if (s == "euler") c.integrator = Integrator::euler;
                   else if (s == "rk4") c.integrator = Integrator::rk4;
                   else throw ConfigError("'" + k + "': expected 'euler' or 'rk4', got '" + s + "'", k, line);
                 },
                 [](const RunConfig& c) { return to_string(c.integrator); }});
    t.push_back(real_entry("run.omega_a", &RunConfig::omega_a));

    t.push_back(nested_real("detector.gamma", &RunConfig::detector, &DetectorParams::gamma));
    t.push_back(nested_real("detector.lambda", &RunConfig::detector, &DetectorParams::lambda));
    t.push_back(nested_real("detector.omega_d", &RunConfig::detector, &DetectorParams::omega_d));
    t.push_back({"detector.target",
                 [](RunConfig& c, const std::string& k, const std::string& v, int line) {
                   c.detector.target = parse_bool_target(k, v, line) ? CouplingTarget::excited
                                                                     : CouplingTarget::ground;
                 },
                 [](const RunConfig& c) {
                   return std::string(c.detector.target == CouplingTarget::ground ? "ground" : "excited");
                 }});

    t.push_back(nested_real("drive.omega_r", &RunConfig::drive, &DriveParams::omega_r));
    t.push_back(nested_real("drive.detuning", &RunConfig::drive, &DriveParams::detuning));

    t.push_back({"reservoir.n_modes",
                 [](RunConfig& c, const std::string& k, const std::string& v, int line) {
                   c.reservoir.n_modes = parse_int<int>(k, v, line);
                 },
                 [](const RunConfig& c) { return std::to_string(c.reservoir.n_modes); }});
    t.push_back(nested_real("reservoir.half_width", &RunConfig::reservoir, &ReservoirSpec::half_width));
    t.push_back(nested_real("reservoir.g0", &RunConfig::reservoir, &ReservoirSpec::g0));
    t.push_back(nested_real("reservoir.slope", &RunConfig::reservoir, &ReservoirSpec::slope));
    t.push_back(nested_real("reservoir.omega_a", &RunConfig::reservoir, &ReservoirSpec::omega_a));

    t.push_back({"initial.c_e",
                 [](RunConfig& c, const std::string& k, const std::string& v, int line) {
                   c.initial_system[0] = parse_complex(k, v, line);
                 },
                 [](const RunConfig& c) { return format_complex(c.initial_system[0]); }});
    t.push_back({"initial.c_g",
                 [](RunConfig& c, const std::string& k, const std::string& v, int line) {
                   c.initial_system[1] = parse_complex(k, v, line);
                 },
                 [](const RunConfig& c) { return format_complex(c.initial_system[1]); }});

    t.push_back({"output.path",
                 [](RunConfig& c, const std::string&, const std::string& v, int) { c.output_path = trim(v); },
                 [](const RunConfig& c) { return c.output_path; }});
    t.push_back({"output.observables",
                 [](RunConfig& c, const std::string&, const std::string& v, int) {
                   c.observables = split_list(v);
                 },
                 [](const RunConfig& c) {
                   std::string s;
                   for (const auto& o : c.observables) s += (s.empty() ? "" : ",") + o;
                   return s;
                 }});
    t.push_back({"output.decimation",
                 [](RunConfig& c, const std::string& k, const std::string& v, int line) {
                   c.decimation = parse_int<int>(k, v, line);
                 },
                 [](const RunConfig& c) { return std::to_string(c.decimation); }});
    t.push_back({"output.trajectory_files",
                 [](RunConfig& c, const std::string& k, const std::string& v, int line) {
                   c.trajectory_files = parse_int<int>(k, v, line);
                 },
                 [](const RunConfig& c) { return std::to_string(c.trajectory_files); }});
    return t;
  }();
  return table;
}

RunConfig detector_preset(std::string name, int n) {
  RunConfig c;
  c.name = std::move(name);
  c.model = ModelKind::detector;
  c.detector = {10.0, 1.0, 1.0, CouplingTarget::ground};
  c.initial_system = kEqualSuperposition;
  c.dt = 0.1;
  c.t_max = 30.0;
  c.n_trajectories = n;
  return c;
}

RunConfig rabi_preset(std::string name, int n, double dt, double detuning) {
  RunConfig c;
  c.name = std::move(name);
  c.model = ModelKind::rabi;
  c.detector = {10.0, 1.0, 1.0, CouplingTarget::ground};
  c.drive = {0.1, detuning};
  c.initial_system = kGroundOnly;
  c.dt = dt;
  c.t_max = 200.0;
  c.n_trajectories = n;
  return c;
}

RunConfig decay_preset(std::string name, ModelKind kind, int n, double slope,
                       CouplingTarget target) {
  RunConfig c;
  c.name = std::move(name);
  c.model = kind;
  c.detector = {10.0, 1.0, 1.0, target};
  c.reservoir = ReservoirSpec{};
  c.reservoir.slope = slope;
  c.initial_system = kExcitedOnly;
  c.dt = 0.1;
  c.t_max = 300.0;
  c.n_trajectories = n;
  return c;
}

}  // namespace

std::string to_string(Integrator integrator) {
  return integrator == Integrator::euler ? "euler" : "rk4";
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::detector: return "detector";
    case ModelKind::rabi: return "rabi";
    case ModelKind::free_decay: return "free_decay";
    case ModelKind::measured_decay: return "measured_decay";
  }
  return "unknown";
}

long long RunConfig::n_steps() const { return std::llround(t_max / dt); }

void validate(const RunConfig& c) {
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw ConfigError("dt must be positive", "run.dt");
  if (!(c.t_max >= c.dt) || !std::isfinite(c.t_max)) {
    throw ConfigError("t_max must be at least dt", "run.t_max");
  }
  if (std::abs(c.n_steps() * c.dt - c.t_max) > 1e-9 * c.t_max) {
    throw ConfigError("t_max must be an integer multiple of dt", "run.t_max");
  }
  if (c.n_trajectories < 1) throw ConfigError("n_trajectories must be >= 1", "run.n_trajectories");
  if (c.decimation < 1) throw ConfigError("decimation must be >= 1", "output.decimation");
  if (c.trajectory_files < 0) throw ConfigError("trajectory_files must be >= 0", "output.trajectory_files");
  if (c.model != ModelKind::free_decay) {
    if (!(c.detector.gamma > 0.0)) throw ConfigError("detector gamma must be > 0", "detector.gamma");
    if (!(c.detector.lambda >= 0.0)) throw ConfigError("detector lambda must be >= 0", "detector.lambda");
  }
  if (c.model == ModelKind::rabi && !(c.drive.omega_r >= 0.0)) {
    throw ConfigError("Rabi frequency must be >= 0", "drive.omega_r");
  }
  if (c.model == ModelKind::free_decay || c.model == ModelKind::measured_decay) {
    try {
      c.reservoir.validate();
    } catch (const DomainError& e) {
      throw ConfigError(e.what(), "reservoir");
    }
  }
  if (std::norm(c.initial_system[0]) + std::norm(c.initial_system[1]) <= 0.0) {
    throw ConfigError("initial system state has zero norm", "initial");
  }
  try {
    const ModelSpec model = build_model(c);
    for (const auto& name : resolved_observables(c)) find_observable(model, name);
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), "output.observables");
  }
}

ModelSpec build_model(const RunConfig& c) {
  switch (c.model) {
    case ModelKind::detector: return DetectorMeasurement(c.detector, c.initial_system, c.omega_a);
    case ModelKind::rabi: return RabiMeasured(c.detector, c.drive, c.initial_system);
    case ModelKind::free_decay: return FreeDecay(c.reservoir);
    case ModelKind::measured_decay: return MeasuredDecay(c.reservoir, c.detector);
  }
  throw ConfigError("unknown model", "run.model");
}

std::vector<std::string> resolved_observables(const RunConfig& c) {
  if (!c.observables.empty()) return c.observables;
  return default_observables(build_model(c));
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (int i = 1; i <= 12; ++i) out.push_back("fig" + std::to_string(i));
  return out;
}

bool is_preset(const std::string& name) {
  const auto names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

RunConfig preset(const std::string& name) {
  if (name == "fig1") {
    auto c = detector_preset(name, 2);
    c.observables = {"rho_aa", "rho_ee", "rho_gg"};
    c.trajectory_files = 2;
    return c;
  }
  if (name == "fig2") {
    auto c = detector_preset(name, 1000);
    c.observables = {"rho_aa"};
    return c;
  }
  if (name == "fig3") {
    auto c = detector_preset(name, 1000);
    c.observables = {"coh_re", "coh_im"};
    return c;
  }
  if (name == "fig4") {
    auto c = rabi_preset(name, 1, 0.1, 0.0);
    c.trajectory_files = 1;
    return c;
  }
  if (name == "fig5") return rabi_preset(name, 1000, 0.1, 0.0);
  if (name == "fig6") return rabi_preset(name, 1000, 0.001, 0.2);
  if (name == "fig7") return decay_preset(name, ModelKind::free_decay, 1, 0.0, CouplingTarget::ground);
  if (name == "fig8") return decay_preset(name, ModelKind::free_decay, 1, 2.0, CouplingTarget::ground);
  if (name == "fig9") {
    auto c = decay_preset(name, ModelKind::measured_decay, 1, 0.0, CouplingTarget::ground);
    c.trajectory_files = 1;
    return c;
  }
  if (name == "fig10") return decay_preset(name, ModelKind::measured_decay, 1000, 0.0, CouplingTarget::ground);
  if (name == "fig11") {
    auto c = decay_preset(name, ModelKind::measured_decay, 1, 0.0, CouplingTarget::excited);
    c.trajectory_files = 1;
    return c;
  }
  if (name == "fig12") return decay_preset(name, ModelKind::measured_decay, 1000, 2.0, CouplingTarget::ground);
  throw ConfigError("unknown preset '" + name + "'", "run.preset");
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value, int line) {
  const std::string k = trim(key);
  if (k == "run.preset") {
    const std::string p = trim(value);
    if (!is_preset(p)) throw ConfigError("unknown preset '" + p + "'", k, line);
    config = preset(p);
    return;
  }
  for (const auto& e : entries()) {
    if (e.key == k) {
      e.set(config, k, value, line);
      return;
    }
  }
  throw ConfigError("unknown key '" + k + "'", k, line);
}

RunConfig parse_config(std::istream& in, RunConfig base) {
  RunConfig config = std::move(base);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header", line, line_no);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line, line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string full = section.empty() ? key : section + "." + key;
    apply_setting(config, full, line.substr(eq + 1), line_no);
  }
  return config;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, std::move(base));
}

std::vector<std::pair<std::string, std::string>> settings(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : entries()) out.emplace_back(e.key, e.get(config));
  return out;
}

std::string to_config_text(const RunConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, value] : settings(config)) {
    const auto dot = key.find('.');
    const std::string s = key.substr(0, dot);
    if (s != section) {
      if (!section.empty()) out << '\n';
      out << '[' << s << "]\n";
      section = s;
    }
    out << key.substr(dot + 1) << " = " << value << '\n';
  }
  return out.str();
}

}  // namespace qzeno
