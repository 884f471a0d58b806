#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "qzeno/models.hpp"

namespace qzeno {

enum class Integrator : std::uint8_t { euler, rk4 };
enum class ModelKind : std::uint8_t { detector, rabi, free_decay, measured_decay };

std::string to_string(Integrator integrator);
std::string to_string(ModelKind kind);

inline constexpr std::uint64_t kDefaultSeed = 20030917ULL;
// Upper bound on recorded points per trajectory.
inline constexpr std::size_t kMaxRecordedPoints = 4000;

struct RunConfig {
  std::string name = "custom";
  ModelKind model = ModelKind::detector;
  DetectorParams detector;
  DriveParams drive;
  ReservoirSpec reservoir;
  // Amplitudes (c_e, c_g) of the system; normalized by the model.
  std::array<Complex, 2> initial_system = kEqualSuperposition;
  double omega_a = 1.0;  // system energy of the detector model

  double dt = 0.1;
  double t_max = 30.0;
  int n_trajectories = 1000;
  std::uint64_t master_seed = kDefaultSeed;
  Integrator integrator = Integrator::euler;
  std::vector<std::string> observables;  // empty: model defaults
  std::string output_path = "qzeno_out";
  int decimation = 1;
  int trajectory_files = 0;  // per-trajectory CSVs to write

  // Number of integration steps, t_max / dt rounded to the nearest integer.
  long long n_steps() const;
};

// Throws ConfigError when an invariant fails.
void validate(const RunConfig& config);
ModelSpec build_model(const RunConfig& config);
// Observable names actually recorded.
std::vector<std::string> resolved_observables(const RunConfig& config);

std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
RunConfig preset(const std::string& name);

// Sets one `section.key` entry. Throws ConfigError naming the key (and `line`
// when given) for unknown keys or unparsable values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value,
                   int line = 0);

// Flat key-value text with [sections]. A `preset = figN` entry in [run] must
// come first and resets everything to that preset.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

// All settings as (section.key, value) pairs; feeding them back through
// apply_setting reproduces the config.
std::vector<std::pair<std::string, std::string>> settings(const RunConfig& config);
std::string to_config_text(const RunConfig& config);

}  // namespace qzeno
