#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qzeno/models.hpp"
#include "qzeno/rng.hpp"
#include "qzeno/run_config.hpp"

namespace qzeno {

// Jump probabilities above this make the first-order splitting error visible.
inline constexpr double kJumpWarnProbability = 0.1;

struct JumpEvent {
  double time = 0.0;           // grid time t_n at which the collapse was decided
  double pre_jump_norm = 0.0;  // norm of the detector-excited component before collapse
  long long trajectory_id = 0;
};

struct TrajectoryRecord {
  long long trajectory_id = 0;
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // values[i] belongs to names[i]
  std::vector<std::uint8_t> jumped;         // 1 if a jump happened since the previous sample
  std::vector<JumpEvent> jumps;
  std::uint64_t seed_used = 0;
  std::size_t stride = 1;  // integration steps per recorded sample
  double max_jump_probability = 0.0;

  const std::vector<double>& series(const std::string& name) const;
};

// Reusable buffers so stepping does not allocate.
class StepWorkspace {
 public:
  void resize(std::size_t n);

  std::vector<Complex> k1, k2, k3, k4, tmp;
};

// Gamma * dt * P(detector excited). Throws ProbabilityOverflowError above 1.
double jump_probability(std::span<const Complex> amplitudes, const ModelSpec& model, double dt);
double jump_probability(const StateVector& state, const ModelSpec& model, double dt);

// One no-jump step t -> t + dt of the effective-Hamiltonian ODE, renormalized.
void deterministic_step_in_place(std::span<Complex> amplitudes, const ModelSpec& model, double t,
                                 double dt, Integrator integrator, StepWorkspace& work);
StateVector deterministic_step(const StateVector& state, const ModelSpec& model, double dt,
                               Integrator integrator = Integrator::euler);

// Applies sigma_- on the detector and renormalizes. Throws ZeroNormError when
// the detector-excited component is empty or the model has no detector.
void collapse_in_place(std::span<Complex> amplitudes, const ModelSpec& model);
StateVector collapse(const StateVector& state, const ModelSpec& model);

// Recording stride used for a config: at least config.decimation and large
// enough to keep the sample count within kMaxRecordedPoints.
std::size_t recording_stride(const RunConfig& config);

// Runs the three-step jump algorithm from the model's initial state. Samples
// are taken at t = 0 and after every stride-th step.
TrajectoryRecord run_trajectory(const ModelSpec& model, const RunConfig& config, RngStream& stream,
                                long long trajectory_id = 0);
TrajectoryRecord run_trajectory(const ModelSpec& model, const RunConfig& config, StateVector initial,
                                RngStream& stream, long long trajectory_id = 0);

}  // namespace qzeno
