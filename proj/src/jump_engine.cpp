#include "qzeno/jump_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qzeno/errors.hpp"

namespace qzeno {
namespace {

std::string at_time(double t) {
  std::ostringstream out;
  out.precision(10);
  out << " at t = " << t;
  return out.str();
}

void axpy(std::span<Complex> out, std::span<const Complex> x, double h, std::span<const Complex> k) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + h * k[i];
}

}  // namespace

const std::vector<double>& TrajectoryRecord::series(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  throw DomainError("trajectory has no observable '" + name + "'");
}

void StepWorkspace::resize(std::size_t n) {
  for (auto* v : {&k1, &k2, &k3, &k4, &tmp}) v->resize(n);
}

double jump_probability(std::span<const Complex> amplitudes, const ModelSpec& model, double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  const double gamma = jump_rate(model);
  if (gamma == 0.0) return 0.0;
  const double p = gamma * dt * detector_excited_weight(amplitudes);
  if (p > 1.0) {
    throw ProbabilityOverflowError("jump probability " + std::to_string(p) +
                                   " exceeds 1; reduce dt");
  }
  return p;
}

double jump_probability(const StateVector& state, const ModelSpec& model, double dt) {
  return jump_probability(state.amplitudes, model, dt);
}

void deterministic_step_in_place(std::span<Complex> c, const ModelSpec& model, double t, double dt,
                                 Integrator integrator, StepWorkspace& w) {
  const std::size_t n = c.size();
  if (w.k1.size() != n) w.resize(n);
  if (integrator == Integrator::euler) {
    derivative(model, t, c, w.k1);
    for (std::size_t i = 0; i < n; ++i) c[i] += dt * w.k1[i];
  } else {
    const double h2 = 0.5 * dt;
    derivative(model, t, c, w.k1);
    axpy(w.tmp, c, h2, w.k1);
    derivative(model, t + h2, w.tmp, w.k2);
    axpy(w.tmp, c, h2, w.k2);
    derivative(model, t + h2, w.tmp, w.k3);
    axpy(w.tmp, c, dt, w.k3);
    derivative(model, t + dt, w.tmp, w.k4);
    const double h6 = dt / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
      c[i] += h6 * (w.k1[i] + 2.0 * (w.k2[i] + w.k3[i]) + w.k4[i]);
    }
  }
  normalize_in_place(c);
}

StateVector deterministic_step(const StateVector& state, const ModelSpec& model, double dt,
                               Integrator integrator) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  StateVector out = state;
  StepWorkspace work;
  deterministic_step_in_place(out.amplitudes, model, state.time, dt, integrator, work);
  out.time = state.time + dt;
  return out;
}

void collapse_in_place(std::span<Complex> c, const ModelSpec& model) {
  if (!detector_params(model)) throw ZeroNormError("model has no jump operator");
  apply_lowering(c);
  normalize_in_place(c);
}

StateVector collapse(const StateVector& state, const ModelSpec& model) {
  StateVector out = state;
  collapse_in_place(out.amplitudes, model);
  return out;
}

std::size_t recording_stride(const RunConfig& config) {
  const auto steps = static_cast<std::size_t>(config.n_steps());
  std::size_t stride = static_cast<std::size_t>(config.decimation);
  // Samples: t = 0 plus floor(steps / stride).
  while (steps / stride + 1 > kMaxRecordedPoints) ++stride;
  return stride;
}

TrajectoryRecord run_trajectory(const ModelSpec& model, const RunConfig& config, RngStream& stream,
                                long long trajectory_id) {
  return run_trajectory(model, config, initial_state(model), stream, trajectory_id);
}

TrajectoryRecord run_trajectory(const ModelSpec& model, const RunConfig& config, StateVector initial,
                                RngStream& stream, long long trajectory_id) {
  if (!(config.dt > 0.0)) throw DomainError("dt must be positive");
  if (!(config.t_max >= config.dt)) throw DomainError("t_max must be at least dt");
  if (initial.size() != dimension(model)) throw DomainError("initial state has the wrong dimension");

  std::vector<Observable> observables;
  for (const auto& name : resolved_observables(config)) {
    observables.push_back(find_observable(model, name));
  }

  const long long steps = config.n_steps();
  const std::size_t stride = recording_stride(config);
  const std::size_t samples = static_cast<std::size_t>(steps) / stride + 1;

  TrajectoryRecord rec;
  rec.trajectory_id = trajectory_id;
  rec.seed_used = stream.seed_used();
  rec.stride = stride;
  rec.times.reserve(samples);
  rec.jumped.reserve(samples);
  for (const auto& obs : observables) {
    rec.names.push_back(obs.name);
    rec.values.emplace_back().reserve(samples);
  }

  std::vector<Complex> c = std::move(initial.amplitudes);
  normalize_in_place(c);
  const auto record = [&](double t, bool jumped) {
    rec.times.push_back(t);
    rec.jumped.push_back(jumped ? 1 : 0);
    for (std::size_t i = 0; i < observables.size(); ++i) rec.values[i].push_back(observables[i].eval(c));
  };
  record(0.0, false);

  StepWorkspace work;
  work.resize(c.size());
  const double dt = config.dt;
  bool jumped_since_sample = false;
  for (long long n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    double p = 0.0;
    try {
      p = jump_probability(c, model, dt);
    } catch (const ProbabilityOverflowError& e) {
      throw ProbabilityOverflowError(e.what() + at_time(t));
    }
    rec.max_jump_probability = std::max(rec.max_jump_probability, p);
    const double r = stream.uniform();
    try {
      if (p > r) {
        rec.jumps.push_back({t, std::sqrt(detector_excited_weight(c)), trajectory_id});
        collapse_in_place(c, model);
        jumped_since_sample = true;
      } else {
        deterministic_step_in_place(c, model, t, dt, config.integrator, work);
      }
    } catch (const ZeroNormError& e) {
      throw ZeroNormError(e.what() + at_time(t));
    }
    if ((n + 1) % static_cast<long long>(stride) == 0) {
      record(static_cast<double>(n + 1) * dt, jumped_since_sample);
      jumped_since_sample = false;
    }
  }
  return rec;
}

}  // namespace qzeno
