#pragma once

#include <string>

#include "qzeno/models.hpp"

namespace qzeno {

enum class FormulaId : std::uint8_t {
  golden_rule,
  corrected_free,
  zeno_two_level,
  measured_decay_arctan,
  measured_decay_series,
  anti_zeno_decay,
  laplace_root,
};

std::string to_string(FormulaId id);

struct RatePrediction {
  double rate = 0.0;
  FormulaId formula_id = FormulaId::golden_rule;
  std::string validity_note;  // empty when the formula is used inside its range
};

// Gamma / (2 lambda^2). Throws DivisionByZeroError for lambda = 0.
double measurement_time(double gamma, double lambda);
double measurement_time(const DetectorParams& params);

// exp(-t / tau_m)
double coherence_factor(double t, double tau_m);

// Ground amplitude of the free driven two-level system started in |g>.
Complex rabi_amplitude(double t, const DriveParams& drive);

// (omega_r^2 / 2) tau_m / (1 + (tau_m detuning)^2)
RatePrediction zeno_transition_rate(const DriveParams& drive, double tau_m);

// 1/2 (1 + exp(-2 rate t)) for equal up and down rates.
double rate_equation_population(double t, double rate);

// 2 pi g0^2 / spacing
RatePrediction golden_rule_rate(const ReservoirSpec& res);

// Continuum resolvent H(z) of the band with linear coupling. Throws
// DomainError at the branch points z = +-i half_width.
Complex resolvent(Complex z, const ReservoirSpec& res);

// Golden rule rate with the first correction from the finite band and slope.
RatePrediction corrected_free_decay_rate(const ReservoirSpec& res);

// Gamma0 (2/pi) atan(half_width tau_m); constant coupling only.
RatePrediction measured_decay_rate(const ReservoirSpec& res, double tau_m);
// Gamma0 (1 - (2/pi) / (half_width tau_m)), the large-tau_m expansion.
RatePrediction measured_decay_rate_series(const ReservoirSpec& res, double tau_m);

// Corrected free rate plus Gamma0 (2/pi) (a^2 - 1) / (half_width tau_m).
RatePrediction anti_zeno_rate(const ReservoirSpec& res, double tau_m);

struct QuadratureOptions {
  double rel_tol = 1e-9;
  int max_depth = 15;
};

// 1 / rho~_{e0,e0}(z) of the measured decaying system with coherence damping
// 1/tau_m, from nested adaptive Gauss-Kronrod quadrature over the band.
// Analytic continuation into Re z < 0 is built in. Throws QuadratureFailure
// when the tolerance cannot be met.
Complex laplace_rate_equation_residual(Complex z, const ReservoirSpec& res, double tau_m,
                                       const QuadratureOptions& options = {});

struct RootResult {
  Complex root;
  double residual = 0.0;
  int iterations = 0;
};

// Newton iteration seeded at -Gamma0/2; converged when |residual| < 1e-12 or
// the step falls below 1e-13.
RootResult laplace_root(const ReservoirSpec& res, double tau_m, const QuadratureOptions& options = {});
RatePrediction laplace_decay_rate(const ReservoirSpec& res, double tau_m,
                                  const QuadratureOptions& options = {});

// Root of the continuum resolvent near -Gamma0/2 (free decay).
RootResult resolvent_root(const ReservoirSpec& res);

}  // namespace qzeno
