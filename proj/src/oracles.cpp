#include "qzeno/oracles.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qzeno/errors.hpp"

namespace qzeno {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

double gamma0(const ReservoirSpec& res) { return 2.0 * kPi * res.g0 * res.g0 * res.density_of_states(); }

// Logarithm with its cut on the negative imaginary axis, arg in (-pi/2, 3pi/2].
Complex log_upper(Complex w) {
  double arg = std::arg(w);
  if (arg <= -kPi / 2) arg += 2 * kPi;
  return {std::log(std::abs(w)), arg};
}

struct Integral {
  Complex value;
  double error = 0.0;
  double l1 = 0.0;
};

// With abs_goal > 0 the requested relative tolerance is derived from a coarse
// L1 estimate, so short pieces with tiny integrands do not chase round-off.
template <typename F>
Integral integrate(F&& f, double lo, double hi, const QuadratureOptions& opt, double abs_goal = 0.0) {
  using Quad = boost::math::quadrature::gauss_kronrod<double, 15>;
  double tol = 0.1 * opt.rel_tol;
  if (abs_goal > 0.0) {
    double coarse_error = 0.0, coarse_l1 = 0.0;
    Quad::integrate(f, lo, hi, 0, 1.0, &coarse_error, &coarse_l1);
    if (coarse_l1 > 0.0) tol = std::clamp(abs_goal / coarse_l1, 1e-14, 1e-3);
  }
  Integral out;
  out.value = Quad::integrate(f, lo, hi, opt.max_depth, tol, &out.error, &out.l1);
  if (!std::isfinite(out.value.real()) || !std::isfinite(out.value.imag())) {
    throw QuadratureFailure("non-finite quadrature result");
  }
  return out;
}

// Error measured against `scale`, the magnitude of the quantity the integral
// feeds into.
void require_tolerance(double error, double scale, const QuadratureOptions& opt) {
  if (error > opt.rel_tol * scale) {
    throw QuadratureFailure("quadrature tolerance not reached (error " + fmt(error) + ", scale " +
                            fmt(scale) + ")");
  }
}

template <typename F>
RootResult newton(F&& f, Complex z) {
  RootResult out;
  constexpr double h = 1e-7;
  for (int it = 1; it <= 60; ++it) {
    const Complex r = f(z);
    const Complex dr = (f(z + h) - f(z - h)) / (2.0 * h);
    if (std::abs(dr) == 0.0) throw DomainError("Newton iteration hit a zero derivative");
    const Complex step = r / dr;
    z -= step;
    out.iterations = it;
    if (std::abs(r) < 1e-12 || std::abs(step) < 1e-13) break;
  }
  out.root = z;
  out.residual = std::abs(f(z));
  return out;
}

}  // namespace

std::string to_string(FormulaId id) {
  switch (id) {
    case FormulaId::golden_rule: return "golden_rule";
    case FormulaId::corrected_free: return "corrected_free";
    case FormulaId::zeno_two_level: return "zeno_two_level";
    case FormulaId::measured_decay_arctan: return "measured_decay_arctan";
    case FormulaId::measured_decay_series: return "measured_decay_series";
    case FormulaId::anti_zeno_decay: return "anti_zeno_decay";
    case FormulaId::laplace_root: return "laplace_root";
  }
  return "unknown";
}

double measurement_time(double gamma, double lambda) {
  if (lambda == 0.0) throw DivisionByZeroError("lambda = 0: the measurement never completes");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  return gamma / (2.0 * lambda * lambda);
}

double measurement_time(const DetectorParams& p) { return measurement_time(p.gamma, p.lambda); }

double coherence_factor(double t, double tau_m) {
  if (!(tau_m > 0.0)) throw DomainError("tau_m must be positive");
  return std::exp(-t / tau_m);
}

Complex rabi_amplitude(double t, const DriveParams& drive) {
  const double dw = drive.detuning;
  const double w = std::hypot(drive.omega_r, dw);
  if (w == 0.0) return 1.0;
  const double half = 0.5 * w * t;
  return std::polar(1.0, -0.5 * dw * t) * Complex(std::cos(half), dw / w * std::sin(half));
}

RatePrediction zeno_transition_rate(const DriveParams& drive, double tau_m) {
  if (!(tau_m > 0.0)) throw DomainError("tau_m must be positive");
  const double x = tau_m * drive.detuning;
  RatePrediction p{0.5 * drive.omega_r * drive.omega_r * tau_m / (1.0 + x * x),
                   FormulaId::zeno_two_level, {}};
  // Overdamped regime of the Bloch equations: omega_r * tau_m well below 1/2.
  if (drive.omega_r * tau_m >= 0.25) p.validity_note = "omega_r*tau_m = " + fmt(drive.omega_r * tau_m) + ", needs << 0.5";
  return p;
}

double rate_equation_population(double t, double rate) {
  return 0.5 * (1.0 + std::exp(-2.0 * rate * t));
}

RatePrediction golden_rule_rate(const ReservoirSpec& res) {
  res.validate();
  return {gamma0(res), FormulaId::golden_rule, {}};
}

Complex resolvent(Complex z, const ReservoirSpec& res) {
  res.validate();
  const double lam = res.half_width;
  const Complex x = z / lam;
  if (std::abs(x - kI) < 1e-14 || std::abs(x + kI) < 1e-14) {
    throw DomainError("resolvent evaluated at a branch point z = +-i*half_width");
  }
  const double a = res.slope;
  const Complex at = std::atan(x);
  const double scale = kPi * res.density_of_states() * res.g0 * res.g0;
  return z + scale * (1.0 - 2.0 / kPi * at +
                      (a * a * x - 2.0 * kI * a) * (2.0 / kPi - x + 2.0 / kPi * x * at));
}

RatePrediction corrected_free_decay_rate(const ReservoirSpec& res) {
  res.validate();
  const double g = gamma0(res);
  const double eps = g / (kPi * res.half_width);
  RatePrediction p{g * (1.0 - eps * (5.0 * res.slope * res.slope - 1.0)), FormulaId::corrected_free, {}};
  if (eps > 0.1) p.validity_note = "gamma0/(pi*half_width) = " + fmt(eps) + ", needs << 1";
  return p;
}

RatePrediction measured_decay_rate(const ReservoirSpec& res, double tau_m) {
  res.validate();
  if (!(tau_m > 0.0)) throw DomainError("tau_m must be positive");
  if (res.slope != 0.0) throw DomainError("the arctan form holds for constant coupling (slope 0)");
  return {gamma0(res) * 2.0 / kPi * std::atan(res.half_width * tau_m), FormulaId::measured_decay_arctan, {}};
}

RatePrediction measured_decay_rate_series(const ReservoirSpec& res, double tau_m) {
  res.validate();
  if (!(tau_m > 0.0)) throw DomainError("tau_m must be positive");
  const double x = res.half_width * tau_m;
  RatePrediction p{gamma0(res) * (1.0 - 2.0 / kPi / x), FormulaId::measured_decay_series, {}};
  if (x < 5.0) p.validity_note = "half_width*tau_m = " + fmt(x) + ", series marginal";
  return p;
}

RatePrediction anti_zeno_rate(const ReservoirSpec& res, double tau_m) {
  if (!(tau_m > 0.0)) throw DomainError("tau_m must be positive");
  const auto free = corrected_free_decay_rate(res);
  const double x = res.half_width * tau_m;
  const double a2 = res.slope * res.slope;
  RatePrediction p{free.rate + gamma0(res) * 2.0 / kPi * (a2 - 1.0) / x, FormulaId::anti_zeno_decay,
                   free.validity_note};
  if (x < 5.0) {
    if (!p.validity_note.empty()) p.validity_note += "; ";
    p.validity_note += "half_width*tau_m = " + fmt(x) + ", series marginal";
  }
  return p;
}

Complex laplace_rate_equation_residual(Complex z, const ReservoirSpec& res, double tau_m,
                                       const QuadratureOptions& opt) {
  res.validate();
  if (!(tau_m > 0.0)) throw DomainError("tau_m must be positive");
  const double lam = res.half_width;
  const double rho0 = res.density_of_states();
  const double damp = 1.0 / tau_m;
  // rho0 g(w)^2 as a function of the detuning d = w - omega_a
  const auto G = [&](double d) {
    const double g = res.coupling_at(res.omega_a + d);
    return rho0 * g * g;
  };
  const auto A = [&](double d) { return 1.0 / (z + kI * d + damp); };
  const auto B = [&](double d) { return 1.0 / (z - kI * d + damp); };

  const Integral single = integrate([&](double d) { return G(d) * (A(d) + B(d)); }, -lam, lam, opt);
  require_tolerance(single.error, std::max(std::abs(single.value), single.l1), opt);

  const auto inner = [&](double d) {
    const Complex ad = A(d);
    const auto F = [&](double dp) {
      const Complex s = ad + B(dp);
      return G(dp) * s * s;
    };
    const Complex fd = F(d);
    // Subtract F(d) so the kernel 1/(z + i(d - dp)) only meets a vanishing
    // numerator; the subtracted piece is integrated in closed form.
    const auto reg = [&](double dp) {
      if (dp == d) return Complex{};
      return (F(dp) - fd) / (z + kI * (d - dp));
    };
    const Complex kernel = kI * (log_upper(lam - d + kI * z) - log_upper(-lam - d + kI * z));
    const double goal = 0.05 * opt.rel_tol * std::abs(fd * kernel);
    Complex part{};
    double error = 0.0, l1 = 0.0;
    for (const auto& [lo, hi] : {std::pair{-lam, d}, std::pair{d, lam}}) {
      if (hi <= lo) continue;
      const Integral piece = integrate(reg, lo, hi, opt, goal);
      part += piece.value;
      error += piece.error;
      l1 += piece.l1;
    }
    const Complex total = part + fd * kernel;
    require_tolerance(error, std::max({std::abs(total), std::abs(fd * kernel), l1}), opt);
    return G(d) * total;
  };
  const Integral dbl = integrate(inner, -lam, lam, opt);
  require_tolerance(dbl.error, std::max(std::abs(dbl.value), dbl.l1), opt);
  return z + single.value - dbl.value;
}

RootResult laplace_root(const ReservoirSpec& res, double tau_m, const QuadratureOptions& opt) {
  return newton([&](Complex z) { return laplace_rate_equation_residual(z, res, tau_m, opt); },
                Complex(-0.5 * gamma0(res), 0.0));
}

RatePrediction laplace_decay_rate(const ReservoirSpec& res, double tau_m, const QuadratureOptions& opt) {
  const RootResult r = laplace_root(res, tau_m, opt);
  RatePrediction p{-r.root.real(), FormulaId::laplace_root, {}};
  if (r.residual > 1e-9) p.validity_note = "residual " + fmt(r.residual) + " at root";
  return p;
}

RootResult resolvent_root(const ReservoirSpec& res) {
  return newton([&](Complex z) { return resolvent(z, res); }, Complex(-0.5 * gamma0(res), 0.0));
}

}  // namespace qzeno
