#include "qzeno/dm_reference.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "qzeno/errors.hpp"

namespace qzeno {
namespace {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
constexpr Complex kI{0.0, 1.0};

Mat ket_bra(int dim, int i, int j) {
  Mat m = Mat::Zero(dim, dim);
  m(i, j) = 1.0;
  return m;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// System index 0 = e, 1 = g; detector index 0 = a, 1 = b.
struct DetectorOperators {
  Mat h_static;
  Mat drive_up;  // |e><g| (x) 1, multiplied by -(omega_r/2) e^{i detuning t}
  double omega_r = 0.0;
  double detuning = 0.0;
  Mat lowering;  // 1 (x) |b><a|
  double gamma = 0.0;
};

DetectorOperators build_operators(const ModelSpec& model) {
  const Mat id2 = Mat::Identity(2, 2);
  const Mat proj_e = ket_bra(2, 0, 0), proj_g = ket_bra(2, 1, 1);
  const Mat sigma_z = ket_bra(2, 0, 0) - ket_bra(2, 1, 1);
  const Mat sigma_x = ket_bra(2, 0, 1) + ket_bra(2, 1, 0);

  DetectorParams det;
  double omega_a = 0.0;
  DetectorOperators ops;
  if (const auto* m = std::get_if<DetectorMeasurement>(&model)) {
    det = m->detector();
    omega_a = m->omega_a();
  } else if (const auto* m = std::get_if<RabiMeasured>(&model)) {
    det = m->detector();
    ops.omega_r = m->drive().omega_r;
    ops.detuning = m->drive().detuning;
  } else {
    throw DomainError("the four-level master equation needs a detector or Rabi model");
  }
  const Mat h_a = omega_a * kron(proj_e, id2);
  const Mat h_d = 0.5 * det.omega_d * kron(id2, sigma_z);
  const Mat h_i = det.lambda * kron(det.target == CouplingTarget::ground ? proj_g : proj_e, sigma_x);
  ops.h_static = h_a + h_d + h_i;
  ops.drive_up = kron(ket_bra(2, 0, 1), id2);
  ops.lowering = kron(id2, ket_bra(2, 1, 0));
  ops.gamma = det.gamma;
  return ops;
}

Mat lindblad_rhs(const DetectorOperators& ops, double t, const Mat& rho) {
  Mat h = ops.h_static;
  if (ops.omega_r != 0.0) {
    const Mat v = -0.5 * ops.omega_r * std::polar(1.0, ops.detuning * t) * ops.drive_up;
    h += v + v.adjoint();
  }
  const Mat& l = ops.lowering;
  const Mat ldl = l.adjoint() * l;
  return -kI * (h * rho - rho * h) +
         ops.gamma * (l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl));
}

template <typename State, typename Rhs>
State rk4(const State& y, double t, double h, Rhs&& f) {
  const State k1 = f(t, y);
  const State k2 = f(t + 0.5 * h, State(y + 0.5 * h * k1));
  const State k3 = f(t + 0.5 * h, State(y + 0.5 * h * k2));
  const State k4 = f(t + h, State(y + h * k3));
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

long long steps_for(double t_max, double dt) {
  if (!(dt > 0.0) || !(t_max >= 0.0)) throw DomainError("need dt > 0 and t_max >= 0");
  return std::llround(t_max / dt);
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

}  // namespace

DensityMatrix pure_density(const StateVector& state) {
  const StateVector s = normalize(state);
  Vec psi(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) psi(static_cast<Eigen::Index>(i)) = s.amplitudes[i];
  return psi * psi.adjoint();
}

double hermiticity_error(const DensityMatrix& rho) { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }

DensitySeries evolve_master_detector(const DensityMatrix& rho0, const ModelSpec& model, double t_max,
                                     double dt) {
  if (rho0.rows() != 4 || rho0.cols() != 4) throw DomainError("density matrix must be 4x4");
  const DetectorOperators ops = build_operators(model);
  const long long samples = steps_for(t_max, dt);
  constexpr int kSub = 10;
  const double h = dt / kSub;
  const auto f = [&](double t, const Mat& r) { return lindblad_rhs(ops, t, r); };

  DensitySeries out;
  Mat rho = rho0;
  const double trace0 = rho.trace().real();
  const auto record = [&](double t) {
    const double herm = hermiticity_error(rho);
    if (herm > kHermiticityTolerance) {
      throw ToleranceExceeded("Hermiticity error " + fmt(herm) + " at t = " + fmt(t));
    }
    out.max_hermiticity_error = std::max(out.max_hermiticity_error, herm);
    out.max_trace_drift = std::max(out.max_trace_drift, std::abs(rho.trace().real() - trace0));
    out.times.push_back(t);
    out.states.push_back(rho);
  };
  record(0.0);
  for (long long n = 0; n < samples; ++n) {
    for (int s = 0; s < kSub; ++s) {
      const double t = n * dt + s * h;
      rho = rk4(rho, t, h, f);
    }
    record((n + 1) * dt);
  }
  return out;
}

DensitySeries evolve_master_detector(const ModelSpec& model, double t_max, double dt) {
  return evolve_master_detector(pure_density(initial_state(model)), model, t_max, dt);
}

double dm_rho_ee(const DensityMatrix& rho) { return (rho(0, 0) + rho(1, 1)).real(); }
double dm_rho_gg(const DensityMatrix& rho) { return (rho(2, 2) + rho(3, 3)).real(); }
double dm_rho_aa(const DensityMatrix& rho) { return (rho(0, 0) + rho(2, 2)).real(); }
Complex dm_coherence(const DensityMatrix& rho) { return rho(0, 2) + rho(1, 3); }

std::vector<DetectorElements> detector_reduced_odes(double t_max, double dt, const DetectorParams& p) {
  using V4 = Eigen::Vector4cd;  // aa, bb, ab, ba
  const long long samples = steps_for(t_max, dt);
  const double lam = p.lambda, gam = p.gamma, wd = p.omega_d;
  const auto f = [&](double, const V4& y) {
    V4 d;
    d(0) = kI * lam * y(2) - gam * y(0);
    d(1) = kI * lam * y(3) + gam * y(0);
    d(2) = -kI * wd * y(2) + kI * lam * y(0) - 0.5 * gam * y(2);
    d(3) = kI * wd * y(3) + kI * lam * y(1) - 0.5 * gam * y(3);
    return d;
  };
  constexpr int kSub = 10;
  const double h = dt / kSub;
  V4 y(0.0, 1.0, 0.0, 0.0);
  std::vector<DetectorElements> out;
  out.push_back({0.0, y(0), y(1), y(2), y(3)});
  for (long long n = 0; n < samples; ++n) {
    for (int s = 0; s < kSub; ++s) y = rk4(y, n * dt + s * h, h, f);
    out.push_back({(n + 1) * dt, y(0), y(1), y(2), y(3)});
  }
  return out;
}

ReservoirSpec reduced_reservoir(const ReservoirSpec& res, int n_modes) {
  ReservoirSpec out = res;
  out.n_modes = n_modes;
  out.validate();
  out.g0 = res.g0 * std::sqrt(out.spacing() / res.spacing());
  return out;
}

DecayDensitySeries evolve_measured_decay_dm(const ReservoirSpec& res, double tau_m, double t_max,
                                            double h, int sample_every) {
  res.validate();
  if (res.n_modes > kMaxDenseModes) {
    throw DomainError("dense decay density matrix supports at most " + std::to_string(kMaxDenseModes) +
                      " modes");
  }
  if (!(tau_m > 0.0)) throw DomainError("tau_m must be positive");
  if (sample_every < 1) throw DomainError("sample_every must be >= 1");
  const long long steps = steps_for(t_max, h);
  const int n = res.n_modes;
  const double damp = std::isinf(tau_m) ? 0.0 : 1.0 / tau_m;

  std::vector<double> w(n);  // omega_k - omega_a
  std::vector<double> g(n);
  for (int k = 0; k < n; ++k) {
    w[k] = res.offset(k);
    g[k] = res.coupling(k);
  }

  // Flat layout: [rho_{e0,e0}, rho_{e0,gk} (n), rho_{gk,gk'} (n x n, row-major)].
  // Couplings are real, so g(k)^* = g(k).
  const std::size_t nn = static_cast<std::size_t>(n);
  const std::size_t size = 1 + nn + nn * nn;
  const auto f = [&](const std::vector<Complex>& y, std::vector<Complex>& d) {
    const Complex ee = y[0];
    const Complex* eg = &y[1];
    const Complex* gg = &y[1 + nn];
    Complex* deg = &d[1];
    Complex* dgg = &d[1 + nn];
    Complex dee{};
    for (std::size_t k = 0; k < nn; ++k) dee += g[k] * (std::conj(eg[k]) - eg[k]);
    d[0] = -kI * dee;
    for (std::size_t k = 0; k < nn; ++k) {
      const Complex ge_k = std::conj(eg[k]);
      const Complex* row = gg + k * nn;
      Complex* drow = dgg + k * nn;
      for (std::size_t l = 0; l < nn; ++l) {
        drow[l] = -kI * ((w[k] - w[l]) * row[l] + g[k] * eg[l] - ge_k * g[l]);
      }
    }
    for (std::size_t k = 0; k < nn; ++k) deg[k] = (kI * w[k] - damp) * eg[k] + kI * ee * g[k];
    // - i sum_k' g(k') rho_{gk',gk}
    for (std::size_t kp = 0; kp < nn; ++kp) {
      const Complex c = -kI * g[kp];
      const Complex* row = gg + kp * nn;
      for (std::size_t k = 0; k < nn; ++k) deg[k] += c * row[k];
    }
  };

  std::vector<Complex> y(size, Complex{}), k1(size), k2(size), k3(size), k4(size), tmp(size);
  y[0] = 1.0;
  DecayDensitySeries out;
  const auto record = [&](double t) {
    double trace = y[0].real();
    for (std::size_t k = 0; k < nn; ++k) trace += y[1 + nn + k * nn + k].real();
    const double drift = std::abs(trace - 1.0);
    if (drift > 1e-7) throw ToleranceExceeded("trace drift " + fmt(drift) + " at t = " + fmt(t));
    out.max_trace_drift = std::max(out.max_trace_drift, drift);
    out.times.push_back(t);
    out.rho_ee.push_back(y[0].real());
  };
  record(0.0);
  const auto step_to = [&](const std::vector<Complex>& k, double c) {
    for (std::size_t i = 0; i < size; ++i) tmp[i] = y[i] + c * k[i];
  };
  // The equations are autonomous, so RK4 needs no stage times.
  for (long long s = 0; s < steps; ++s) {
    f(y, k1);
    step_to(k1, 0.5 * h);
    f(tmp, k2);
    step_to(k2, 0.5 * h);
    f(tmp, k3);
    step_to(k3, h);
    f(tmp, k4);
    for (std::size_t i = 0; i < size; ++i) y[i] += (h / 6.0) * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    if ((s + 1) % sample_every == 0) record((s + 1) * h);
  }
  return out;
}

}  // namespace qzeno
