#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qzeno/models.hpp"

namespace qzeno {

using DensityMatrix = Eigen::MatrixXcd;

inline constexpr double kHermiticityTolerance = 1e-8;

// |psi><psi| of a normalized copy of the state.
DensityMatrix pure_density(const StateVector& state);

// max |rho_ij - conj(rho_ji)|
double hermiticity_error(const DensityMatrix& rho);

struct DensitySeries {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  double max_trace_drift = 0.0;
  double max_hermiticity_error = 0.0;
};

// Lindblad equation of system plus detector, with H and the dissipator built
// from operators rather than from the trajectory derivative. Fixed-step RK4 at
// dt/10, sampled every dt starting at t = 0. Throws ToleranceExceeded when
// Hermiticity drifts beyond kHermiticityTolerance.
DensitySeries evolve_master_detector(const DensityMatrix& rho0, const ModelSpec& model, double t_max,
                                     double dt);
DensitySeries evolve_master_detector(const ModelSpec& model, double t_max, double dt);

// Populations and coherence in the (e,a), (e,b), (g,a), (g,b) basis.
double dm_rho_ee(const DensityMatrix& rho);
double dm_rho_gg(const DensityMatrix& rho);
double dm_rho_aa(const DensityMatrix& rho);
Complex dm_coherence(const DensityMatrix& rho);  // rho_eg traced over the detector

struct DetectorElements {
  double time = 0.0;
  Complex aa, bb, ab, ba;
};

// Detector elements driven by the e-g branch of the coupling, from
// rho_bb(0) = 1. RK4 at dt/10, sampled every dt.
std::vector<DetectorElements> detector_reduced_odes(double t_max, double dt, const DetectorParams& params);

struct DecayDensitySeries {
  std::vector<double> times;
  std::vector<double> rho_ee;  // rho_{e0,e0}
  double max_trace_drift = 0.0;
};

// Copy of `res` with n_modes modes over the same band and g0 rescaled by
// sqrt(new spacing / old spacing), which keeps the golden-rule rate fixed.
ReservoirSpec reduced_reservoir(const ReservoirSpec& res, int n_modes);

// Single-excitation density matrix of the decaying system whose e0-gk
// coherences are damped at 1/tau_m (tau_m = infinity gives free decay).
// RK4 with step h, sampled every `sample_every` steps. Throws
// ToleranceExceeded on trace drift above 1e-7.
inline constexpr int kMaxDenseModes = 201;
DecayDensitySeries evolve_measured_decay_dm(const ReservoirSpec& res, double tau_m, double t_max,
                                            double h, int sample_every = 10);

}  // namespace qzeno
