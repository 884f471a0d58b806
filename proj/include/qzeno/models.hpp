#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qzeno/state_vector.hpp"

namespace qzeno {

// Which level of the measured system the detector couples to.
enum class CouplingTarget : std::uint8_t { ground, excited };

// Two-level detecting atom (levels a, b) with decay rate `gamma` and coupling
// `lambda` to the monitored system level. Frequencies are in units with hbar = 1.
struct DetectorParams {
  double gamma = 10.0;
  double lambda = 1.0;
  double omega_d = 1.0;
  CouplingTarget target = CouplingTarget::ground;
};

// Classical drive in the rotating-wave interaction picture.
struct DriveParams {
  double omega_r = 0.0;
  double detuning = 0.0;  // system frequency minus drive frequency
};

// Discretized reservoir: `n_modes` equally spaced frequencies spanning
// [omega_a - half_width, omega_a + half_width] inclusive, with the linear
// coupling profile g(w) = g0 (1 + slope (w - omega_a) / half_width).
struct ReservoirSpec {
  int n_modes = 1001;
  double half_width = 0.5;
  double g0 = 0.001262;
  double slope = 0.0;
  double omega_a = 1.0;

  double spacing() const { return 2.0 * half_width / (n_modes - 1); }
  double density_of_states() const { return 1.0 / spacing(); }
  // w_k - omega_a. Exactly antisymmetric under k -> N-1-k.
  double offset(int k) const {
    return half_width * (2.0 * k - (n_modes - 1)) / static_cast<double>(n_modes - 1);
  }
  // The half nearer zero mirrors the other one, so w_k + w_{N-1-k} == 2 omega_a
  // in floating point whenever |omega_a| >= half_width / 3.
  double frequency(int k) const {
    const int mirror = n_modes - 1 - k;
    const bool base = omega_a >= 0.0 ? k >= mirror : k <= mirror;
    if (base) return omega_a + offset(k);
    return 2.0 * omega_a - (omega_a + offset(mirror));
  }
  double coupling_at(double omega) const {
    return g0 * (1.0 + slope * (omega - omega_a) / half_width);
  }
  double coupling(int k) const { return g0 * (1.0 + slope * offset(k) / half_width); }

  // Throws DomainError on an unusable grid.
  void validate() const;
};

// A model observable evaluated on normalized amplitudes.
struct Observable {
  std::string name;
  std::function<double(std::span<const Complex>)> eval;
  bool is_probability = true;
};

inline const std::array<Complex, 2> kEqualSuperposition{Complex(M_SQRT1_2, 0.0),
                                                        Complex(M_SQRT1_2, 0.0)};
inline const std::array<Complex, 2> kGroundOnly{Complex(0.0, 0.0), Complex(1.0, 0.0)};
inline const std::array<Complex, 2> kExcitedOnly{Complex(1.0, 0.0), Complex(0.0, 0.0)};

// Unperturbed system monitored by the detector. Basis (e,a), (e,b), (g,a), (g,b);
// the system energy omega_a is kept explicitly.
class DetectorMeasurement {
 public:
  explicit DetectorMeasurement(DetectorParams params,
                               std::array<Complex, 2> initial_system = kEqualSuperposition,
                               double omega_a = 1.0);

  const DetectorParams& detector() const { return params_; }
  double omega_a() const { return omega_a_; }
  const std::array<Complex, 2>& initial_system() const { return initial_; }

  std::size_t dimension() const { return 4; }
  const std::shared_ptr<const Basis>& basis() const { return basis_; }
  void derivative(double t, std::span<const Complex> c, std::span<Complex> dc) const;
  StateVector initial_state() const;

 private:
  DetectorParams params_;
  std::array<Complex, 2> initial_;
  double omega_a_;
  std::shared_ptr<const Basis> basis_;
};

// Driven two-level system under measurement, interaction picture, same basis
// as DetectorMeasurement.
class RabiMeasured {
 public:
  RabiMeasured(DetectorParams detector, DriveParams drive,
               std::array<Complex, 2> initial_system = kGroundOnly);

  const DetectorParams& detector() const { return detector_; }
  const DriveParams& drive() const { return drive_; }
  const std::array<Complex, 2>& initial_system() const { return initial_; }

  std::size_t dimension() const { return 4; }
  const std::shared_ptr<const Basis>& basis() const { return basis_; }
  void derivative(double t, std::span<const Complex> c, std::span<Complex> dc) const;
  StateVector initial_state() const;

 private:
  DetectorParams detector_;
  DriveParams drive_;
  std::array<Complex, 2> initial_;
  std::shared_ptr<const Basis> basis_;
};

// Two-level system decaying into the discretized reservoir, interaction
// picture. Basis |e,0>, then |g,k> for k = 0..N-1.
class FreeDecay {
 public:
  explicit FreeDecay(ReservoirSpec reservoir);

  const ReservoirSpec& reservoir() const { return reservoir_; }

  std::size_t dimension() const { return reservoir_.n_modes + 1; }
  const std::shared_ptr<const Basis>& basis() const { return basis_; }
  void derivative(double t, std::span<const Complex> c, std::span<Complex> dc) const;
  StateVector initial_state() const;

 private:
  ReservoirSpec reservoir_;
  std::vector<double> detuning_;  // omega_a - omega_k
  std::vector<double> coupling_;
  std::shared_ptr<const Basis> basis_;
};

// Decaying system plus detector. Basis |e,0,a>, |e,0,b>, then |g,k,a>, |g,k,b>.
class MeasuredDecay {
 public:
  MeasuredDecay(ReservoirSpec reservoir, DetectorParams detector);

  const ReservoirSpec& reservoir() const { return reservoir_; }
  const DetectorParams& detector() const { return detector_; }

  std::size_t dimension() const { return 2 * (reservoir_.n_modes + 1); }
  const std::shared_ptr<const Basis>& basis() const { return basis_; }
  void derivative(double t, std::span<const Complex> c, std::span<Complex> dc) const;
  StateVector initial_state() const;

 private:
  ReservoirSpec reservoir_;
  DetectorParams detector_;
  std::vector<double> detuning_;
  std::vector<double> coupling_;
  std::shared_ptr<const Basis> basis_;
};

using ModelSpec = std::variant<DetectorMeasurement, RabiMeasured, FreeDecay, MeasuredDecay>;

std::string model_kind(const ModelSpec& model);
std::size_t dimension(const ModelSpec& model);
StateVector initial_state(const ModelSpec& model);
// Detector parameters, or nullopt for the detector-free decay model.
std::optional<DetectorParams> detector_params(const ModelSpec& model);
// Rate of the jump operator sqrt(Gamma) sigma_-; zero without a detector.
double jump_rate(const ModelSpec& model);

// Effective-Hamiltonian action: dc = -i H_eff(t) c.
void derivative(const ModelSpec& model, double t, std::span<const Complex> c,
                std::span<Complex> dc);
std::vector<Complex> derivative(const ModelSpec& model, const StateVector& state);

// All observables a model can record, and the names recorded by default.
std::vector<Observable> available_observables(const ModelSpec& model);
std::vector<std::string> default_observables(const ModelSpec& model);
Observable find_observable(const ModelSpec& model, const std::string& name);

// Detector models store each (a, b) pair at adjacent indices (2j, 2j+1).
// These helpers rely on that layout.
double detector_excited_weight(std::span<const Complex> c);
void apply_lowering(std::span<Complex> c);

}  // namespace qzeno
