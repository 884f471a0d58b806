#include "qzeno/models.hpp"

#include <algorithm>
#include <stdexcept>

#include "qzeno/errors.hpp"

namespace qzeno {
namespace {

constexpr Complex kI{0.0, 1.0};

// Walks e^{i d_k t} across a uniform detuning grid. The phase is recomputed
// exactly from t every kAnchor modes and advanced by one complex multiply in
// between, so nothing is carried from one time step to the next.
class PhaseSweep {
 public:
  PhaseSweep(double t, std::span<const double> detunings) : t_(t), detunings_(detunings) {
    if (detunings.size() > 1) step_ = std::polar(1.0, (detunings[1] - detunings[0]) * t);
  }

  Complex at(std::size_t k) {
    if (k % kAnchor == 0) {
      current_ = std::polar(1.0, detunings_[k] * t_);
    } else {
      current_ *= step_;
    }
    return current_;
  }

 private:
  static constexpr std::size_t kAnchor = 32;
  double t_;
  std::span<const double> detunings_;
  Complex step_{1.0, 0.0};
  Complex current_{1.0, 0.0};
};

std::shared_ptr<const Basis> two_level_detector_basis() {
  static const auto basis = std::make_shared<const Basis>(Basis{
      {SystemLevel::excited, std::nullopt, DetectorLevel::excited},
      {SystemLevel::excited, std::nullopt, DetectorLevel::ground},
      {SystemLevel::ground, std::nullopt, DetectorLevel::excited},
      {SystemLevel::ground, std::nullopt, DetectorLevel::ground},
  });
  return basis;
}

std::shared_ptr<const Basis> reservoir_basis(int n_modes, bool with_detector) {
  auto basis = std::make_shared<Basis>();
  const auto push = [&](SystemLevel s, int mode) {
    if (with_detector) {
      basis->push_back({s, mode, DetectorLevel::excited});
      basis->push_back({s, mode, DetectorLevel::ground});
    } else {
      basis->push_back({s, mode, std::nullopt});
    }
  };
  push(SystemLevel::excited, BasisLabel::kVacuum);
  for (int k = 0; k < n_modes; ++k) push(SystemLevel::ground, k);
  return basis;
}

void check_initial(const std::array<Complex, 2>& amps) {
  const double n2 = std::norm(amps[0]) + std::norm(amps[1]);
  if (!(n2 > kUnderflowNorm)) throw DomainError("initial system state has zero norm");
}

StateVector detector_initial(const std::array<Complex, 2>& system,
                             const std::shared_ptr<const Basis>& basis) {
  // Detector starts in its ground level b.
  StateVector s{{0.0, system[0], 0.0, system[1]}, basis, 0.0};
  return normalize(std::move(s));
}

void validate_detector(const DetectorParams& p) {
  if (!(p.gamma >= 0.0)) throw DomainError("detector gamma must be >= 0");
  if (!(p.lambda >= 0.0)) throw DomainError("detector lambda must be >= 0");
}

}  // namespace

void ReservoirSpec::validate() const {
  if (n_modes < 2) throw DomainError("reservoir needs at least two modes");
  if (!(half_width > 0.0)) throw DomainError("reservoir half-width must be positive");
  if (!std::isfinite(g0) || !std::isfinite(slope) || !std::isfinite(omega_a)) {
    throw DomainError("reservoir parameters must be finite");
  }
}

// ---------------------------------------------------------------------------

DetectorMeasurement::DetectorMeasurement(DetectorParams params,
                                         std::array<Complex, 2> initial_system, double omega_a)
    : params_(params), initial_(initial_system), omega_a_(omega_a),
      basis_(two_level_detector_basis()) {
  validate_detector(params_);
  check_initial(initial_);
}

void DetectorMeasurement::derivative(double /*t*/, std::span<const Complex> c,
                                     std::span<Complex> dc) const {
  const double half_d = 0.5 * params_.omega_d;
  const double half_gamma = 0.5 * params_.gamma;
  const double lam = params_.lambda;
  const Complex ea = c[0], eb = c[1], ga = c[2], gb = c[3];

  dc[0] = -kI * (omega_a_ + half_d) * ea - half_gamma * ea;
  dc[1] = -kI * (omega_a_ - half_d) * eb;
  dc[2] = -kI * half_d * ga - half_gamma * ga;
  dc[3] = kI * half_d * gb;
  if (params_.target == CouplingTarget::ground) {
    dc[2] -= kI * lam * gb;
    dc[3] -= kI * lam * ga;
  } else {
    dc[0] -= kI * lam * eb;
    dc[1] -= kI * lam * ea;
  }
}

StateVector DetectorMeasurement::initial_state() const {
  return detector_initial(initial_, basis_);
}

// ---------------------------------------------------------------------------

RabiMeasured::RabiMeasured(DetectorParams detector, DriveParams drive,
                           std::array<Complex, 2> initial_system)
    : detector_(detector), drive_(drive), initial_(initial_system),
      basis_(two_level_detector_basis()) {
  validate_detector(detector_);
  check_initial(initial_);
  if (!(drive_.omega_r >= 0.0)) throw DomainError("Rabi frequency must be >= 0");
}

void RabiMeasured::derivative(double t, std::span<const Complex> c,
                              std::span<Complex> dc) const {
  const double half_d = 0.5 * detector_.omega_d;
  const double half_gamma = 0.5 * detector_.gamma;
  const double lam = detector_.lambda;
  const Complex drive_up = kI * (0.5 * drive_.omega_r) * std::polar(1.0, drive_.detuning * t);
  const Complex drive_down = kI * (0.5 * drive_.omega_r) * std::polar(1.0, -drive_.detuning * t);
  const Complex ea = c[0], eb = c[1], ga = c[2], gb = c[3];

  dc[0] = drive_up * ga - kI * half_d * ea - half_gamma * ea;
  dc[1] = drive_up * gb + kI * half_d * eb;
  dc[2] = drive_down * ea - kI * half_d * ga - half_gamma * ga;
  dc[3] = drive_down * eb + kI * half_d * gb;
  if (detector_.target == CouplingTarget::ground) {
    dc[2] -= kI * lam * gb;
    dc[3] -= kI * lam * ga;
  } else {
    dc[0] -= kI * lam * eb;
    dc[1] -= kI * lam * ea;
  }
}

StateVector RabiMeasured::initial_state() const { return detector_initial(initial_, basis_); }

// ---------------------------------------------------------------------------

FreeDecay::FreeDecay(ReservoirSpec reservoir) : reservoir_(reservoir) {
  reservoir_.validate();
  detuning_.resize(reservoir_.n_modes);
  coupling_.resize(reservoir_.n_modes);
  for (int k = 0; k < reservoir_.n_modes; ++k) {
    detuning_[k] = -reservoir_.offset(k);
    coupling_[k] = reservoir_.coupling(k);
  }
  basis_ = reservoir_basis(reservoir_.n_modes, false);
}

void FreeDecay::derivative(double t, std::span<const Complex> c, std::span<Complex> dc) const {
  const Complex ce = c[0];
  Complex sum{0.0, 0.0};
  PhaseSweep phase(t, detuning_);
  for (std::size_t k = 0; k < detuning_.size(); ++k) {
    const Complex gp = coupling_[k] * phase.at(k);
    sum += gp * c[k + 1];
    dc[k + 1] = -kI * std::conj(gp) * ce;
  }
  dc[0] = -kI * sum;
}

StateVector FreeDecay::initial_state() const {
  std::vector<Complex> amps(dimension(), Complex{});
  amps[0] = 1.0;
  return StateVector{std::move(amps), basis_, 0.0};
}

// ---------------------------------------------------------------------------

MeasuredDecay::MeasuredDecay(ReservoirSpec reservoir, DetectorParams detector)
    : reservoir_(reservoir), detector_(detector) {
  reservoir_.validate();
  validate_detector(detector_);
  detuning_.resize(reservoir_.n_modes);
  coupling_.resize(reservoir_.n_modes);
  for (int k = 0; k < reservoir_.n_modes; ++k) {
    detuning_[k] = -reservoir_.offset(k);
    coupling_[k] = reservoir_.coupling(k);
  }
  basis_ = reservoir_basis(reservoir_.n_modes, true);
}

void MeasuredDecay::derivative(double t, std::span<const Complex> c,
                               std::span<Complex> dc) const {
  const double half_d = 0.5 * detector_.omega_d;
  const double half_gamma = 0.5 * detector_.gamma;
  const double lam = detector_.lambda;
  const bool ground_coupled = detector_.target == CouplingTarget::ground;
  const Complex ea = c[0], eb = c[1];
  // Per-mode diagonal factors for the a and b detector levels.
  const Complex diag_a = -kI * half_d - half_gamma;
  const Complex diag_b = kI * half_d;
  const Complex hop = ground_coupled ? -kI * lam : Complex{};

  Complex sum_a{0.0, 0.0}, sum_b{0.0, 0.0};
  PhaseSweep phase(t, detuning_);
  for (std::size_t k = 0; k < detuning_.size(); ++k) {
    const std::size_t ia = 2 + 2 * k;
    const Complex ka = c[ia], kb = c[ia + 1];
    const Complex gp = coupling_[k] * phase.at(k);
    const Complex down = -kI * std::conj(gp);
    sum_a += gp * ka;
    sum_b += gp * kb;
    dc[ia] = down * ea + hop * kb + diag_a * ka;
    dc[ia + 1] = down * eb + hop * ka + diag_b * kb;
  }
  dc[0] = -kI * sum_a + diag_a * ea;
  dc[1] = -kI * sum_b + diag_b * eb;
  if (!ground_coupled) {
    dc[0] -= kI * lam * eb;
    dc[1] -= kI * lam * ea;
  }
}

StateVector MeasuredDecay::initial_state() const {
  std::vector<Complex> amps(dimension(), Complex{});
  amps[1] = 1.0;  // |e,0,b>
  return StateVector{std::move(amps), basis_, 0.0};
}

// ---------------------------------------------------------------------------

std::string model_kind(const ModelSpec& model) {
  struct Visitor {
    std::string operator()(const DetectorMeasurement&) const { return "detector"; }
    std::string operator()(const RabiMeasured&) const { return "rabi"; }
    std::string operator()(const FreeDecay&) const { return "free_decay"; }
    std::string operator()(const MeasuredDecay&) const { return "measured_decay"; }
  };
  return std::visit(Visitor{}, model);
}

std::size_t dimension(const ModelSpec& model) {
  return std::visit([](const auto& m) { return m.dimension(); }, model);
}

StateVector initial_state(const ModelSpec& model) {
  return std::visit([](const auto& m) { return m.initial_state(); }, model);
}

std::optional<DetectorParams> detector_params(const ModelSpec& model) {
  if (std::holds_alternative<FreeDecay>(model)) return std::nullopt;
  return std::visit(
      [](const auto& m) -> std::optional<DetectorParams> {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, FreeDecay>) {
          return std::nullopt;
        } else {
          return m.detector();
        }
      },
      model);
}

double jump_rate(const ModelSpec& model) {
  const auto det = detector_params(model);
  return det ? det->gamma : 0.0;
}

void derivative(const ModelSpec& model, double t, std::span<const Complex> c,
                std::span<Complex> dc) {
  std::visit([&](const auto& m) { m.derivative(t, c, dc); }, model);
}

std::vector<Complex> derivative(const ModelSpec& model, const StateVector& state) {
  std::vector<Complex> out(state.size());
  derivative(model, state.time, state.amplitudes, out);
  return out;
}

double detector_excited_weight(std::span<const Complex> c) {
  double w = 0.0;
  for (std::size_t i = 0; i + 1 < c.size(); i += 2) w += std::norm(c[i]);
  return w;
}

void apply_lowering(std::span<Complex> c) {
  for (std::size_t i = 0; i + 1 < c.size(); i += 2) {
    c[i + 1] = c[i];
    c[i] = Complex{};
  }
}

std::vector<Observable> available_observables(const ModelSpec& model) {
  using Amps = std::span<const Complex>;
  std::vector<Observable> out;
  if (std::holds_alternative<DetectorMeasurement>(model) ||
      std::holds_alternative<RabiMeasured>(model)) {
    out.push_back({"rho_ee", [](Amps c) { return std::norm(c[0]) + std::norm(c[1]); }});
    out.push_back({"rho_gg", [](Amps c) { return std::norm(c[2]) + std::norm(c[3]); }});
    out.push_back({"rho_aa", [](Amps c) { return std::norm(c[0]) + std::norm(c[2]); }});
    out.push_back({"rho_bb", [](Amps c) { return std::norm(c[1]) + std::norm(c[3]); }});
    // System coherence rho_eg = sum over detector levels of c_e c_g^*.
    out.push_back({"coh_re",
                   [](Amps c) { return (c[0] * std::conj(c[2]) + c[1] * std::conj(c[3])).real(); },
                   false});
    out.push_back({"coh_im",
                   [](Amps c) { return (c[0] * std::conj(c[2]) + c[1] * std::conj(c[3])).imag(); },
                   false});
  } else if (std::holds_alternative<FreeDecay>(model)) {
    out.push_back({"rho_ee", [](Amps c) { return std::norm(c[0]); }});
    out.push_back({"rho_gg", [](Amps c) { return norm_squared(c.subspan(1)); }});
  } else {
    out.push_back({"rho_ee", [](Amps c) { return std::norm(c[0]) + std::norm(c[1]); }});
    out.push_back({"rho_gg", [](Amps c) { return norm_squared(c.subspan(2)); }});
    out.push_back({"rho_aa", [](Amps c) { return detector_excited_weight(c); }});
  }
  return out;
}

std::vector<std::string> default_observables(const ModelSpec& model) {
  struct Visitor {
    std::vector<std::string> operator()(const DetectorMeasurement&) const {
      return {"rho_aa", "rho_ee", "rho_gg", "coh_re", "coh_im"};
    }
    std::vector<std::string> operator()(const RabiMeasured&) const {
      return {"rho_gg", "rho_ee", "rho_aa"};
    }
    std::vector<std::string> operator()(const FreeDecay&) const { return {"rho_ee"}; }
    std::vector<std::string> operator()(const MeasuredDecay&) const {
      return {"rho_ee", "rho_aa"};
    }
  };
  return std::visit(Visitor{}, model);
}

Observable find_observable(const ModelSpec& model, const std::string& name) {
  for (auto& obs : available_observables(model)) {
    if (obs.name == name) return obs;
  }
  throw DomainError("model '" + model_kind(model) + "' has no observable '" + name + "'");
}

}  // namespace qzeno
