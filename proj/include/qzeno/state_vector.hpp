#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qzeno {

using Complex = std::complex<double>;

enum class SystemLevel : std::uint8_t { excited, ground };
enum class DetectorLevel : std::uint8_t { excited, ground };

// One element of the product basis system (x) reservoir (x) detector.
// `mode` is engaged only for models with a reservoir; the excited system level
// always pairs with the reservoir vacuum, written as kVacuum.
struct BasisLabel {
  static constexpr int kVacuum = -1;

  SystemLevel system = SystemLevel::ground;
  std::optional<int> mode;
  std::optional<DetectorLevel> detector;

  bool is_vacuum() const { return mode && *mode == kVacuum; }
  bool detector_excited() const { return detector && *detector == DetectorLevel::excited; }

  friend bool operator==(const BasisLabel&, const BasisLabel&) = default;
};

std::string to_string(const BasisLabel& label);

using Basis = std::vector<BasisLabel>;

// Trajectory state. The basis is shared and immutable so copying a state only
// copies its amplitudes.
struct StateVector {
  std::vector<Complex> amplitudes;
  std::shared_ptr<const Basis> basis;
  double time = 0.0;

  std::size_t size() const { return amplitudes.size(); }
};

// Below this squared norm a state is treated as numerically dead.
inline constexpr double kUnderflowNorm = 1e-300;

double norm_squared(std::span<const Complex> amplitudes);
double norm_squared(const StateVector& state);

// Scales the amplitudes by one positive real factor so the norm becomes one.
// Throws ZeroNormError when norm_squared <= kUnderflowNorm.
void normalize_in_place(std::span<Complex> amplitudes);
StateVector normalize(StateVector state);

template <typename Predicate>
double subspace_probability(const StateVector& state, Predicate&& predicate) {
  double p = 0.0;
  const Basis& basis = *state.basis;
  for (std::size_t i = 0; i < state.amplitudes.size(); ++i) {
    if (predicate(basis[i])) p += std::norm(state.amplitudes[i]);
  }
  return p;
}

// Builds a state on `basis` and checks that the lengths agree.
StateVector make_state(std::shared_ptr<const Basis> basis, std::vector<Complex> amplitudes,
                       double time = 0.0);

}  // namespace qzeno
