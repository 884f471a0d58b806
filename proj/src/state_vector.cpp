#include "qzeno/state_vector.hpp"

#include <cmath>
#include <sstream>

#include "qzeno/errors.hpp"

namespace qzeno {

std::string to_string(const BasisLabel& label) {
  std::ostringstream out;
  out << '|' << (label.system == SystemLevel::excited ? 'e' : 'g');
  if (label.mode) {
    if (*label.mode == BasisLabel::kVacuum) {
      out << ",0";
    } else {
      out << ",k" << *label.mode;
    }
  }
  if (label.detector) out << ',' << (*label.detector == DetectorLevel::excited ? 'a' : 'b');
  out << '>';
  return out.str();
}

double norm_squared(std::span<const Complex> amplitudes) {
  double sum = 0.0;
  for (const Complex& c : amplitudes) sum += std::norm(c);
  return sum;
}

double norm_squared(const StateVector& state) { return norm_squared(state.amplitudes); }

void normalize_in_place(std::span<Complex> amplitudes) {
  const double n2 = norm_squared(amplitudes);
  if (!(n2 > kUnderflowNorm)) {
    throw ZeroNormError("state norm underflow (norm^2 = " + std::to_string(n2) + ")");
  }
  const double scale = 1.0 / std::sqrt(n2);
  for (Complex& c : amplitudes) c *= scale;
}

StateVector normalize(StateVector state) {
  normalize_in_place(state.amplitudes);
  return state;
}

StateVector make_state(std::shared_ptr<const Basis> basis, std::vector<Complex> amplitudes,
                       double time) {
  if (!basis || basis->size() != amplitudes.size()) {
    throw DomainError("state amplitudes do not match the basis dimension");
  }
  return StateVector{std::move(amplitudes), std::move(basis), time};
}

}  // namespace qzeno
