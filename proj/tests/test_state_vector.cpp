#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "qzeno/errors.hpp"
#include "qzeno/state_vector.hpp"

using namespace qzeno;
using qzeno::testing::Gen;

namespace {

std::shared_ptr<const Basis> plain_basis(std::size_t n) { return std::make_shared<const Basis>(n); }

std::shared_ptr<const Basis> detector_basis() {
  using S = SystemLevel;
  using D = DetectorLevel;
  return std::make_shared<const Basis>(Basis{{S::excited, std::nullopt, D::excited},
                                             {S::excited, std::nullopt, D::ground},
                                             {S::ground, std::nullopt, D::excited},
                                             {S::ground, std::nullopt, D::ground}});
}

}  // namespace

TEST_CASE("norm of simple states") {
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(norm_squared(make_state(plain_basis(4), {1.0, 0.0, 0.0, 0.0})) == doctest::Approx(1.0));
  CHECK(norm_squared(make_state(plain_basis(2), {r, r})) == doctest::Approx(1.0));
  CHECK(norm_squared(make_state(plain_basis(2), {0.6, Complex(0.0, 0.8)})) == doctest::Approx(1.0));
}

TEST_CASE("normalize") {
  const auto a = normalize(make_state(plain_basis(2), {2.0, 0.0}));
  CHECK(a.amplitudes[0] == Complex(1.0, 0.0));
  CHECK(a.amplitudes[1] == Complex(0.0, 0.0));

  const auto b = normalize(make_state(plain_basis(2), {1.0, Complex(0.0, 1.0)}));
  CHECK(b.amplitudes[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(b.amplitudes[1].imag() == doctest::Approx(1.0 / std::sqrt(2.0)));

  CHECK_THROWS_AS(normalize(make_state(plain_basis(2), {0.0, 0.0})), ZeroNormError);
  CHECK_THROWS_AS(normalize(make_state(plain_basis(2), {1e-320, 0.0})), ZeroNormError);
}

TEST_CASE("subspace probability") {
  const auto basis = detector_basis();
  const auto is_g = [](const BasisLabel& l) { return l.system == SystemLevel::ground; };
  const auto is_a = [](const BasisLabel& l) { return l.detector_excited(); };

  CHECK(subspace_probability(make_state(basis, {0.0, 0.0, 0.0, 1.0}), is_g) == doctest::Approx(1.0));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(subspace_probability(make_state(basis, {0.0, r, 0.0, r}), is_g) == doctest::Approx(0.5));
  const auto mixed = make_state(basis, {std::sqrt(0.1), std::sqrt(0.3), std::sqrt(0.2), std::sqrt(0.4)});
  CHECK(subspace_probability(mixed, is_a) == doctest::Approx(0.3));
}

TEST_CASE("basis labels print in ket notation") {
  BasisLabel e0b{SystemLevel::excited, BasisLabel::kVacuum, DetectorLevel::ground};
  BasisLabel gk{SystemLevel::ground, 5, DetectorLevel::excited};
  CHECK(to_string(e0b) == "|e,0,b>");
  CHECK(to_string(gk) == "|g,k5,a>");
  CHECK(e0b.is_vacuum());
  CHECK(gk.detector_excited());
}

TEST_CASE("property: normalize gives unit norm and is idempotent") {
  Gen gen(101);
  for (int i = 0; i < qzeno::testing::kCases; ++i) {
    CAPTURE(i);
    const std::size_t n = static_cast<std::size_t>(gen.integer(1, 64));
    auto amps = gen.amplitudes(n);
    const double scale = gen.log_uniform(1e-100, 1e100);
    for (auto& a : amps) a *= scale;
    const auto once = normalize(make_state(plain_basis(n), amps));
    const auto twice = normalize(once);
    CHECK(std::abs(norm_squared(once) - 1.0) < 1e-12);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(once.amplitudes[k] - twice.amplitudes[k]) < 1e-14);
  }
}

TEST_CASE("property: subspace probabilities of a partition add to the norm") {
  Gen gen(102);
  const auto basis = detector_basis();
  for (int i = 0; i < qzeno::testing::kCases; ++i) {
    const auto s = make_state(basis, gen.amplitudes(4));
    const double a = subspace_probability(s, [](const BasisLabel& l) { return l.detector_excited(); });
    const double b = subspace_probability(s, [](const BasisLabel& l) { return !l.detector_excited(); });
    CHECK(a + b == doctest::Approx(norm_squared(s)).epsilon(1e-13));
  }
}
