#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "generators.hpp"
#include "qzeno/errors.hpp"
#include "qzeno/jump_engine.hpp"
#include "qzeno/models.hpp"
#include "qzeno/run_config.hpp"

using namespace qzeno;
using qzeno::testing::Gen;

namespace {

std::vector<Complex> deriv(const ModelSpec& m, double t, const std::vector<Complex>& c) {
  std::vector<Complex> dc(c.size());
  derivative(m, t, c, dc);
  return dc;
}

// d(|c_i|^2)/dt = 2 Re(conj(c_i) dc_i)
double rate_of_population(const std::vector<Complex>& c, const std::vector<Complex>& dc, std::size_t i) {
  return 2.0 * (std::conj(c[i]) * dc[i]).real();
}

double norm_rate(const std::vector<Complex>& c, const std::vector<Complex>& dc) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += rate_of_population(c, dc, i);
  return s;
}

std::vector<Complex> evolve(const ModelSpec& m, std::vector<Complex> c, double t_max, double dt,
                            Integrator integ = Integrator::rk4) {
  StepWorkspace work;
  const long long n = std::llround(t_max / dt);
  for (long long i = 0; i < n; ++i) deterministic_step_in_place(c, m, i * dt, dt, integ, work);
  return c;
}

}  // namespace

TEST_CASE("detector model derivative") {
  SUBCASE("lambda = 0, gamma = 0 is a pure phase rotation") {
    DetectorParams p{0.0, 0.0, 1.3};
    DetectorMeasurement m(p, kEqualSuperposition, 0.7);
    Gen gen(1);
    const auto c = gen.normalized(4);
    const auto dc = deriv(m, 0.0, c);
    for (std::size_t i = 0; i < 4; ++i) CHECK(rate_of_population(c, dc, i) == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("coupling drives |g,a> from |g,b>") {
    DetectorMeasurement m(DetectorParams{10.0, 1.0, 1.0});
    const std::vector<Complex> c{0.0, 0.0, 0.0, 1.0};
    const auto dc = deriv(m, 0.0, c);
    CHECK(dc[2].real() == doctest::Approx(0.0));
    CHECK(dc[2].imag() == doctest::Approx(-1.0));
  }
  SUBCASE("|e,a> decays at gamma") {
    DetectorMeasurement m(DetectorParams{10.0, 1.0, 1.0});
    const std::vector<Complex> c{1.0, 0.0, 0.0, 0.0};
    CHECK(rate_of_population(c, deriv(m, 0.0, c), 0) == doctest::Approx(-10.0));
  }
  SUBCASE("|e,b> only picks up a phase") {
    DetectorMeasurement m(DetectorParams{10.0, 1.0, 1.0});
    const auto c = evolve(m, {0.0, 1.0, 0.0, 0.0}, 5.0, 0.01);
    CHECK(std::norm(c[1]) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("lambda = 0 leaves |c_gb|^2 unchanged") {
    DetectorMeasurement m(DetectorParams{10.0, 0.0, 1.0});
    const double r = 1.0 / std::sqrt(2.0);
    const auto c = evolve(m, {0.0, r, 0.0, r}, 20.0, 0.1, Integrator::euler);
    CHECK(std::norm(c[3]) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("rabi model") {
  SUBCASE("free Rabi flopping at resonance") {
    const DriveParams drive{0.4, 0.0};
    RabiMeasured m(DetectorParams{0.0, 0.0, 1.0}, drive);
    auto c = initial_state(m).amplitudes;
    StepWorkspace work;
    const double dt = 0.01;
    for (int i = 1; i <= 2000; ++i) {
      deterministic_step_in_place(c, m, (i - 1) * dt, dt, Integrator::rk4, work);
      if (i % 250 == 0) {
        const double cg = std::cos(0.5 * drive.omega_r * i * dt);
        CHECK(std::norm(c[2]) + std::norm(c[3]) == doctest::Approx(cg * cg).epsilon(1e-9));
      }
    }
  }
  SUBCASE("detuned maximum excitation is omega_r^2 / (detuning^2 + omega_r^2)") {
    const DriveParams drive{0.1, 0.2};
    RabiMeasured m(DetectorParams{0.0, 0.0, 1.0}, drive);
    auto c = initial_state(m).amplitudes;
    StepWorkspace work;
    const double dt = 0.01;
    double max_ee = 0.0;
    const double period = 2.0 * M_PI / std::hypot(drive.omega_r, drive.detuning);
    for (int i = 0; i * dt < period; ++i) {
      deterministic_step_in_place(c, m, i * dt, dt, Integrator::rk4, work);
      max_ee = std::max(max_ee, std::norm(c[0]) + std::norm(c[1]));
    }
    CHECK(max_ee == doctest::Approx(0.2).epsilon(1e-4));
  }
}

TEST_CASE("initial states") {
  const double r = 1.0 / std::sqrt(2.0);
  const auto d = initial_state(DetectorMeasurement(DetectorParams{})).amplitudes;
  CHECK(d[1].real() == doctest::Approx(r));
  CHECK(d[3].real() == doctest::Approx(r));
  CHECK(std::abs(d[0]) + std::abs(d[2]) == 0.0);

  const auto rb = initial_state(RabiMeasured(DetectorParams{}, DriveParams{0.1, 0.0})).amplitudes;
  CHECK(rb[3] == Complex(1.0, 0.0));

  const auto md = initial_state(MeasuredDecay(ReservoirSpec{}, DetectorParams{}));
  CHECK(md.amplitudes[1] == Complex(1.0, 0.0));
  CHECK(to_string((*md.basis)[1]) == "|e,0,b>");
  CHECK(md.size() == 2 * 1002);
}

TEST_CASE("reservoir grid") {
  ReservoirSpec r;
  CHECK(r.offset(0) == doctest::Approx(-0.5));
  CHECK(r.offset(r.n_modes - 1) == doctest::Approx(0.5));
  CHECK(r.offset(500) == 0.0);
  CHECK(r.spacing() == doctest::Approx(0.001));
  r.slope = 2.0;
  CHECK(r.coupling(r.n_modes - 1) == doctest::Approx(3.0 * r.g0));
  CHECK(r.coupling(0) == doctest::Approx(-r.g0));
  ReservoirSpec bad;
  bad.n_modes = 1;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("free decay with zero coupling is frozen") {
  ReservoirSpec r;
  r.n_modes = 11;
  r.g0 = 0.0;
  FreeDecay m(r);
  Gen gen(3);
  const auto c = gen.normalized(m.dimension());
  for (const auto& d : deriv(m, 1.7, c)) CHECK(std::abs(d) == 0.0);
}

TEST_CASE("free decay with two modes matches exact diagonalization") {
  ReservoirSpec r;
  r.n_modes = 2;
  r.half_width = 0.5;
  r.g0 = 0.1;
  r.slope = 0.3;
  FreeDecay m(r);

  // Schrodinger-picture Hamiltonian on |e,0>, |g,k0>, |g,k1>.
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  h(0, 0) = r.omega_a;
  for (int k = 0; k < 2; ++k) {
    h(k + 1, k + 1) = r.frequency(k);
    h(0, k + 1) = h(k + 1, 0) = r.coupling(k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(h);
  const auto exact_ee = [&](double t) {
    Complex amp{0.0, 0.0};
    for (int j = 0; j < 3; ++j) {
      const double v = eig.eigenvectors()(0, j);
      amp += v * v * std::polar(1.0, -eig.eigenvalues()(j) * t);
    }
    return std::norm(amp);
  };

  const double t_max = 30.0;
  const auto coarse = evolve(m, initial_state(m).amplitudes, t_max, 0.1);
  const auto fine = evolve(m, initial_state(m).amplitudes, t_max, 0.05);
  const double e1 = std::abs(std::norm(coarse[0]) - exact_ee(t_max));
  const double e2 = std::abs(std::norm(fine[0]) - exact_ee(t_max));
  CHECK(e1 < 1e-6);
  CHECK(std::log2(e1 / e2) > 3.5);
}

TEST_CASE("free decay preset loses population at the golden-rule rate") {
  FreeDecay m(ReservoirSpec{});
  const auto c = evolve(m, initial_state(m).amplitudes, 20.0, 0.1);
  const double lost = 1.0 - std::norm(c[0]);
  // Linear regime after the quadratic onset: roughly gamma0 (t - 1/half_width).
  CHECK(lost == doctest::Approx(0.0100069 * 20.0).epsilon(0.2));
}

TEST_CASE("observables") {
  DetectorMeasurement det(DetectorParams{});
  CHECK(default_observables(det) == std::vector<std::string>{"rho_aa", "rho_ee", "rho_gg", "coh_re", "coh_im"});
  CHECK_THROWS_AS(find_observable(det, "nope"), DomainError);
  const auto coh = find_observable(det, "coh_re");
  const double r = 1.0 / std::sqrt(2.0);
  const std::vector<Complex> c{0.0, r, 0.0, r};
  CHECK(coh.eval(c) == doctest::Approx(0.5));
  CHECK_FALSE(coh.is_probability);
}

TEST_CASE("property: with gamma = 0 every model conserves the norm") {
  Gen gen(11);
  for (int i = 0; i < qzeno::testing::kCases; ++i) {
    CAPTURE(i);
    DetectorParams det = gen.detector();
    det.gamma = 0.0;
    const std::vector<ModelSpec> models = {DetectorMeasurement(det, kEqualSuperposition, gen.uniform(-2, 2)),
                                           RabiMeasured(det, gen.drive()), FreeDecay(gen.reservoir()),
                                           MeasuredDecay(gen.reservoir(), det)};
    for (const auto& m : models) {
      const auto c = gen.normalized(dimension(m));
      CHECK(std::abs(norm_rate(c, deriv(m, gen.uniform(0, 100), c))) < 1e-12);
    }
  }
}

TEST_CASE("property: with gamma > 0 the norm loss rate is gamma times the detector-excited weight") {
  Gen gen(12);
  for (int i = 0; i < qzeno::testing::kCases; ++i) {
    const DetectorParams det = gen.detector();
    const std::vector<ModelSpec> models = {DetectorMeasurement(det), RabiMeasured(det, gen.drive()),
                                           MeasuredDecay(gen.reservoir(), det)};
    for (const auto& m : models) {
      const auto c = gen.normalized(dimension(m));
      const double expected = -det.gamma * detector_excited_weight(c);
      CHECK(norm_rate(c, deriv(m, gen.uniform(0, 100), c)) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("property: rabi model with omega_r = 0 equals the detector model at omega_a = 0") {
  Gen gen(13);
  for (int i = 0; i < qzeno::testing::kCases; ++i) {
    const DetectorParams det = gen.detector();
    const RabiMeasured rabi(det, DriveParams{0.0, gen.uniform(-1, 1)});
    const DetectorMeasurement plain(det, kEqualSuperposition, 0.0);
    const auto c = gen.amplitudes(4);
    const double t = gen.uniform(0, 50);
    const auto a = deriv(rabi, t, c);
    const auto b = deriv(plain, t, c);
    for (std::size_t k = 0; k < 4; ++k) CHECK(a[k] == b[k]);
  }
}

TEST_CASE("property: measured decay without detector is two independent free decays") {
  Gen gen(14);
  for (int i = 0; i < 50; ++i) {
    const ReservoirSpec r = gen.reservoir();
    const MeasuredDecay measured(r, DetectorParams{0.0, 0.0, 0.0});
    const FreeDecay free(r);
    const auto c = gen.amplitudes(measured.dimension());
    const double t = gen.uniform(0, 300);
    const auto dm = deriv(measured, t, c);
    for (std::size_t level = 0; level < 2; ++level) {
      std::vector<Complex> sector(free.dimension());
      for (std::size_t k = 0; k < sector.size(); ++k) sector[k] = c[2 * k + level];
      const auto df = deriv(free, t, sector);
      for (std::size_t k = 0; k < sector.size(); ++k) CHECK(std::abs(dm[2 * k + level] - df[k]) < 1e-15);
    }
  }
}

TEST_CASE("property: measured decay without reservoir coupling is the detector model in every mode block") {
  Gen gen(15);
  for (int i = 0; i < 50; ++i) {
    ReservoirSpec r = gen.reservoir();
    r.g0 = 0.0;
    DetectorParams det = gen.detector();
    det.target = CouplingTarget::ground;
    const MeasuredDecay measured(r, det);
    const DetectorMeasurement plain(det, kEqualSuperposition, 0.0);
    const auto c = gen.amplitudes(measured.dimension());
    const auto dm = deriv(measured, gen.uniform(0, 10), c);
    for (int k = 0; k < r.n_modes; ++k) {
      const std::size_t ia = 2 + 2 * static_cast<std::size_t>(k);
      // Mode block k is the g sector of the plain detector.
      const auto dp = deriv(plain, 0.0, {c[0], c[1], c[ia], c[ia + 1]});
      CHECK(std::abs(dm[ia] - dp[2]) < 1e-14);
      CHECK(std::abs(dm[ia + 1] - dp[3]) < 1e-14);
      if (k == 0) {
        CHECK(std::abs(dm[0] - dp[0]) < 1e-14);
        CHECK(std::abs(dm[1] - dp[1]) < 1e-14);
      }
    }
  }
}

TEST_CASE("property: reservoir offsets are antisymmetric") {
  Gen gen(16);
  for (int i = 0; i < qzeno::testing::kCases; ++i) {
    ReservoirSpec r = gen.reservoir(2001);
    if (gen.coin()) r.omega_a = -r.omega_a;
    if (std::abs(r.omega_a) < r.half_width / 3.0) r.omega_a = gen.coin() ? 0.0 : r.half_width;
    for (int k = 0; k < r.n_modes; ++k) CHECK(r.offset(k) == -r.offset(r.n_modes - 1 - k));
  }
}

TEST_CASE("property: mode grid is symmetric about omega_a and flat coupling is constant") {
  Gen gen(17);
  for (int i = 0; i < qzeno::testing::kCases; ++i) {
    ReservoirSpec r = gen.reservoir(2001);
    if (gen.coin()) r.omega_a = -r.omega_a;
    if (std::abs(r.omega_a) < r.half_width / 3.0) r.omega_a = gen.coin() ? 0.0 : r.half_width;
    for (int k = 0; k < r.n_modes; ++k) {
      CHECK(r.frequency(k) + r.frequency(r.n_modes - 1 - k) == 2.0 * r.omega_a);
    }
    r.slope = 0.0;
    for (int k = 0; k < r.n_modes; ++k) CHECK(r.coupling(k) == r.g0);
  }
}
