#include <doctest.h>

#include <cmath>
#include <cstring>

#include "generators.hpp"
#include "qzeno/errors.hpp"
#include "qzeno/ensemble.hpp"
#include "qzeno/jump_engine.hpp"
#include "qzeno/rng.hpp"
#include "qzeno/run_config.hpp"

using namespace qzeno;
using qzeno::testing::Gen;

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool same_stats(const EnsembleStatistics& a, const EnsembleStatistics& b) {
  if (a.names != b.names || !same_bits(a.times, b.times) || a.total_jumps != b.total_jumps) return false;
  for (std::size_t k = 0; k < a.names.size(); ++k) {
    if (!same_bits(a.mean[k], b.mean[k]) || !same_bits(a.std_error[k], b.std_error[k])) return false;
  }
  return true;
}

RunConfig small_detector(int n) {
  RunConfig c = preset("fig2");
  c.n_trajectories = n;
  c.observables = {"rho_aa", "coh_re", "coh_im"};
  return c;
}

}  // namespace

TEST_CASE("one trajectory ensemble equals run_trajectory") {
  const RunConfig c = small_detector(1);
  const ModelSpec m = build_model(c);
  const EnsembleResult e = run_ensemble(m, c, {2, true});
  RngStream stream(c.master_seed, 0);
  const TrajectoryRecord rec = run_trajectory(m, c, stream, 0);
  CHECK(same_bits(e.stats.mean[0], rec.values[0]));
  for (double se : e.stats.std_error[0]) CHECK(se == 0.0);
  CHECK(e.stats.n_trajectories == 1);
}

TEST_CASE("ensemble statistics are independent of worker count") {
  const RunConfig c = small_detector(64);
  const ModelSpec m = build_model(c);
  const EnsembleResult one = run_ensemble(m, c, {1, true});
  for (int workers : {2, 3, 8}) {
    CAPTURE(workers);
    CHECK(same_stats(one.stats, run_ensemble(m, c, {workers, false}).stats));
  }
  CHECK(same_stats(one.stats, aggregate(one.records)));
}

TEST_CASE("aggregate mean and standard error") {
  TrajectoryRecord a, b, c;
  for (auto* r : {&a, &b, &c}) {
    r->times = {0.0, 1.0};
    r->names = {"x"};
    r->jumped = {0, 0};
  }
  a.values = {{1.0, 2.0}};
  b.values = {{3.0, 2.0}};
  c.values = {{5.0, 2.0}};
  const std::vector<TrajectoryRecord> records{a, b, c};
  const EnsembleStatistics s = aggregate(records);
  CHECK(s.mean[0][0] == doctest::Approx(3.0));
  CHECK(s.std_error[0][0] == doctest::Approx(2.0 / std::sqrt(3.0)));
  CHECK(s.std_error[0][1] == 0.0);
}

TEST_CASE("detector ensemble reaches a stationary rho_aa") {
  const RunConfig c = preset("fig2");
  const EnsembleResult e = run_ensemble(build_model(c), c);
  const auto& m = e.stats.mean_of("rho_aa");
  const auto& se = e.stats.std_error_of("rho_aa");
  const std::size_t start = 3 * m.size() / 4;
  double avg = 0.0;
  for (std::size_t i = start; i < m.size(); ++i) avg += m[i];
  avg /= static_cast<double>(m.size() - start);
  for (std::size_t i = start; i < m.size(); ++i) CHECK(std::abs(m[i] - avg) < 3.0 * se[i]);
}

TEST_CASE("standard error shrinks as one over root n") {
  RunConfig c = small_detector(250);
  const ModelSpec m = build_model(c);
  const auto small = run_ensemble(m, c).stats;
  c.n_trajectories = 1000;
  const auto large = run_ensemble(m, c).stats;
  double ratio_sum = 0.0;
  int count = 0;
  const auto& s1 = small.std_error_of("rho_aa");
  const auto& s2 = large.std_error_of("rho_aa");
  for (std::size_t i = 50; i < s1.size(); ++i) {
    ratio_sum += s1[i] / s2[i];
    ++count;
  }
  CHECK(ratio_sum / count == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("failed trajectories abort the ensemble") {
  RunConfig c = small_detector(10);
  c.detector.gamma = 100.0;
  c.detector.lambda = 10.0;
  CHECK_THROWS_AS(run_ensemble(build_model(c), c), SimulationError);
}

TEST_CASE("exponential fit") {
  std::vector<double> t, y, flat;
  for (int i = 0; i <= 300; ++i) {
    t.push_back(i);
    y.push_back(std::exp(-0.01 * i));
    flat.push_back(0.3);
  }
  const FitResult f = fit_exponential_rate(t, y, 0.0, 300.0);
  CHECK(std::abs(f.rate - 0.01) < 1e-12);
  CHECK(f.n_points == 301);
  CHECK(std::abs(fit_exponential_rate(t, flat, 0.0, 300.0).rate) < 1e-15);
  CHECK_THROWS_AS(fit_exponential_rate(t, y, 0.0, 5.0), FitError);
  y[100] = 0.0;
  CHECK_THROWS_AS(fit_exponential_rate(t, y, 0.0, 300.0), NonPositiveValues);
}

TEST_CASE("default fit window") {
  std::vector<double> t, y, se;
  for (int i = 0; i <= 500; ++i) {
    t.push_back(i);
    y.push_back(std::exp(-0.01 * i));
    se.push_back(0.001);
  }
  const FitWindow w = default_fit_window(t, y, se, 10.0);
  CHECK(w.t_lo == 10.0);
  // exp(-0.01 t) - 0.002 first drops below 0.02 at t = 382.
  CHECK(w.t_hi == 381.0);
}

TEST_CASE("free decay preset fits to the golden-rule rate") {
  const RunConfig c = preset("fig7");
  const auto s = run_ensemble(build_model(c), c).stats;
  CHECK(fit_exponential_rate(s.times, s.mean_of("rho_ee"), 50.0, 250.0).rate == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("batch jackknife error of a fitted rate") {
  RunConfig c = small_detector(200);
  c.omega_a = 0.0;  // keeps the coherence real and positive
  const EnsembleResult e = run_ensemble(build_model(c), c, {0, true});
  const auto modulus = [](double v) { return std::abs(v); };
  std::vector<double> mean, se;
  transformed_statistics(e.records, "coh_re", modulus, mean, se);
  const RateEstimate est = fit_rate_with_error(e.records, "coh_re", {1.0, 10.0});
  CHECK(est.n_batches == 20);
  CHECK(est.std_error > 0.0);
  CHECK(est.std_error < 0.5 * est.fit.rate);
  CHECK(mean.size() == e.stats.times.size());
}

TEST_CASE("property: fits recover random exponentials") {
  Gen gen(51);
  for (int i = 0; i < qzeno::testing::kCases; ++i) {
    const double rate = gen.log_uniform(1e-4, 1.0);
    const double amp = gen.log_uniform(1e-3, 10.0);
    const int n = gen.integer(10, 500);
    const double dt = gen.uniform(0.01, 5.0) / (rate * n);
    std::vector<double> t, y;
    for (int k = 0; k < n; ++k) {
      t.push_back(k * dt);
      y.push_back(amp * std::exp(-rate * k * dt));
    }
    const FitResult f = fit_exponential_rate(t, y, t.front(), t.back());
    CHECK(f.rate == doctest::Approx(rate).epsilon(1e-9));
    CHECK(std::exp(f.intercept) == doctest::Approx(amp).epsilon(1e-9));
  }
}
