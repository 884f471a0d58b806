#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "qzeno/models.hpp"

namespace qzeno::testing {

// Seeded generator for property tests. Each property owns one, so a failing
// case reproduces from the printed case index alone.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  bool coin() { return integer(0, 1) == 1; }

  Complex complex_normal() {
    std::normal_distribution<double> n;
    return {n(engine_), n(engine_)};
  }

  std::vector<Complex> amplitudes(std::size_t n) {
    std::vector<Complex> v(n);
    for (auto& c : v) c = complex_normal();
    return v;
  }

  std::vector<Complex> normalized(std::size_t n) {
    auto v = amplitudes(n);
    double s = 0.0;
    for (const auto& c : v) s += std::norm(c);
    for (auto& c : v) c /= std::sqrt(s);
    return v;
  }

  DetectorParams detector() {
    DetectorParams p;
    p.gamma = uniform(0.5, 20.0);
    p.lambda = uniform(0.1, 2.0);
    p.omega_d = uniform(-2.0, 2.0);
    p.target = coin() ? CouplingTarget::ground : CouplingTarget::excited;
    return p;
  }

  DriveParams drive() { return {uniform(0.0, 1.0), uniform(-0.5, 0.5)}; }

  ReservoirSpec reservoir(int max_modes = 41) {
    ReservoirSpec r;
    r.n_modes = integer(2, max_modes);
    r.half_width = uniform(0.1, 2.0);
    r.g0 = uniform(0.0, 0.05);
    r.slope = uniform(-2.0, 2.0);
    r.omega_a = uniform(0.0, 3.0);
    return r;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline constexpr int kCases = 200;

}  // namespace qzeno::testing
