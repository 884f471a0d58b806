#include <doctest.h>

#include <cstring>
#include <sstream>

#include "generators.hpp"
#include "qzeno/csv_io.hpp"
#include "qzeno/errors.hpp"
#include "qzeno/run_config.hpp"

using namespace qzeno;
using qzeno::testing::Gen;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("preset table") {
  CHECK(preset_names().size() == 12);
  for (const auto& name : {"fig1", "fig2", "fig3"}) {
    const RunConfig c = preset(name);
    CHECK(c.model == ModelKind::detector);
    CHECK(c.dt == 0.1);
    CHECK(c.detector.gamma == 10.0);
    CHECK(c.detector.lambda == 1.0);
    CHECK(c.detector.omega_d == 1.0);
    CHECK(c.initial_system[0] == c.initial_system[1]);
  }
  CHECK(preset("fig2").n_trajectories == 1000);
  CHECK(preset("fig3").n_trajectories == 1000);
  for (const auto& name : {"fig4", "fig5", "fig6"}) {
    const RunConfig c = preset(name);
    CHECK(c.model == ModelKind::rabi);
    CHECK(c.drive.omega_r == 0.1);
    CHECK(c.detector.gamma == 10.0);
    CHECK(c.detector.lambda == 1.0);
    CHECK(c.initial_system[0] == Complex(0.0, 0.0));
  }
  CHECK(preset("fig5").drive.detuning == 0.0);
  CHECK(preset("fig6").drive.detuning == 0.2);
  CHECK(preset("fig6").dt == 0.001);
  for (const auto& name : {"fig7", "fig8", "fig9", "fig10", "fig11", "fig12"}) {
    const RunConfig c = preset(name);
    CHECK(c.dt == 0.1);
    CHECK(c.reservoir.n_modes == 1001);
    CHECK(c.reservoir.half_width == 0.5);
    CHECK(c.reservoir.g0 == 0.001262);
    CHECK(c.reservoir.spacing() == doctest::Approx(0.001));
  }
  CHECK(preset("fig7").model == ModelKind::free_decay);
  CHECK(preset("fig7").reservoir.slope == 0.0);
  CHECK(preset("fig8").reservoir.slope == 2.0);
  CHECK(preset("fig10").model == ModelKind::measured_decay);
  CHECK(preset("fig10").detector.target == CouplingTarget::ground);
  CHECK(preset("fig11").detector.target == CouplingTarget::excited);
  CHECK(preset("fig12").reservoir.slope == 2.0);
  CHECK_THROWS_AS(preset("fig13"), ConfigError);
  for (const auto& name : preset_names()) CHECK_NOTHROW(validate(preset(name)));
}

TEST_CASE("config parsing") {
  const RunConfig c = parse(R"(
# comment
[run]
preset = fig10
n_trajectories = 200   ; inline comment
integrator = rk4
[detector]
gamma = 20
target = excited
[initial]
c_e = 0.6, 0
c_g = 0, 0.8
[output]
observables = rho_ee, rho_aa
)");
  CHECK(c.name == "fig10");
  CHECK(c.n_trajectories == 200);
  CHECK(c.integrator == Integrator::rk4);
  CHECK(c.detector.gamma == 20.0);
  CHECK(c.detector.target == CouplingTarget::excited);
  CHECK(c.initial_system[1] == Complex(0.0, 0.8));
  CHECK(c.observables == std::vector<std::string>{"rho_ee", "rho_aa"});
}

TEST_CASE("config errors name the key and line") {
  const auto fails_at = [](const std::string& text, const std::string& key, int line) {
    try {
      parse(text);
    } catch (const ConfigError& e) {
      CHECK(e.key() == key);
      CHECK(e.line() == line);
      return;
    }
    FAIL("expected ConfigError");
  };
  fails_at("[run]\ndt = 0.1\nbogus = 3\n", "run.bogus", 3);
  fails_at("[run]\n\ndt = fast\n", "run.dt", 3);
  fails_at("[detector]\ntarget = sideways\n", "detector.target", 2);
  fails_at("[run\n", "[run", 1);
  fails_at("[run]\njust words\n", "just words", 2);

  RunConfig c;
  c.dt = -1.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = RunConfig{};
  c.t_max = 0.01;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = RunConfig{};
  c.decimation = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = RunConfig{};
  c.observables = {"rho_xx"};
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("property: config text round-trips every preset and random overrides") {
  Gen gen(61);
  for (int i = 0; i < qzeno::testing::kCases; ++i) {
    RunConfig c = preset(preset_names()[static_cast<std::size_t>(gen.integer(0, 11))]);
    c.dt = gen.log_uniform(1e-4, 0.2);
    c.detector.gamma = gen.uniform(0.1, 30.0);
    c.reservoir.g0 = gen.log_uniform(1e-5, 1e-2);
    c.master_seed = gen.engine()();
    c.initial_system = {gen.complex_normal(), gen.complex_normal()};
    const RunConfig back = parse(to_config_text(c));
    CHECK(to_config_text(back) == to_config_text(c));
    CHECK(back.dt == c.dt);
    CHECK(back.master_seed == c.master_seed);
    CHECK(back.reservoir.g0 == c.reservoir.g0);
    CHECK(back.initial_system == c.initial_system);
  }
}

TEST_CASE("property: ensemble CSV round-trips bit for bit") {
  Gen gen(62);
  for (int i = 0; i < 50; ++i) {
    EnsembleStatistics s;
    const int n = gen.integer(1, 40);
    const int k = gen.integer(1, 4);
    for (int j = 0; j < n; ++j) s.times.push_back(j * gen.log_uniform(1e-3, 10.0));
    for (int o = 0; o < k; ++o) {
      s.names.push_back("obs" + std::to_string(o));
      std::vector<double> m, e;
      for (int j = 0; j < n; ++j) {
        m.push_back(gen.uniform(-1, 1) * gen.log_uniform(1e-300, 1e300));
        e.push_back(gen.log_uniform(1e-20, 1.0));
      }
      s.mean.push_back(m);
      s.std_error.push_back(e);
    }
    std::stringstream io;
    write_ensemble_csv(io, s);
    const EnsembleStatistics back = read_ensemble_csv(io);
    CHECK(back.names == s.names);
    CHECK(same_bits(back.times, s.times));
    for (int o = 0; o < k; ++o) {
      CHECK(same_bits(back.mean[o], s.mean[o]));
      CHECK(same_bits(back.std_error[o], s.std_error[o]));
    }
  }
}

TEST_CASE("csv headers") {
  EnsembleStatistics s;
  s.times = {0.0};
  s.names = {"rho_ee"};
  s.mean = {{1.0}};
  s.std_error = {{0.0}};
  std::ostringstream out;
  write_ensemble_csv(out, s);
  CHECK(out.str().rfind("t,rho_ee_mean,rho_ee_stderr\n", 0) == 0);

  TrajectoryRecord r;
  r.times = {0.0, 0.1};
  r.names = {"rho_aa"};
  r.values = {{0.0, 0.5}};
  r.jumped = {0, 1};
  std::ostringstream t;
  write_trajectory_csv(t, r);
  CHECK(t.str() == "t,rho_aa,jump\n0,0,0\n0.10000000000000001,0.5,1\n");

  std::istringstream bad("t,x_mean\n1,2\n");
  CHECK_THROWS(read_ensemble_csv(bad));
}
