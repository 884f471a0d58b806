#include "qzeno/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "qzeno/dm_reference.hpp"
#include "qzeno/errors.hpp"
#include "qzeno/oracles.hpp"

namespace qzeno {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v, int precision = 6) {
  std::ostringstream out;
  out << std::setprecision(precision) << v;
  return out.str();
}

std::string percent(double v) { return "+-" + num(100.0 * v, 3) + "%"; }

double rel_diff(double measured, double expected) { return std::abs(measured - expected) / std::abs(expected); }

CriterionResult start_result(int id, const char* name) {
  CriterionResult r;
  r.id = id;
  r.name = name;
  return r;
}

// Collects sub-checks of one criterion into its detail text and verdict.
class Checks {
 public:
  void add(const std::string& label, bool ok, const std::string& text) {
    all_ok_ = all_ok_ && ok;
    if (!detail_.empty()) detail_ += "; ";
    detail_ += label + ": " + text + (ok ? " ok" : " FAIL");
  }
  void note(const std::string& text) {
    if (!detail_.empty()) detail_ += "; ";
    detail_ += text;
  }
  bool ok() const { return all_ok_; }
  const std::string& detail() const { return detail_; }

 private:
  bool all_ok_ = true;
  std::string detail_;
};

struct PointwiseResult {
  double max_z = 0.0;
  double worst_t = 0.0;
  std::size_t violations = 0;
  double first_violation_t = kInf;
};

// |measured - expected| / std_error over samples with t in [t_lo, t_hi]. A zero
// error bar counts as a violation unless the difference is exactly zero.
template <typename Expected>
PointwiseResult pointwise(const std::vector<double>& times, const std::vector<double>& measured,
                          const std::vector<double>& std_error, Expected&& expected, double bound,
                          double t_lo = -kInf, double t_hi = kInf) {
  PointwiseResult r;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_lo || times[i] > t_hi) continue;
    const double diff = std::abs(measured[i] - expected(i));
    const double z = diff == 0.0 ? 0.0 : (std_error[i] > 0.0 ? diff / std_error[i] : kInf);
    if (z > r.max_z) {
      r.max_z = z;
      r.worst_t = times[i];
    }
    if (z > bound) {
      ++r.violations;
      r.first_violation_t = std::min(r.first_violation_t, times[i]);
    }
  }
  return r;
}

std::string describe(const PointwiseResult& r, std::size_t n_points) {
  std::string s = "max z " + num(r.max_z, 4) + " at t=" + num(r.worst_t, 5) + ", " +
                  std::to_string(r.violations) + "/" + std::to_string(n_points) + " points outside";
  if (r.violations > 0) s += " (first at t=" + num(r.first_violation_t, 5) + ")";
  return s;
}

std::size_t count_in(const std::vector<double>& times, double lo, double hi) {
  return static_cast<std::size_t>(
      std::count_if(times.begin(), times.end(), [&](double t) { return t >= lo && t <= hi; }));
}

double window_mean(const std::vector<double>& times, const std::vector<double>& values, double lo, double hi) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= lo && times[i] <= hi) {
      sum += values[i];
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double default_tau_m() { return measurement_time(DetectorParams{}); }

// ---------------------------------------------------------------------------

CriterionResult coherence_decay(ValidationContext& ctx) {
  CriterionResult res = start_result(1, "detector_coherence_decay");
  const auto& ens = ctx.ensemble("detector");
  const auto& s = ens.stats;
  const double tau_m = default_tau_m();
  const auto& re = s.mean_of("coh_re");
  const auto& im = s.mean_of("coh_im");
  const auto& se_re = s.std_error_of("coh_re");
  const auto& se_im = s.std_error_of("coh_im");
  std::vector<double> modulus(s.times.size()), se(s.times.size());
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    modulus[i] = std::abs(Complex(re[i], im[i]));
    se[i] = std::hypot(se_re[i], se_im[i]);
  }
  const double c0 = modulus.front();
  Checks checks;
  const auto pw = pointwise(
      s.times, modulus, se, [&](std::size_t i) { return c0 * coherence_factor(s.times[i], tau_m); }, 5.0, 0.0,
      25.0);
  checks.add("pointwise vs 0.5 exp(-t/tau_m) on [0,25] within 5 se", pw.violations == 0,
             describe(pw, count_in(s.times, 0.0, 25.0)));

  // The exponential sets in after the 1/Gamma detector transient.
  const double skip = 10.0 / DetectorParams{}.gamma;
  const FitWindow w = default_fit_window(s.times, modulus, se, skip);
  const FitResult fit = fit_exponential_rate(s.times, modulus, w.t_lo, w.t_hi);
  const double expected = 1.0 / tau_m;
  const double tol = 0.15 * ctx.tolerance_scale();
  checks.add("fitted 1/tau_m", rel_diff(fit.rate, expected) <= tol,
             num(fit.rate) + " on [" + num(fit.t_lo, 4) + "," + num(fit.t_hi, 4) + "]");
  res.measured = fit.rate;
  res.expected = expected;
  res.tolerance = percent(tol) + "; pointwise 5 se";
  res.passed = checks.ok();
  res.detail = checks.detail();
  return res;
}

CriterionResult jump_statistics(ValidationContext& ctx) {
  CriterionResult res = start_result(2, "jump_interval_statistics");
  const auto& ens = ctx.ensemble("detector");
  double sum = 0.0;
  std::size_t intervals = 0, collapsed_g = 0, with_jumps = 0;
  for (const auto& rec : ens.records) {
    if (rec.series("rho_gg").back() <= 0.5) continue;
    ++collapsed_g;
    if (!rec.jumps.empty()) ++with_jumps;
    for (std::size_t j = 1; j < rec.jumps.size(); ++j) {
      sum += rec.jumps[j].time - rec.jumps[j - 1].time;
      ++intervals;
    }
  }
  const double tau_m = default_tau_m();
  const double mean = intervals ? sum / static_cast<double>(intervals) : kInf;
  res.measured = mean;
  res.expected = tau_m;
  res.tolerance = "factor 2";
  res.passed = intervals > 0 && mean >= 0.5 * tau_m && mean <= 2.0 * tau_m;
  res.detail = std::to_string(collapsed_g) + " of " + std::to_string(ens.records.size()) +
               " trajectories end in g (" + std::to_string(with_jumps) + " with jumps), " +
               std::to_string(intervals) + " intervals";
  return res;
}

CriterionResult trajectory_dm_equivalence(ValidationContext& ctx) {
  CriterionResult res = start_result(3, "trajectory_density_matrix_equivalence");
  const RunConfig config = ctx.config_for("detector");
  const auto& s = ctx.ensemble("detector").stats;
  ctx.log("criterion 3: density-matrix reference");
  const DensitySeries dm = evolve_master_detector(build_model(config), config.t_max, config.dt);
  const std::size_t stride = s.stride;
  double max_pop_error = 0.0;
  for (const auto& rho : dm.states) max_pop_error = std::max(max_pop_error, std::abs(dm_rho_ee(rho) + dm_rho_gg(rho) - 1.0));

  Checks checks;
  const auto& mean = s.mean_of("rho_aa");
  const auto pw = pointwise(s.times, mean, s.std_error_of("rho_aa"),
                            [&](std::size_t i) { return dm_rho_aa(dm.states[i * stride]); }, 5.0);
  checks.add("ensemble rho_aa vs master equation within 5 se", pw.violations == 0,
             describe(pw, s.times.size()));
  checks.add("master equation rho_ee + rho_gg = 1 to 1e-10", max_pop_error <= 1e-10,
             "max deviation " + num(max_pop_error, 3));
  checks.note("plateau ensemble " + num(mean.back()) + " vs master " + num(dm_rho_aa(dm.states.back())));
  res.measured = pw.max_z;
  res.expected = 0.0;
  res.tolerance = "5 se; 1e-10";
  res.passed = checks.ok();
  res.detail = checks.detail();
  return res;
}

// Rate of 2 rho_gg - 1 from the exact master equation over the same window.
double master_equation_polarization_rate(const RunConfig& config, const FitWindow& w) {
  const double h = std::max(config.dt, 0.01);
  const DensitySeries dm = evolve_master_detector(build_model(config), w.t_hi, h);
  std::vector<double> y;
  for (const auto& rho : dm.states) y.push_back(2.0 * dm_rho_gg(rho) - 1.0);
  return fit_exponential_rate(dm.times, y, w.t_lo, w.t_hi).rate;
}

CriterionResult two_level_zeno(ValidationContext& ctx) {
  CriterionResult res = start_result(4, "two_level_zeno");
  const RunConfig config = ctx.config_for("zeno");
  const auto& ens = ctx.ensemble("zeno");
  const auto& s = ens.stats;
  const double tau_m = measurement_time(config.detector);
  const RatePrediction prediction = zeno_transition_rate(config.drive, tau_m);
  const double rate = prediction.rate;

  Checks checks;
  const auto& gg = s.mean_of("rho_gg");
  const auto pw = pointwise(s.times, gg, s.std_error_of("rho_gg"),
                            [&](std::size_t i) { return rate_equation_population(s.times[i], rate); }, 5.0);
  checks.add("rho_gg vs rate-equation curve within 5 se", pw.violations == 0, describe(pw, s.times.size()));

  const auto polarization = [](double v) { return 2.0 * v - 1.0; };
  std::vector<double> pm, pse;
  transformed_statistics(ens.records, "rho_gg", polarization, pm, pse);
  const FitWindow w = default_fit_window(s.times, pm, pse, 2.0 * tau_m);
  const RateEstimate est = fit_rate_with_error(ens.records, "rho_gg", w, polarization);
  const double expected = 2.0 * rate;
  const double tol = 0.15 * ctx.tolerance_scale();
  checks.add("fitted rate of 2 rho_gg - 1", rel_diff(est.fit.rate, expected) <= tol,
             num(est.fit.rate) + " +- " + num(est.std_error, 3) + " on [" + num(est.fit.t_lo, 4) + "," +
                 num(est.fit.t_hi, 4) + "]");
  checks.note("master equation on the same window " + num(master_equation_polarization_rate(config, w)));
  if (!prediction.validity_note.empty()) checks.note("prediction note: " + prediction.validity_note);
  const double t_end = s.times.back();
  const double plateau = window_mean(s.times, gg, 0.75 * t_end, t_end);
  checks.add("late plateau 0.5 +- 0.02", std::abs(plateau - 0.5) <= 0.02, num(plateau));
  res.measured = est.fit.rate;
  res.expected = expected;
  res.tolerance = percent(tol) + "; pointwise 5 se; plateau +-0.02";
  res.passed = checks.ok();
  res.detail = checks.detail();
  return res;
}

CriterionResult two_level_anti_zeno(ValidationContext& ctx) {
  CriterionResult res = start_result(5, "two_level_anti_zeno");
  const RunConfig config = ctx.config_for("antizeno");
  const auto& ens = ctx.ensemble("antizeno");
  const auto& s = ens.stats;
  const double tau_m = measurement_time(config.detector);
  const RatePrediction prediction = zeno_transition_rate(config.drive, tau_m);
  const double rate = prediction.rate;

  Checks checks;
  std::vector<double> free_ee(s.times.size());
  for (std::size_t i = 0; i < s.times.size(); ++i) free_ee[i] = 1.0 - std::norm(rabi_amplitude(s.times[i], config.drive));
  const double measured_avg = window_mean(s.times, s.mean_of("rho_ee"), 100.0, 200.0);
  const double free_avg = window_mean(s.times, free_ee, 100.0, 200.0);
  checks.add("time-averaged rho_ee on [100,200] above the free system", measured_avg > free_avg,
             num(measured_avg) + " vs " + num(free_avg));

  const auto polarization = [](double v) { return 2.0 * v - 1.0; };
  std::vector<double> pm, pse;
  transformed_statistics(ens.records, "rho_gg", polarization, pm, pse);
  const FitWindow w = default_fit_window(s.times, pm, pse, 2.0 * tau_m);
  const RateEstimate est = fit_rate_with_error(ens.records, "rho_gg", w, polarization);
  const double expected = 2.0 * rate;
  const double tol = 0.20 * ctx.tolerance_scale();
  checks.add("fitted rate of 2 rho_gg - 1", rel_diff(est.fit.rate, expected) <= tol,
             num(est.fit.rate) + " +- " + num(est.std_error, 3) + " on [" + num(est.fit.t_lo, 4) + "," +
                 num(est.fit.t_hi, 4) + "]");
  checks.note("master equation on the same window " + num(master_equation_polarization_rate(config, w)));
  if (!prediction.validity_note.empty()) checks.note("prediction note: " + prediction.validity_note);
  res.measured = est.fit.rate;
  res.expected = expected;
  res.tolerance = percent(tol);
  res.passed = checks.ok();
  res.detail = checks.detail();
  return res;
}

CriterionResult free_decay(ValidationContext& ctx) {
  CriterionResult res = start_result(6, "free_decay_constant_coupling");
  const RunConfig config = ctx.config_for("free");
  const auto& s = ctx.ensemble("free").stats;
  const auto& ee = s.mean_of("rho_ee");
  const FitResult fit = fit_exponential_rate(s.times, ee, 50.0, 250.0);
  const double golden = golden_rule_rate(config.reservoir).rate;

  Checks checks;
  const double expected = 0.0100;
  checks.add("fitted rate on [50,250]", rel_diff(fit.rate, expected) <= 0.05,
             num(fit.rate) + " (golden rule " + num(golden) + ")");
  const auto it = std::find_if(s.times.begin(), s.times.end(), [](double t) { return std::abs(t - 0.5) < 1e-9; });
  if (it == s.times.end()) {
    checks.add("quadratic onset", false, "no sample at t=0.5");
  } else {
    const double lost = 1.0 - ee[static_cast<std::size_t>(it - s.times.begin())];
    const double linear = golden * 0.5;
    checks.add("1 - rho_ee(0.5) below 0.6 Gamma0 t", lost < 0.6 * linear,
               num(lost, 4) + " vs " + num(0.6 * linear, 4));
  }
  res.measured = fit.rate;
  res.expected = expected;
  res.tolerance = percent(0.05);
  res.passed = checks.ok();
  res.detail = checks.detail();
  return res;
}

CriterionResult free_decay_sloped(ValidationContext& ctx) {
  CriterionResult res = start_result(7, "free_decay_sloped_coupling");
  const RunConfig config = ctx.config_for("free_sloped");
  const auto& s = ctx.ensemble("free_sloped").stats;
  const FitResult fit = fit_exponential_rate(s.times, s.mean_of("rho_ee"), 50.0, 250.0);
  const double expected = corrected_free_decay_rate(config.reservoir).rate;
  res.measured = fit.rate;
  res.expected = expected;
  res.tolerance = percent(0.10);
  res.passed = rel_diff(fit.rate, expected) <= 0.10;
  res.detail = "fit on [50,250]; resolvent root rate " + num(-2.0 * resolvent_root(config.reservoir).root.real());
  return res;
}

RateEstimate decay_rate_estimate(ValidationContext& ctx, const std::string& key) {
  const auto& ens = ctx.ensemble(key);
  const auto& s = ens.stats;
  const double tau_m = measurement_time(ctx.config_for(key).detector);
  const FitWindow w = default_fit_window(s.times, s.mean_of("rho_ee"), s.std_error_of("rho_ee"), 2.0 * tau_m);
  return fit_rate_with_error(ens.records, "rho_ee", w);
}

std::string describe(const RateEstimate& est) {
  return num(est.fit.rate) + " +- " + num(est.std_error, 3) + " on [" + num(est.fit.t_lo, 4) + "," +
         num(est.fit.t_hi, 4) + "]";
}

CriterionResult measured_decay_zeno(ValidationContext& ctx) {
  CriterionResult res = start_result(8, "measured_decay_zeno");
  const RunConfig config = ctx.config_for("measured");
  const double tau_m = measurement_time(config.detector);
  const RateEstimate est = decay_rate_estimate(ctx, "measured");
  const double expected = measured_decay_rate(config.reservoir, tau_m).rate;
  const double free = golden_rule_rate(config.reservoir).rate;
  const double tol = 0.15 * ctx.tolerance_scale();
  Checks checks;
  checks.add("fitted rate", rel_diff(est.fit.rate, expected) <= tol, describe(est));
  const double sigma = (free - est.fit.rate) / est.std_error;
  checks.add("below free rate " + num(free) + " by >= 3 sigma", sigma >= 3.0, num(sigma, 4) + " sigma");
  res.measured = est.fit.rate;
  res.expected = expected;
  res.tolerance = percent(tol) + "; 3 sigma";
  res.passed = checks.ok();
  res.detail = checks.detail();
  return res;
}

CriterionResult coupling_target_independence(ValidationContext& ctx) {
  CriterionResult res = start_result(9, "coupling_target_independence");
  const auto& ground = ctx.ensemble("measured");
  const auto& excited = ctx.ensemble("measured_excited");
  const auto& gs = ground.stats;
  const auto& es = excited.stats;
  std::vector<double> combined(gs.times.size());
  const auto& g_se = gs.std_error_of("rho_ee");
  const auto& e_se = es.std_error_of("rho_ee");
  for (std::size_t i = 0; i < combined.size(); ++i) combined[i] = std::hypot(g_se[i], e_se[i]);
  const auto& em = es.mean_of("rho_ee");
  Checks checks;
  const auto pw = pointwise(gs.times, gs.mean_of("rho_ee"), combined, [&](std::size_t i) { return em[i]; }, 5.0);
  checks.add("mean rho_ee agree within 5 combined se", pw.violations == 0, describe(pw, gs.times.size()));

  const auto first_jumps = [](const EnsembleResult& ens) {
    std::vector<double> t;
    for (const auto& rec : ens.records) t.push_back(rec.jumps.empty() ? kInf : rec.jumps.front().time);
    return t;
  };
  const double mg = median(first_jumps(ground));
  const double me = median(first_jumps(excited));
  const double ratio = std::max(mg, me) / std::min(mg, me);
  checks.add("median first-jump times differ by > 2x", ratio > 2.0,
             "ground " + num(mg, 4) + ", excited " + num(me, 4) + ", ratio " + num(ratio, 4));
  res.measured = pw.max_z;
  res.expected = 0.0;
  res.tolerance = "5 se; ratio > 2";
  res.passed = checks.ok();
  res.detail = checks.detail();
  return res;
}

CriterionResult measured_decay_anti_zeno(ValidationContext& ctx) {
  CriterionResult res = start_result(10, "measured_decay_anti_zeno");
  const RunConfig config = ctx.config_for("antizeno_decay");
  const double tau_m = measurement_time(config.detector);
  const RateEstimate est = decay_rate_estimate(ctx, "antizeno_decay");
  const RatePrediction expected = anti_zeno_rate(config.reservoir, tau_m);
  const double free = corrected_free_decay_rate(config.reservoir).rate;
  const double tol = 0.20 * ctx.tolerance_scale();
  Checks checks;
  checks.add("fitted rate", rel_diff(est.fit.rate, expected.rate) <= tol, describe(est));
  const double sigma = (est.fit.rate - free) / est.std_error;
  checks.add("above free sloped rate " + num(free) + " by >= 3 sigma", sigma >= 3.0, num(sigma, 4) + " sigma");
  if (!expected.validity_note.empty()) checks.note("prediction note: " + expected.validity_note);
  res.measured = est.fit.rate;
  res.expected = expected.rate;
  res.tolerance = percent(tol) + "; 3 sigma";
  res.passed = checks.ok();
  res.detail = checks.detail();
  return res;
}

CriterionResult laplace_cross_check(ValidationContext& ctx) {
  CriterionResult res = start_result(11, "laplace_residual_root");
  const double tau_m = default_tau_m();
  ReservoirSpec flat;
  ReservoirSpec sloped;
  sloped.slope = 2.0;
  ctx.log("criterion 11: Laplace residual roots");
  const RatePrediction root0 = laplace_decay_rate(flat, tau_m);
  const RatePrediction root2 = laplace_decay_rate(sloped, tau_m);
  const double arctan = measured_decay_rate(flat, tau_m).rate;
  const double series = anti_zeno_rate(sloped, tau_m).rate;
  Checks checks;
  checks.add("a=0 root vs arctan form within 5%", rel_diff(root0.rate, arctan) <= 0.05,
             num(root0.rate) + " vs " + num(arctan));
  checks.add("a=2 root vs anti-Zeno series within 20%", rel_diff(root2.rate, series) <= 0.20,
             num(root2.rate) + " vs " + num(series) + " (" + num(100.0 * rel_diff(root2.rate, series), 3) + "%)");
  res.measured = root0.rate;
  res.expected = arctan;
  res.tolerance = "+-5%; a=2 +-20%";
  res.passed = checks.ok();
  res.detail = checks.detail();
  return res;
}

CriterionResult reduced_dm_oracle(ValidationContext& ctx) {
  CriterionResult res = start_result(12, "reduced_density_matrix_rate");
  const RunConfig config = ctx.config_for("measured");
  const double tau_m = measurement_time(config.detector);
  const ReservoirSpec reduced = reduced_reservoir(config.reservoir, kMaxDenseModes);
  ctx.log("criterion 12: reduced density matrix, N = " + std::to_string(kMaxDenseModes));
  const double h = config.dt / 10.0;
  const DecayDensitySeries dm = evolve_measured_decay_dm(reduced, tau_m, config.t_max, h, 10);
  const FitResult fit = fit_exponential_rate(dm.times, dm.rho_ee, 2.0 * tau_m, config.t_max);
  const double expected = measured_decay_rate(config.reservoir, tau_m).rate;
  Checks checks;
  checks.add("fitted rate", rel_diff(fit.rate, expected) <= 0.10,
             num(fit.rate) + " on [" + num(fit.t_lo, 4) + "," + num(fit.t_hi, 4) + "], trace drift " +
                 num(dm.max_trace_drift, 3));
  res.measured = fit.rate;
  res.expected = expected;
  res.tolerance = percent(0.10);
  res.passed = checks.ok();
  res.detail = checks.detail();
  return res;
}

// --- engine properties -----------------------------------------------------

std::vector<Complex> random_amplitudes(std::mt19937_64& gen, std::size_t n) {
  std::normal_distribution<double> normal;
  std::vector<Complex> v(n);
  for (auto& c : v) c = {normal(gen), normal(gen)};
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

CriterionResult engine_properties(ValidationContext& ctx) {
  CriterionResult res = start_result(13, "engine_properties");
  Checks checks;
  int failures = 0;
  std::mt19937_64 gen(ctx.options().seed);

  // Norm after every engine step, for every model and both integrators.
  {
    ReservoirSpec small;
    small.n_modes = 41;
    DriveParams drive{0.3, 0.1};
    const std::vector<ModelSpec> models = {DetectorMeasurement(DetectorParams{}), RabiMeasured(DetectorParams{}, drive),
                                           FreeDecay(small), MeasuredDecay(small, DetectorParams{})};
    double worst = 0.0;
    long long steps = 0;
    for (const auto& model : models) {
      for (Integrator integ : {Integrator::euler, Integrator::rk4}) {
        for (int trial = 0; trial < 5; ++trial) {
          std::vector<Complex> c = random_amplitudes(gen, dimension(model));
          normalize_in_place(c);
          StepWorkspace work;
          std::uniform_real_distribution<double> u;
          for (int n = 0; n < 400; ++n) {
            const double dt = 0.01;
            if (detector_params(model) && u(gen) < 0.05 && detector_excited_weight(c) > 1e-12) {
              collapse_in_place(c, model);
            } else {
              deterministic_step_in_place(c, model, n * dt, dt, integ, work);
            }
            worst = std::max(worst, std::abs(norm_squared(c) - 1.0));
            ++steps;
          }
        }
      }
    }
    const bool ok = worst <= 1e-12;
    failures += !ok;
    checks.add("norm after each step", ok, "max |norm^2 - 1| " + num(worst, 3) + " over " + std::to_string(steps));
  }

  // normalize is idempotent.
  {
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t n = 1 + trial % 17;
      std::vector<Complex> amps = random_amplitudes(gen, n);
      const double scale = std::pow(10.0, (trial % 13) - 6);
      for (auto& a : amps) a *= scale;
      auto basis = std::make_shared<const Basis>(n);
      const StateVector once = normalize(make_state(basis, amps));
      const StateVector twice = normalize(once);
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(once.amplitudes[i] - twice.amplitudes[i]));
    }
    const bool ok = worst <= 1e-12;
    failures += !ok;
    checks.add("normalize idempotent", ok, "max change " + num(worst, 3));
  }

  // Same seed gives bit-identical ensembles for any worker count.
  {
    RunConfig config = preset("fig2");
    config.n_trajectories = 24;
    config.t_max = 10.0;
    config.integrator = ctx.options().integrator;
    config.observables = {"rho_aa", "coh_re"};
    const ModelSpec model = build_model(config);
    const EnsembleResult a = run_ensemble(model, config, {1, true});
    const EnsembleResult b = run_ensemble(model, config, {3, true});
    bool same = a.stats.total_jumps == b.stats.total_jumps;
    for (std::size_t k = 0; k < a.stats.names.size(); ++k) {
      same = same && bitwise_equal(a.stats.mean[k], b.stats.mean[k]) &&
             bitwise_equal(a.stats.std_error[k], b.stats.std_error[k]);
    }
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      for (std::size_t k = 0; k < a.records[i].values.size(); ++k) {
        same = same && bitwise_equal(a.records[i].values[k], b.records[i].values[k]);
      }
    }
    failures += !same;
    checks.add("seed determinism (1 vs 3 workers)", same, same ? "bit-identical" : "differs");
  }

  // lambda = 0 Rabi evolution against cos^2(omega_r t / 2): error falls with
  // the integrator's order.
  {
    DetectorParams det;
    det.lambda = 0.0;
    const DriveParams drive{1.0, 0.0};
    const ModelSpec model = RabiMeasured(det, drive);
    const auto max_error = [&](double dt, Integrator integ) {
      RunConfig config;
      config.model = ModelKind::rabi;
      config.detector = det;
      config.drive = drive;
      config.initial_system = kGroundOnly;
      config.dt = dt;
      config.t_max = 20.0;
      config.n_trajectories = 1;
      config.integrator = integ;
      config.observables = {"rho_gg"};
      RngStream stream(ctx.options().seed, 0);
      const TrajectoryRecord rec = run_trajectory(model, config, stream);
      double worst = 0.0;
      const auto& gg = rec.series("rho_gg");
      for (std::size_t i = 0; i < rec.times.size(); ++i) {
        const double c = std::cos(0.5 * drive.omega_r * rec.times[i]);
        worst = std::max(worst, std::abs(gg[i] - c * c));
      }
      return std::pair{worst, rec.jumps.size()};
    };
    for (auto [integ, min_order] : {std::pair{Integrator::euler, 0.9}, std::pair{Integrator::rk4, 3.5}}) {
      const auto [e1, j1] = max_error(0.05, integ);
      const auto [e2, j2] = max_error(0.025, integ);
      const double observed = std::log2(e1 / e2);
      const bool ok = j1 == 0 && j2 == 0 && observed >= min_order;
      failures += !ok;
      checks.add("lambda=0 Rabi " + to_string(integ) + " order >= " + num(min_order, 2), ok,
                 "errors " + num(e1, 3) + ", " + num(e2, 3) + ", observed order " + num(observed, 3));
    }
  }
  res.measured = failures;
  res.expected = 0.0;
  res.tolerance = "all properties hold";
  res.passed = checks.ok();
  res.detail = checks.detail();
  return res;
}

using CriterionFn = CriterionResult (*)(ValidationContext&);

CriterionFn criterion_fn(int id) {
  switch (id) {
    case 1: return coherence_decay;
    case 2: return jump_statistics;
    case 3: return trajectory_dm_equivalence;
    case 4: return two_level_zeno;
    case 5: return two_level_anti_zeno;
    case 6: return free_decay;
    case 7: return free_decay_sloped;
    case 8: return measured_decay_zeno;
    case 9: return coupling_target_independence;
    case 10: return measured_decay_anti_zeno;
    case 11: return laplace_cross_check;
    case 12: return reduced_dm_oracle;
    case 13: return engine_properties;
    default: throw ConfigError("unknown criterion " + std::to_string(id));
  }
}

const char* criterion_name(int id) {
  static const char* names[] = {"",
                                "detector_coherence_decay",
                                "jump_interval_statistics",
                                "trajectory_density_matrix_equivalence",
                                "two_level_zeno",
                                "two_level_anti_zeno",
                                "free_decay_constant_coupling",
                                "free_decay_sloped_coupling",
                                "measured_decay_zeno",
                                "coupling_target_independence",
                                "measured_decay_anti_zeno",
                                "laplace_residual_root",
                                "reduced_density_matrix_rate",
                                "engine_properties"};
  return id >= 1 && id <= 13 ? names[id] : "unknown";
}

}  // namespace

std::vector<std::string> suite_names() {
  return {"detector", "zeno2level", "antizeno2level", "freedecay", "measureddecay", "antizenodecay", "engine", "all"};
}

std::vector<int> suite_criteria(const std::string& suite) {
  if (suite == "detector") return {1, 2, 3};
  if (suite == "zeno2level") return {4};
  if (suite == "antizeno2level") return {5};
  if (suite == "freedecay") return {6, 7};
  if (suite == "measureddecay") return {8, 9, 11, 12};
  if (suite == "antizenodecay") return {10};
  if (suite == "engine") return {13};
  if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13};
  throw ConfigError("unknown suite '" + suite + "'", "suite");
}

ValidationContext::ValidationContext(ValidationOptions options) : options_(options) {
  if (options_.n_trajectories < 20) throw ConfigError("validation needs at least 20 trajectories", "n_trajectories");
}

double ValidationContext::tolerance_scale() const {
  return std::max(1.0, std::sqrt(1000.0 / options_.n_trajectories));
}

RunConfig ValidationContext::config_for(const std::string& key) const {
  RunConfig c;
  if (key == "detector") {
    c = preset("fig2");
    c.observables = {"rho_aa", "rho_gg", "coh_re", "coh_im"};
  } else if (key == "zeno") {
    c = preset("fig5");
    c.observables = {"rho_gg", "rho_ee"};
  } else if (key == "antizeno") {
    c = preset("fig6");
    c.observables = {"rho_gg", "rho_ee"};
  } else if (key == "free") {
    c = preset("fig7");
  } else if (key == "free_sloped") {
    c = preset("fig8");
  } else if (key == "measured") {
    c = preset("fig10");
  } else if (key == "measured_excited") {
    c = preset("fig10");
    c.detector.target = CouplingTarget::excited;
  } else if (key == "antizeno_decay") {
    c = preset("fig12");
  } else {
    throw ConfigError("unknown validation ensemble '" + key + "'");
  }
  c.integrator = options_.integrator;
  c.master_seed = options_.seed;
  if (c.n_trajectories > 1) c.n_trajectories = options_.n_trajectories;
  if (c.model == ModelKind::measured_decay) c.observables = {"rho_ee"};
  return c;
}

const EnsembleResult& ValidationContext::ensemble(const std::string& key) {
  auto& slot = cache_[key];
  if (!slot) {
    const RunConfig config = config_for(key);
    log("running ensemble '" + key + "' (" + std::to_string(config.n_trajectories) + " trajectories, " +
        to_string(config.integrator) + ")");
    const auto start = std::chrono::steady_clock::now();
    slot = std::make_unique<EnsembleResult>(run_ensemble(build_model(config), config, {options_.workers, true}));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log("  done in " + num(secs, 4) + " s");
  }
  return *slot;
}

void ValidationContext::log(const std::string& message) const {
  if (options_.log) *options_.log << message << std::endl;
}

CriterionResult run_criterion(int id, ValidationContext& ctx) {
  const auto fn = criterion_fn(id);
  const auto start = std::chrono::steady_clock::now();
  CriterionResult res;
  try {
    res = fn(ctx);
  } catch (const std::exception& e) {
    res.id = id;
    res.name = criterion_name(id);
    res.passed = false;
    res.measured = std::numeric_limits<double>::quiet_NaN();
    res.detail = std::string("error: ") + e.what();
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

std::vector<CriterionResult> run_suite(const std::string& suite, const ValidationOptions& options,
                                       std::ostream* report) {
  const std::vector<int> ids = suite_criteria(suite);
  ValidationContext ctx(options);
  std::vector<CriterionResult> out;
  for (int id : ids) {
    out.push_back(run_criterion(id, ctx));
    if (report) *report << format_result(out.back()) << std::endl;
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream out;
  out << "criterion=" << r.id << " name=" << r.name << " measured=" << num(r.measured, 8)
      << " expected=" << num(r.expected, 8) << " tolerance=\"" << r.tolerance << "\" verdict="
      << (r.passed ? "PASS" : "FAIL") << " seconds=" << num(r.seconds, 4) << " detail=\"" << r.detail << "\"";
  return out.str();
}

}  // namespace qzeno
