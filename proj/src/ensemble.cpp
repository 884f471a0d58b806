#include "qzeno/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <thread>

#include "qzeno/errors.hpp"

namespace qzeno {
namespace {

void check_compatible(std::span<const TrajectoryRecord> records) {
  if (records.empty()) throw DomainError("no trajectories to aggregate");
  const auto& first = records.front();
  for (const auto& r : records) {
    if (r.times.size() != first.times.size() || r.names != first.names) {
      throw DomainError("trajectory records have different layouts");
    }
  }
}

// Two-pass mean and standard error of column j of per-trajectory rows.
template <typename Get>
void column_stats(std::size_t n_rows, std::size_t n_cols, Get&& get, std::vector<double>& mean,
                  std::vector<double>& se) {
  mean.assign(n_cols, 0.0);
  se.assign(n_cols, 0.0);
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::size_t j = 0; j < n_cols; ++j) mean[j] += get(i, j);
  }
  for (double& m : mean) m /= static_cast<double>(n_rows);
  if (n_rows < 2) return;
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::size_t j = 0; j < n_cols; ++j) {
      const double d = get(i, j) - mean[j];
      se[j] += d * d;
    }
  }
  for (double& s : se) {
    s = std::sqrt(s / static_cast<double>(n_rows - 1) / static_cast<double>(n_rows));
  }
}

std::size_t observable_index(std::span<const TrajectoryRecord> records, const std::string& name) {
  const auto& names = records.front().names;
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DomainError("trajectories have no observable '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

}  // namespace

int default_workers() {
  if (const char* env = std::getenv("QZENO_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::size_t EnsembleStatistics::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw DomainError("ensemble has no observable '" + name + "'");
}

EnsembleStatistics aggregate(std::span<const TrajectoryRecord> records) {
  check_compatible(records);
  const auto& first = records.front();
  EnsembleStatistics s;
  s.times = first.times;
  s.names = first.names;
  s.stride = first.stride;
  s.n_trajectories = static_cast<long long>(records.size());
  for (const auto& r : records) {
    s.total_jumps += static_cast<long long>(r.jumps.size());
    s.max_jump_probability = std::max(s.max_jump_probability, r.max_jump_probability);
  }
  s.mean.resize(s.names.size());
  s.std_error.resize(s.names.size());
  for (std::size_t k = 0; k < s.names.size(); ++k) {
    column_stats(
        records.size(), s.times.size(), [&](std::size_t i, std::size_t j) { return records[i].values[k][j]; },
        s.mean[k], s.std_error[k]);
  }
  return s;
}

EnsembleResult run_ensemble(const ModelSpec& model, const RunConfig& config, const EnsembleOptions& options) {
  if (config.n_trajectories < 1) throw DomainError("n_trajectories must be >= 1");
  const auto n = static_cast<std::size_t>(config.n_trajectories);
  std::vector<std::optional<TrajectoryRecord>> slots(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};

  const auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        RngStream stream(config.master_seed, i);
        slots[i] = run_trajectory(model, config, stream, static_cast<long long>(i));
      } catch (const SimulationError& e) {
        errors[i] = e.what();
      }
    }
  };
  const int workers = std::clamp(options.workers > 0 ? options.workers : default_workers(), 1,
                                 static_cast<int>(n));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  EnsembleResult out;
  std::vector<TrajectoryRecord> ok;
  ok.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (slots[i]) {
      ok.push_back(std::move(*slots[i]));
    } else {
      out.failures.push_back({static_cast<long long>(i), errors[i]});
    }
  }
  if (static_cast<double>(out.failures.size()) > 0.01 * static_cast<double>(n)) {
    throw SimulationError(std::to_string(out.failures.size()) + " of " + std::to_string(n) +
                          " trajectories failed; first: trajectory " +
                          std::to_string(out.failures.front().trajectory_id) + ": " +
                          out.failures.front().message);
  }
  out.stats = aggregate(ok);
  if (options.keep_records) out.records = std::move(ok);
  return out;
}

FitResult fit_exponential_rate(std::span<const double> times, std::span<const double> values, double t_lo,
                               double t_hi) {
  if (times.size() != values.size()) throw FitError("times and values differ in length");
  if (!(t_lo < t_hi)) throw FitError("fit window needs t_lo < t_hi");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_lo || times[i] > t_hi) continue;
    if (!(values[i] > 0.0)) {
      throw NonPositiveValues("non-positive value " + std::to_string(values[i]) + " at t = " +
                              std::to_string(times[i]) + " inside the fit window");
    }
    xs.push_back(times[i]);
    ys.push_back(std::log(values[i]));
  }
  if (xs.size() < 10) throw FitError("fit window holds fewer than 10 points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  FitResult fit;
  fit.rate = -slope;
  fit.intercept = my - slope * mx;
  fit.t_lo = xs.front();
  fit.t_hi = xs.back();
  fit.n_points = xs.size();
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + slope * xs[i]);
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / n);
  if (!std::isfinite(fit.rate)) throw FitError("fitted rate is not finite");
  return fit;
}

FitWindow default_fit_window(std::span<const double> times, std::span<const double> mean,
                             std::span<const double> std_error, double skip, double floor) {
  FitWindow w{skip, skip};
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < skip) continue;
    if (mean[i] - 2.0 * std_error[i] < floor) break;
    w.t_hi = times[i];
  }
  return w;
}

void transformed_statistics(std::span<const TrajectoryRecord> records, const std::string& name,
                            const SampleTransform& transform, std::vector<double>& mean,
                            std::vector<double>& std_error) {
  check_compatible(records);
  const std::size_t k = observable_index(records, name);
  column_stats(
      records.size(), records.front().times.size(),
      [&](std::size_t i, std::size_t j) {
        const double v = records[i].values[k][j];
        return transform ? transform(v) : v;
      },
      mean, std_error);
}

RateEstimate fit_rate_with_error(std::span<const TrajectoryRecord> records, const std::string& name,
                                 FitWindow window, const SampleTransform& transform, int n_batches) {
  const std::size_t n = records.size();
  if (n_batches < 2 || static_cast<std::size_t>(n_batches) > n) {
    throw FitError("need between 2 and n_trajectories batches");
  }
  std::vector<double> mean, se;
  transformed_statistics(records, name, transform, mean, se);
  const auto& times = records.front().times;
  RateEstimate est;
  est.fit = fit_exponential_rate(times, mean, window.t_lo, window.t_hi);
  est.n_batches = n_batches;

  // Batch b holds trajectories [b n / B, (b + 1) n / B).
  const auto batches = static_cast<std::size_t>(n_batches);
  const std::size_t len = times.size();
  std::vector<std::vector<double>> sums(batches, std::vector<double>(len, 0.0));
  std::vector<std::size_t> counts(batches, 0);
  const std::size_t k = observable_index(records, name);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = i * batches / n;
    ++counts[b];
    for (std::size_t j = 0; j < len; ++j) {
      const double v = records[i].values[k][j];
      sums[b][j] += transform ? transform(v) : v;
    }
  }
  std::vector<double> total(len, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t j = 0; j < len; ++j) total[j] += sums[b][j];
  }
  std::vector<double> rates(batches);
  std::vector<double> loo(len);
  for (std::size_t b = 0; b < batches; ++b) {
    const double m = static_cast<double>(n - counts[b]);
    for (std::size_t j = 0; j < len; ++j) loo[j] = (total[j] - sums[b][j]) / m;
    rates[b] = fit_exponential_rate(times, loo, window.t_lo, window.t_hi).rate;
  }
  double avg = 0.0;
  for (double r : rates) avg += r;
  avg /= static_cast<double>(batches);
  double ss = 0.0;
  for (double r : rates) ss += (r - avg) * (r - avg);
  est.std_error = std::sqrt(ss * static_cast<double>(batches - 1) / static_cast<double>(batches));
  return est;
}

}  // namespace qzeno
