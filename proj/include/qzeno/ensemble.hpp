#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qzeno/jump_engine.hpp"

namespace qzeno {

// QZENO_WORKERS if set to a positive integer, else the hardware thread count.
int default_workers();

struct EnsembleStatistics {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> std_error;  // sample std (n - 1) / sqrt(n)
  long long n_trajectories = 0;
  long long total_jumps = 0;
  std::size_t stride = 1;
  double max_jump_probability = 0.0;

  std::size_t index_of(const std::string& name) const;
  const std::vector<double>& mean_of(const std::string& name) const { return mean[index_of(name)]; }
  const std::vector<double>& std_error_of(const std::string& name) const {
    return std_error[index_of(name)];
  }
};

struct TrajectoryFailure {
  long long trajectory_id = 0;
  std::string message;
};

struct EnsembleOptions {
  int workers = 0;  // 0: default_workers()
  bool keep_records = false;
};

struct EnsembleResult {
  EnsembleStatistics stats;
  std::vector<TrajectoryRecord> records;  // index order; empty unless kept
  std::vector<TrajectoryFailure> failures;
};

// Trajectory i uses RngStream(config.master_seed, i). Failed trajectories are
// dropped from the statistics; more than 1% failures throws SimulationError.
EnsembleResult run_ensemble(const ModelSpec& model, const RunConfig& config,
                            const EnsembleOptions& options = {});

// Mean and standard error over records, summed in the order given.
EnsembleStatistics aggregate(std::span<const TrajectoryRecord> records);

struct FitResult {
  double rate = 0.0;
  double intercept = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double residual_rms = 0.0;
  std::size_t n_points = 0;
};

// Least-squares line through (t, log value) for t in [t_lo, t_hi]; rate is
// minus the slope. Needs at least 10 points.
FitResult fit_exponential_rate(std::span<const double> times, std::span<const double> values,
                               double t_lo, double t_hi);

struct FitWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

// Starts at `skip` and ends before the first sample with mean - 2 se < floor.
FitWindow default_fit_window(std::span<const double> times, std::span<const double> mean,
                             std::span<const double> std_error, double skip, double floor = 0.02);

struct RateEstimate {
  FitResult fit;
  double std_error = 0.0;  // delete-one-batch jackknife
  int n_batches = 0;
};

using SampleTransform = std::function<double(double)>;

// Fits the ensemble mean of transform(observable) over `window` and estimates
// the rate's standard error from contiguous trajectory batches.
RateEstimate fit_rate_with_error(std::span<const TrajectoryRecord> records, const std::string& name,
                                 FitWindow window, const SampleTransform& transform = {},
                                 int n_batches = 20);

// Ensemble mean and standard error of transform(observable).
void transformed_statistics(std::span<const TrajectoryRecord> records, const std::string& name,
                            const SampleTransform& transform, std::vector<double>& mean,
                            std::vector<double>& std_error);

}  // namespace qzeno
