#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qzeno/ensemble.hpp"

namespace qzeno {

struct CriterionResult {
  int id = 0;
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  std::string tolerance;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct ValidationOptions {
  int workers = 0;
  int n_trajectories = 1000;
  // Integrator for every stochastic and deterministic run in the suites.
  Integrator integrator = Integrator::rk4;
  std::uint64_t seed = kDefaultSeed;
  std::ostream* log = nullptr;  // progress messages, may be null
};

std::vector<std::string> suite_names();
// Criterion ids run by a suite; throws ConfigError for an unknown suite.
std::vector<int> suite_criteria(const std::string& suite);

// Holds ensembles shared between criteria of one validation run.
class ValidationContext {
 public:
  explicit ValidationContext(ValidationOptions options);

  const ValidationOptions& options() const { return options_; }
  // Monte Carlo tolerances grow by sqrt(1000 / n) below 1000 trajectories.
  double tolerance_scale() const;

  RunConfig config_for(const std::string& key) const;
  const EnsembleResult& ensemble(const std::string& key);
  void log(const std::string& message) const;

 private:
  ValidationOptions options_;
  std::map<std::string, std::unique_ptr<EnsembleResult>> cache_;
};

CriterionResult run_criterion(int id, ValidationContext& context);
std::vector<CriterionResult> run_suite(const std::string& suite, const ValidationOptions& options,
                                       std::ostream* report = nullptr);

// One machine-readable line: id, name, measured, expected, tolerance, verdict, detail.
std::string format_result(const CriterionResult& result);

}  // namespace qzeno
