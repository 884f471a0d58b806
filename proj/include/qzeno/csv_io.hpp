#pragma once

#include <iosfwd>
#include <string>

#include "qzeno/ensemble.hpp"

namespace qzeno {

// Header `t,<obs>_mean,<obs>_stderr,...`; numbers carry 17 significant digits
// so reading them back gives the same doubles.
void write_ensemble_csv(std::ostream& out, const EnsembleStatistics& stats);
void write_ensemble_csv(const std::string& path, const EnsembleStatistics& stats);

// Restores times, names, means and standard errors. Counters that are not
// part of the CSV stay at their defaults. Throws DomainError on bad input.
EnsembleStatistics read_ensemble_csv(std::istream& in);
EnsembleStatistics read_ensemble_csv(const std::string& path);

// Header `t,<obs>...,jump`.
void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record);
void write_trajectory_csv(const std::string& path, const TrajectoryRecord& record);

std::string format_number(double v);

}  // namespace qzeno
