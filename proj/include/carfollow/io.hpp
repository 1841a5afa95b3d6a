#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "carfollow/convergence.hpp"
#include "carfollow/scenario.hpp"

namespace carfollow {

/// Shortest text that reads back to the same double ("%.17g"); infinity is
/// "inf", NaN the empty string.
std::string format_double(double x);

// Trajectory CSV: "# key=value" comment lines, then the header
// t,vehicle_id,x,v,gap,acc and one row per (sample, vehicle). The leader's
// gap is "inf" when it has no leader.

using CsvMetadata = std::map<std::string, std::string>;

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record,
                          const CsvMetadata& meta = {});

struct TrajectoryCsv {
  TrajectoryRecord record;
  CsvMetadata meta;
};

/// Inverse of write_trajectory_csv. Error(kIo) on malformed input.
TrajectoryCsv read_trajectory_csv(std::istream& in);

/// Long format, one row per (scheme, h): scenario,scheme,h,C,epsilon,crashed.
/// A crashed cell has an empty epsilon.
void write_convergence_csv(std::ostream& out, const std::string& scenario,
                           const std::vector<ConvergenceResult>& results);

/// Gnuplot script drawing eps over C on log-log axes, one curve per scheme.
/// The data is inlined, so the script is self-contained.
std::string gnuplot_script(const std::string& scenario,
                           const std::vector<ConvergenceResult>& results,
                           const std::string& image_file);

/// Human-readable study summary: reference validation line and one fit
/// line per scheme.
std::string study_summary(const std::string& scenario, const StudyReport& report);

/// Writes a file through a temporary and renames it into place.
void write_file(const std::string& path, const std::string& contents);

}  // namespace carfollow
