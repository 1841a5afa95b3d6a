#include "carfollow/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "carfollow/error.hpp"

namespace carfollow {

namespace {

constexpr const char* kTrajectoryHeader = "t,vehicle_id,x,v,gap,acc";

[[noreturn]] void bad_csv(std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::kIo,
              "trajectory CSV line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& field, std::size_t line) {
  if (field.empty()) bad_csv(line, "empty numeric field");
  char* end = nullptr;
  const double x = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) {
    bad_csv(line, "not a number: '" + field + "'");
  }
  return x;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Metadata values must stay on one line.
std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record,
                          const CsvMetadata& meta) {
  out << "# scheme=" << to_string(record.scheme) << '\n';
  out << "# h=" << format_double(record.h) << '\n';
  out << "# crashed=" << (record.crashed ? 1 : 0) << '\n';
  if (record.crashed) {
    out << "# crash_message=" << one_line(record.crash_message) << '\n';
  }
  for (const auto& [key, value] : meta) {
    out << "# " << key << '=' << one_line(value) << '\n';
  }
  out << kTrajectoryHeader << '\n';
  for (std::size_t k = 0; k < record.times.size(); ++k) {
    const std::string t = format_double(record.times[k]);
    for (std::size_t i = 0; i < record.v[k].size(); ++i) {
      out << t << ',' << i << ',' << format_double(record.x[k][i]) << ','
          << format_double(record.v[k][i]) << ','
          << format_double(record.gap[k][i]) << ','
          << format_double(record.acc[k][i]) << '\n';
    }
  }
}

TrajectoryCsv read_trajectory_csv(std::istream& in) {
  TrajectoryCsv result;
  TrajectoryRecord& rec = result.record;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header && line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos || line.size() < 2 || line[1] != ' ') {
        bad_csv(lineno, "comment is not '# key=value'");
      }
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "scheme") {
        try {
          rec.scheme = scheme_from_string(value);
        } catch (const Error&) {
          bad_csv(lineno, "unknown scheme '" + value + "'");
        }
      } else if (key == "h") {
        rec.h = parse_double(value, lineno);
      } else if (key == "crashed") {
        if (value != "0" && value != "1") bad_csv(lineno, "crashed must be 0 or 1");
        rec.crashed = value == "1";
      } else if (key == "crash_message") {
        rec.crash_message = value;
      } else {
        result.meta[key] = value;
      }
      continue;
    }
    if (!header) {
      if (line != kTrajectoryHeader) {
        bad_csv(lineno, std::string("expected header '") + kTrajectoryHeader + "'");
      }
      header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 6) bad_csv(lineno, "expected 6 fields");
    const double t = parse_double(f[0], lineno);
    const double id = parse_double(f[1], lineno);
    if (id < 0 || id != std::floor(id)) bad_csv(lineno, "bad vehicle_id");
    const auto vehicle = static_cast<std::size_t>(id);
    if (vehicle == 0) {
      rec.times.push_back(t);
      rec.x.emplace_back();
      rec.v.emplace_back();
      rec.gap.emplace_back();
      rec.acc.emplace_back();
    } else if (rec.times.empty() || rec.times.back() != t ||
               rec.v.back().size() != vehicle) {
      bad_csv(lineno, "rows must list vehicles 0..n-1 for each sample in order");
    }
    rec.x.back().push_back(parse_double(f[2], lineno));
    rec.v.back().push_back(parse_double(f[3], lineno));
    rec.gap.back().push_back(parse_double(f[4], lineno));
    rec.acc.back().push_back(parse_double(f[5], lineno));
  }
  if (!header) bad_csv(lineno, "missing header");
  for (const auto& row : rec.v) {
    if (row.size() != rec.v.front().size()) {
      bad_csv(lineno, "samples have different vehicle counts");
    }
  }
  return result;
}

void write_convergence_csv(std::ostream& out, const std::string& scenario,
                           const std::vector<ConvergenceResult>& results) {
  out << "scenario,scheme,h,C,epsilon,crashed\n";
  for (const auto& r : results) {
    for (const auto& p : r.points) {
      out << scenario << ',' << to_string(r.scheme) << ','
          << format_double(p.h) << ',' << format_double(p.complexity) << ','
          << (p.crashed ? std::string() : format_double(p.epsilon)) << ','
          << (p.crashed ? 1 : 0) << '\n';
    }
  }
}

std::string gnuplot_script(const std::string& scenario,
                           const std::vector<ConvergenceResult>& results,
                           const std::string& image_file) {
  std::ostringstream g;
  g << "# " << scenario << ": speed error over evaluations per vehicle and second\n";
  g << "set terminal pngcairo size 800,600\n";
  g << "set output '" << image_file << "'\n";
  g << "set logscale xy\n";
  g << "set format y '10^{%L}'\n";
  g << "set xlabel 'numerical complexity C [1/(veh s)]'\n";
  g << "set ylabel 'error of speeds [m/s]'\n";
  g << "set key bottom left\n";
  g << "set grid\n";
  for (const auto& r : results) {
    g << "$" << to_string(r.scheme) << " << EOD\n";
    for (const auto& p : r.points) {
      if (p.crashed || !(p.epsilon > 0.0)) continue;  // no zeros on log axes
      g << format_double(p.complexity) << ' ' << format_double(p.epsilon) << '\n';
    }
    g << "EOD\n";
  }
  g << "plot ";
  for (std::size_t k = 0; k < results.size(); ++k) {
    const std::string name(to_string(results[k].scheme));
    if (k) g << ", \\\n     ";
    g << '$' << name << " using 1:2 with linespoints title '" << name << "'";
  }
  g << '\n';
  return g.str();
}

std::string study_summary(const std::string& scenario, const StudyReport& report) {
  std::ostringstream s;
  const double smallest = report.smallest_epsilon();
  s << "scenario " << scenario << '\n';
  s << "reference: h_ref=" << format_double(report.reference.h_ref)
    << " comparator_error=" << format_double(report.reference.comparator_error)
    << " smallest_epsilon=" << format_double(smallest)
    << " -> " << (report.reference_valid() ? "valid" : "NOT valid")
    << " (needs comparator < 1% of smallest epsilon)\n";
  for (const auto& r : report.results) {
    s << to_string(r.scheme) << ": ";
    if (r.fit) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "p=%.3f A=%.4g over %zu steps", r.fit->order,
                    r.fit->prefactor, r.fit->fit_steps.size());
      s << buf;
    } else {
      s << "no fit (fewer than 3 usable points)";
    }
    s << '\n';
  }
  return s.str();
}

void write_file(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot rename " + tmp.string() + " to " +
                                    target.string() + ": " + ec.message());
  }
}

}  // namespace carfollow
