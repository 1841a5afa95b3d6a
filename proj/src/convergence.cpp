#include "carfollow/convergence.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "carfollow/error.hpp"

namespace carfollow {

namespace {

void check_comparable(const TrajectoryRecord& num,
                      const TrajectoryRecord& ref) {
  if (num.crashed || ref.crashed) {
    throw Error(ErrorCode::kInvalidArgument,
                "error norms are undefined for crashed runs");
  }
  bool same = num.times.size() == ref.times.size() &&
              num.vehicle_count() == ref.vehicle_count();
  for (std::size_t k = 0; same && k < num.times.size(); ++k) {
    same = std::abs(num.times[k] - ref.times[k]) <= 1e-9;
  }
  if (!same) {
    throw Error(ErrorCode::kGridMismatch,
                "trajectory records are sampled on different grids");
  }
  if (num.times.size() < 2) {
    throw Error(ErrorCode::kGridMismatch,
                "error norms need at least one sample after t = 0");
  }
}

// Runs task(i) for i in [0, count) on up to `workers` threads. The first
// exception is rethrown after all threads have joined.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& task) {
  workers = std::max(1u, std::min<unsigned>(workers, unsigned(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

double error_norm_speed(const TrajectoryRecord& num,
                        const TrajectoryRecord& ref, std::size_t vehicle) {
  check_comparable(num, ref);
  if (vehicle >= num.vehicle_count()) {
    throw Error(ErrorCode::kInvalidArgument, "vehicle index out of range");
  }
  const std::size_t m = num.times.size() - 1;
  double sum = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    sum += std::abs(num.v[j][vehicle] - ref.v[j][vehicle]);
  }
  return sum / double(m);
}

double error_norm_all(const TrajectoryRecord& num,
                      const TrajectoryRecord& ref) {
  check_comparable(num, ref);
  const std::size_t n = num.vehicle_count();
  const std::size_t m = num.times.size() - 1;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      sum += std::abs(num.v[j][i] - ref.v[j][i]);
    }
  }
  return sum / double(n * m);
}

double complexity(Scheme scheme, double h) {
  if (!(h > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "step size must be positive");
  }
  return double(evals_per_step(scheme)) / h;
}

ReferenceSolution compute_reference(const ScenarioSpec& spec, double h_ref,
                                    unsigned workers) {
  TrajectoryRecord runs[3];
  const double steps[3] = {h_ref, 2.0 * h_ref, h_ref};
  const Accumulation acc[3] = {Accumulation::kCompensated,
                               Accumulation::kCompensated, Accumulation::kPlain};
  parallel_for(3, workers, [&](std::size_t i) {
    runs[i] = run(spec, Scheme::kRk4, steps[i], acc[i]);
  });
  for (const auto& r : runs) {
    if (r.crashed) {
      throw Error(ErrorCode::kCrash,
                  "reference run at h = " + std::to_string(r.h) +
                      " s crashed: " + r.crash_message);
    }
  }
  ReferenceSolution ref;
  ref.h_ref = h_ref;
  ref.error_vehicle = spec.error_vehicle;
  ref.comparator_error = error_norm_speed(runs[1], runs[0], spec.error_vehicle);
  ref.roundoff_floor = error_norm_speed(runs[2], runs[0], spec.error_vehicle);
  ref.record = std::move(runs[0]);
  return ref;
}

OrderFit estimate_order(std::span<const ConvergencePoint> points,
                        const FitOptions& options) {
  OrderFit fit;
  std::vector<double> lx, ly;
  for (const ConvergencePoint& p : points) {
    if (p.crashed || !std::isfinite(p.epsilon) || !(p.epsilon > 0.0)) continue;
    if (p.h > options.max_h * (1.0 + 1e-12)) continue;
    if (p.epsilon <= options.floor_factor * options.floor) continue;
    fit.fit_steps.push_back(p.h);
    lx.push_back(std::log(p.h));
    ly.push_back(std::log(p.epsilon));
  }
  if (lx.size() < 3) {
    throw Error(ErrorCode::kInsufficientPoints,
                "order fit needs at least 3 usable points, got " +
                    std::to_string(lx.size()));
  }
  const double n = double(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) {
    throw Error(ErrorCode::kInsufficientPoints,
                "order fit needs at least two distinct step sizes");
  }
  fit.order = sxy / sxx;
  fit.prefactor = std::exp(my - fit.order * mx);
  return fit;
}

std::vector<double> default_step_sizes() {
  return {2.4,   1.2,   0.8,   0.48,  0.3,    0.2,   0.12,  0.08,
          0.048, 0.03,  0.02,  0.012, 0.008, 0.0048, 0.003, 0.002};
}

std::vector<ConvergenceResult> convergence_study(
    const ScenarioSpec& spec, const ReferenceSolution& reference,
    const StudyOptions& options) {
  std::vector<double> steps = options.steps;
  std::sort(steps.begin(), steps.end());
  for (double h : steps) steps_per_interval(spec.record_interval, h);

  const std::size_t ns = options.schemes.size();
  const std::size_t nh = steps.size();
  std::vector<ConvergenceResult> results(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    results[s].scheme = options.schemes[s];
    results[s].points.resize(nh);
  }

  parallel_for(ns * nh, options.workers, [&](std::size_t cell) {
    const std::size_t s = cell / nh;
    const std::size_t k = cell % nh;
    const Scheme scheme = options.schemes[s];
    const double h = steps[k];
    ConvergencePoint& p = results[s].points[k];
    p.h = h;
    p.complexity = complexity(scheme, h);
    const TrajectoryRecord rec = run(spec, scheme, h);
    if (rec.crashed) {
      p.crashed = true;
      p.epsilon = std::numeric_limits<double>::quiet_NaN();
    } else {
      p.epsilon = error_norm_speed(rec, reference.record, spec.error_vehicle);
    }
  });

  FitOptions fit_options = options.fit;
  fit_options.floor = std::max({fit_options.floor, reference.comparator_error,
                                reference.roundoff_floor});
  for (auto& r : results) {
    try {
      r.fit = estimate_order(r.points, fit_options);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInsufficientPoints) throw;
    }
  }
  return results;
}

double StudyReport::smallest_epsilon() const {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : results) {
    for (const auto& p : r.points) {
      if (p.crashed || !std::isfinite(p.epsilon)) continue;
      if (!(best <= p.epsilon)) best = p.epsilon;
    }
  }
  return best;
}

bool StudyReport::reference_valid() const {
  const double smallest = smallest_epsilon();
  return std::isfinite(smallest) &&
         reference.comparator_error < 0.01 * smallest;
}

const ConvergenceResult* StudyReport::find(Scheme scheme) const {
  for (const auto& r : results) {
    if (r.scheme == scheme) return &r;
  }
  return nullptr;
}

StudyReport run_study(const ScenarioSpec& spec, const StudyOptions& options) {
  StudyReport report;
  report.reference =
      compute_reference(spec, options.reference_step, options.workers);
  report.results = convergence_study(spec, report.reference, options);
  return report;
}

std::optional<double> error_at_complexity(const ConvergenceResult& result,
                                          double c) {
  std::vector<std::pair<double, double>> pts;  // (log C, log eps)
  for (const auto& p : result.points) {
    if (p.crashed || !(p.epsilon > 0.0) || !std::isfinite(p.epsilon)) continue;
    pts.emplace_back(std::log(p.complexity), std::log(p.epsilon));
  }
  std::sort(pts.begin(), pts.end());
  const double lc = std::log(c);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (std::abs(pts[k].first - lc) <= 1e-12) return std::exp(pts[k].second);
    if (k + 1 < pts.size() && pts[k].first < lc && lc < pts[k + 1].first) {
      const double w = (lc - pts[k].first) / (pts[k + 1].first - pts[k].first);
      return std::exp(pts[k].second + w * (pts[k + 1].second - pts[k].second));
    }
  }
  return std::nullopt;
}

unsigned default_worker_count() {
  if (const char* env = std::getenv("CFBENCH_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return unsigned(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace carfollow
