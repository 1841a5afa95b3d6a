#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "carfollow/integrator.hpp"
#include "carfollow/scenario.hpp"

namespace carfollow {

inline constexpr double kReferenceStep = 1e-4;  // s

/// Mean absolute speed difference of one vehicle over the samples t_j,
/// j >= 1 (the shared initial condition is excluded).
double error_norm_speed(const TrajectoryRecord& num,
                        const TrajectoryRecord& ref, std::size_t vehicle);
/// Same, averaged over all vehicles.
double error_norm_all(const TrajectoryRecord& num, const TrajectoryRecord& ref);

/// Acceleration-function evaluations per vehicle and simulated second.
double complexity(Scheme scheme, double h);

/// RK4 runs at h_ref and 2 h_ref with compensated accumulation, plus a plain
/// run at h_ref to measure how far ordinary double rounding drifts.
struct ReferenceSolution {
  TrajectoryRecord record;       // RK4 at h_ref, compensated
  double h_ref = kReferenceStep;
  /// Norm between the runs at h_ref and 2 h_ref; bounds the reference error.
  double comparator_error = 0.0;
  /// Norm between the plain and compensated runs at h_ref. Errors of plain
  /// runs below about this level are rounding noise, not truncation.
  double roundoff_floor = 0.0;
  std::size_t error_vehicle = 0;
};

ReferenceSolution compute_reference(const ScenarioSpec& spec,
                                    double h_ref = kReferenceStep,
                                    unsigned workers = 1);

struct ConvergencePoint {
  double h = 0.0;
  double complexity = 0.0;
  double epsilon = 0.0;  // NaN when crashed
  bool crashed = false;
};

struct OrderFit {
  double order = 0.0;      // slope of log(eps) over log(h)
  double prefactor = 0.0;  // eps ~ prefactor * h^order
  std::vector<double> fit_steps;
};

struct FitOptions {
  double max_h = 0.5;
  /// Points with eps <= floor_factor * floor are dropped.
  double floor = 0.0;
  double floor_factor = 10.0;
};

/// Least-squares fit of log eps = log A + p log h over the usable points.
/// Throws Error(kInsufficientPoints) with fewer than three.
OrderFit estimate_order(std::span<const ConvergencePoint> points,
                        const FitOptions& options = {});

struct ConvergenceResult {
  Scheme scheme = Scheme::kEuler;
  std::vector<ConvergencePoint> points;  // ascending h
  std::optional<OrderFit> fit;
};

/// 16 divisors of 2.4 s, log-spaced from 2.4 s down to 0.002 s.
std::vector<double> default_step_sizes();

struct StudyOptions {
  std::vector<Scheme> schemes{std::begin(kAllSchemes), std::end(kAllSchemes)};
  std::vector<double> steps = default_step_sizes();
  FitOptions fit;
  unsigned workers = 1;
  double reference_step = kReferenceStep;  // used by run_study
};

/// Runs every (scheme, h) cell against the reference and fits the orders.
/// Crashed cells are kept as crashed points and excluded from the fit.
std::vector<ConvergenceResult> convergence_study(
    const ScenarioSpec& spec, const ReferenceSolution& reference,
    const StudyOptions& options);

struct StudyReport {
  ReferenceSolution reference;
  std::vector<ConvergenceResult> results;

  /// Smallest finite error over all cells, or NaN if there is none.
  double smallest_epsilon() const;
  /// comparator_error below 1% of the smallest reported error.
  bool reference_valid() const;
  const ConvergenceResult* find(Scheme scheme) const;
};

StudyReport run_study(const ScenarioSpec& spec, const StudyOptions& options);

/// Error of a result at complexity c by log-log interpolation between its
/// non-crashed points; nullopt outside the sampled range.
std::optional<double> error_at_complexity(const ConvergenceResult& result,
                                          double c);

/// Reads CFBENCH_WORKERS, defaulting to the hardware concurrency.
unsigned default_worker_count();

}  // namespace carfollow
