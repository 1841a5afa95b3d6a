#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "carfollow/integrator.hpp"
#include "carfollow/model.hpp"

namespace carfollow {

inline constexpr double kVehicleLength = 5.0;       // m
inline constexpr double kRecordInterval = 2.4;      // s
inline constexpr double kLightDistance = 670.0;     // m

/// Exogenous lane change in front of the test vehicle (vehicle 1): the gap
/// shrinks by gap_factor and the new leader drives at leader_speed_after.
struct CutInEvent {
  double time = 0.0;
  double gap_factor = 1.0;
  double leader_speed_after = 0.0;
};

struct ScenarioSpec {
  std::string name;
  Model model;
  LeaderBoundary boundary;
  std::vector<double> lengths;
  PlatoonState initial;
  /// Samples are taken at k * record_interval for all k with
  /// k * record_interval <= t_max; the run ends at the last sample.
  double t_max = 60.0;
  double record_interval = kRecordInterval;
  std::vector<CutInEvent> events;
  /// Vehicle whose speed error enters the single-trajectory norm.
  std::size_t error_vehicle = 0;

  std::size_t size() const { return initial.size(); }
  /// Number of recording intervals covered by the run.
  std::size_t record_count() const;
  double t_end() const { return record_interval * double(record_count()); }

  void validate() const;
};

/// Queue of n vehicles at rest behind a light that turns green at t = 0; a
/// red light light_distance ahead is a standing virtual vehicle of length 0.
ScenarioSpec build_start_stop(const Model& model, std::size_t n,
                              double light_distance, double t_max);

/// Leader on a prescribed speed profile followed by n_followers vehicles in
/// equilibrium at the profile's initial speed.
ScenarioSpec build_external_leader(const Model& model, std::size_t n_followers,
                                   const SpeedProfile& profile, double t_max);

/// Test vehicle behind a constant-speed virtual leader, perturbed by cut-ins.
ScenarioSpec build_cutin(const Model& model, double leader_speed,
                         std::vector<CutInEvent> events, double t_max);

/// 14 m/s, brake at -2 m/s^2 on [10, 15), hold, accelerate at +1 m/s^2 on
/// [25, 35), hold.
SpeedProfile default_leader_profile();
std::vector<CutInEvent> default_cutin_events();
inline constexpr double kCutInLeaderSpeed = 12.0;

struct TrajectoryRecord {
  Scheme scheme = Scheme::kRk4;
  double h = 0.0;
  bool crashed = false;
  std::string crash_message;
  std::vector<double> times;
  // Indexed [sample][vehicle].
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> v;
  std::vector<std::vector<double>> gap;
  std::vector<std::vector<double>> acc;

  std::size_t sample_count() const { return times.size(); }
  std::size_t vehicle_count() const { return v.empty() ? 0 : v.front().size(); }
};

/// Plain accumulation is the scheme as written; compensated carries the
/// rounding error of each state update (used for reference solutions,
/// where hundreds of thousands of small increments would otherwise drift).
enum class Accumulation { kPlain, kCompensated };

/// Integrates the scenario with fixed step h and records every
/// record_interval. A crash ends the run early with crashed = true.
/// Throws Error(kStepMismatch) if record_interval / h is not an integer.
TrajectoryRecord run(const ScenarioSpec& spec, Scheme scheme, double h,
                     Accumulation accumulation = Accumulation::kPlain);

/// Number of steps of size h per recording interval, or kStepMismatch.
std::size_t steps_per_interval(double interval, double h);

/// Step index at which an event scheduled at time t takes effect.
std::size_t snapped_step(double t, double h);

// Profile diagnostics on a uniformly sampled acceleration series.

/// Sample indices k where a[k+1] - a[k] is a jump: larger than min_jump and
/// more than ratio times the neighbouring increments.
std::vector<std::size_t> find_discontinuities(std::span<const double> a,
                                              double min_jump = 1e-3,
                                              double ratio = 10.0);

/// Sample indices k where the slope of a changes abruptly: the second
/// difference at k exceeds min_slope_jump * dt and ratio times the second
/// differences three samples away on both sides.
std::vector<std::size_t> find_kinks(std::span<const double> a, double dt,
                                    double min_slope_jump = 1e-2,
                                    double ratio = 10.0);

/// Acceleration series of one vehicle taken from a record.
std::vector<double> acceleration_series(const TrajectoryRecord& record,
                                        std::size_t vehicle);

}  // namespace carfollow
