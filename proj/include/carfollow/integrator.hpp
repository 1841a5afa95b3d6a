#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "carfollow/model.hpp"

namespace carfollow {

/// Positions (front bumpers, leader first) and speeds of a platoon at time t.
struct PlatoonState {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> v;
  // Low-order parts for compensated accumulation (x + x_lo); empty unless
  // enable_compensation() was called. Right-hand sides only see x and v.
  std::vector<double> x_lo;
  std::vector<double> v_lo;

  std::size_t size() const { return x.size(); }
  bool compensated() const { return !x_lo.empty(); }
  void enable_compensation() {
    x_lo.assign(x.size(), 0.0);
    v_lo.assign(v.size(), 0.0);
  }
};

struct Derivative {
  std::vector<double> dx;  // speeds
  std::vector<double> dv;  // accelerations
};

/// Leader speed profile with piecewise-constant acceleration. The
/// acceleration is right-continuous: segment k applies on
/// [segments[k].start, segments[k+1].start).
class SpeedProfile {
 public:
  struct Segment {
    double start = 0.0;
    double acceleration = 0.0;
  };

  SpeedProfile() = default;
  SpeedProfile(double initial_speed, std::vector<Segment> segments);

  static SpeedProfile constant(double speed) { return {speed, {}}; }

  double initial_speed() const { return initial_speed_; }
  const std::vector<Segment>& segments() const { return segments_; }

  double acceleration(double t) const;
  /// Exact speed of the profile (integral of acceleration()).
  double speed(double t) const;

 private:
  double initial_speed_ = 0.0;
  std::vector<Segment> segments_;
};

/// Boundary condition for the first vehicle of the platoon.
struct LeaderBoundary {
  enum class Type { kFreeFlow, kExternalProfile, kStandingObstacle };

  Type type = Type::kFreeFlow;
  SpeedProfile profile;             // kExternalProfile only
  double obstacle_position = 0.0;   // kStandingObstacle only (length zero)

  static LeaderBoundary free_flow() { return {}; }
  static LeaderBoundary external(SpeedProfile profile);
  static LeaderBoundary standing_obstacle(double position);

  void validate() const;
};

enum class Scheme { kEuler, kBallistic, kTrapezoidal, kRk4 };

inline constexpr Scheme kAllSchemes[] = {Scheme::kEuler, Scheme::kBallistic,
                                         Scheme::kTrapezoidal, Scheme::kRk4};

std::string_view to_string(Scheme scheme);
Scheme scheme_from_string(std::string_view name);
int nominal_order(Scheme scheme);
/// Acceleration-function evaluations per vehicle and step.
int evals_per_step(Scheme scheme);

/// Right-hand side of the platoon ODE: dx_i = v_i, dv_1 from the boundary
/// condition, dv_i = a(s_i, v_i, v_{i-1}) for the followers. Throws
/// Error(kCrash) when a gap is not positive.
Derivative rhs(const PlatoonState& state, const Model& model,
               const LeaderBoundary& boundary, std::span<const double> lengths);

/// Bumper-to-bumper gaps; the leader's gap is measured to the obstacle or is
/// kInfiniteGap. Externally driven leaders also report kInfiniteGap.
std::vector<double> gaps(const PlatoonState& state,
                         const LeaderBoundary& boundary,
                         std::span<const double> lengths);

/// Bundles everything rhs() needs and counts its invocations.
class Dynamics {
 public:
  Dynamics(Model model, LeaderBoundary boundary, std::vector<double> lengths);

  Derivative operator()(const PlatoonState& state) const;

  const Model& model() const { return model_; }
  const LeaderBoundary& boundary() const { return boundary_; }
  std::span<const double> lengths() const { return lengths_; }

  std::uint64_t evaluations() const { return evaluations_; }
  void reset_evaluations() { evaluations_ = 0; }

 private:
  Model model_;
  LeaderBoundary boundary_;
  std::vector<double> lengths_;
  mutable std::uint64_t evaluations_ = 0;
};

using RhsFunction = std::function<Derivative(const PlatoonState&)>;

struct StopOverride {
  double x;
  double v;
  bool fired;
};

/// Replaces a step that would end with negative speed by the stopping point
/// of a constant deceleration a starting from (x, v).
StopOverride stop_override(double x, double v, double a, double h_tilde);

PlatoonState step_euler(const PlatoonState& state, double h,
                        const RhsFunction& f);
PlatoonState step_ballistic(const PlatoonState& state, double h,
                            const RhsFunction& f);
PlatoonState step_trapezoidal(const PlatoonState& state, double h,
                              const RhsFunction& f);
PlatoonState step_rk4(const PlatoonState& state, double h,
                      const RhsFunction& f);

PlatoonState step(Scheme scheme, const PlatoonState& state, double h,
                  const RhsFunction& f);

}  // namespace carfollow
