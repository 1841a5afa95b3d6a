#include "carfollow/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "carfollow/error.hpp"

namespace carfollow {

SpeedProfile::SpeedProfile(double initial_speed, std::vector<Segment> segments)
    : initial_speed_(initial_speed), segments_(std::move(segments)) {
  if (!std::is_sorted(segments_.begin(), segments_.end(),
                      [](const Segment& a, const Segment& b) {
                        return a.start < b.start;
                      })) {
    throw Error(ErrorCode::kInvalidArgument,
                "speed profile segments must be sorted by start time");
  }
}

double SpeedProfile::acceleration(double t) const {
  double a = 0.0;
  for (const Segment& seg : segments_) {
    // Stage times are computed as j*h + c*h; treat values within rounding
    // distance of a breakpoint as lying on it.
    if (t < seg.start - 1e-9 * std::max(1.0, std::abs(seg.start))) break;
    a = seg.acceleration;
  }
  return a;
}

double SpeedProfile::speed(double t) const {
  double v = initial_speed_;
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const double start = segments_[k].start;
    if (t <= start) break;
    const double end =
        k + 1 < segments_.size() ? std::min(segments_[k + 1].start, t) : t;
    v += segments_[k].acceleration * (end - start);
  }
  return v;
}

LeaderBoundary LeaderBoundary::external(SpeedProfile profile) {
  LeaderBoundary b;
  b.type = Type::kExternalProfile;
  b.profile = std::move(profile);
  return b;
}

LeaderBoundary LeaderBoundary::standing_obstacle(double position) {
  LeaderBoundary b;
  b.type = Type::kStandingObstacle;
  b.obstacle_position = position;
  return b;
}

void LeaderBoundary::validate() const {
  if (type == Type::kStandingObstacle && !std::isfinite(obstacle_position)) {
    throw Error(ErrorCode::kInvalidArgument,
                "standing obstacle position must be finite");
  }
  if (type == Type::kExternalProfile) {
    if (profile.initial_speed() < 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "leader profile speed must be non-negative");
    }
    for (const auto& seg : profile.segments()) {
      if (profile.speed(seg.start) < -1e-12) {
        throw Error(ErrorCode::kInvalidArgument,
                    "leader profile speed negative at t=" +
                        std::to_string(seg.start));
      }
    }
  }
}

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kEuler: return "euler";
    case Scheme::kBallistic: return "ballistic";
    case Scheme::kTrapezoidal: return "trapezoidal";
    case Scheme::kRk4: return "rk4";
  }
  return "unknown";
}

Scheme scheme_from_string(std::string_view name) {
  for (Scheme s : kAllSchemes) {
    if (to_string(s) == name) return s;
  }
  if (name == "heun") return Scheme::kTrapezoidal;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown scheme '" + std::string(name) + "'");
}

int nominal_order(Scheme scheme) {
  switch (scheme) {
    case Scheme::kEuler:
    case Scheme::kBallistic: return 1;
    case Scheme::kTrapezoidal: return 2;
    case Scheme::kRk4: return 4;
  }
  return 0;
}

int evals_per_step(Scheme scheme) { return nominal_order(scheme); }

namespace {

double leader_gap(const PlatoonState& state, const LeaderBoundary& boundary) {
  if (boundary.type == LeaderBoundary::Type::kStandingObstacle) {
    return boundary.obstacle_position - state.x[0];
  }
  return kInfiniteGap;
}

[[noreturn]] void throw_crash(const PlatoonState& state, std::size_t i,
                              double gap) {
  throw Error(ErrorCode::kCrash,
              "vehicle " + std::to_string(i) + " crashed at t=" +
                  std::to_string(state.t) + " (gap " + std::to_string(gap) +
                  " m)");
}

}  // namespace

std::vector<double> gaps(const PlatoonState& state,
                         const LeaderBoundary& boundary,
                         std::span<const double> lengths) {
  std::vector<double> s(state.size());
  if (s.empty()) return s;
  s[0] = leader_gap(state, boundary);
  for (std::size_t i = 1; i < s.size(); ++i) {
    s[i] = state.x[i - 1] - state.x[i] - lengths[i - 1];
  }
  return s;
}

Derivative rhs(const PlatoonState& state, const Model& model,
               const LeaderBoundary& boundary,
               std::span<const double> lengths) {
  const std::size_t n = state.size();
  Derivative d{state.v, std::vector<double>(n)};
  if (n == 0) return d;

  switch (boundary.type) {
    case LeaderBoundary::Type::kFreeFlow:
      d.dv[0] = model.free_acceleration(state.v[0]);
      break;
    case LeaderBoundary::Type::kExternalProfile:
      d.dv[0] = boundary.profile.acceleration(state.t);
      break;
    case LeaderBoundary::Type::kStandingObstacle: {
      const double s = boundary.obstacle_position - state.x[0];
      if (!(s > 0.0)) throw_crash(state, 0, s);
      d.dv[0] = model.acceleration(s, state.v[0], 0.0);
      break;
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double s = state.x[i - 1] - state.x[i] - lengths[i - 1];
    if (!(s > 0.0)) throw_crash(state, i, s);
    d.dv[i] = model.acceleration(s, state.v[i], state.v[i - 1]);
  }
  return d;
}

Dynamics::Dynamics(Model model, LeaderBoundary boundary,
                   std::vector<double> lengths)
    : model_(std::move(model)),
      boundary_(std::move(boundary)),
      lengths_(std::move(lengths)) {
  boundary_.validate();
}

Derivative Dynamics::operator()(const PlatoonState& state) const {
  ++evaluations_;
  return rhs(state, model_, boundary_, lengths_);
}

StopOverride stop_override(double x, double v, double a, double h_tilde) {
  if (v + h_tilde * a < 0.0) {
    // v >= 0 here implies a < 0, so the stopping distance is non-negative.
    return {x - v * v / (2.0 * a), 0.0, true};
  }
  return {x, v, false};
}

namespace {

// State y + c*h*k at time t + c*h, with the stop override applied per
// vehicle using the acceleration of k.
PlatoonState predictor(const PlatoonState& y, const Derivative& k, double c,
                       double h) {
  const double dt = c * h;
  PlatoonState p{y.t + dt, y.x, y.v, {}, {}};
  const bool comp = y.compensated();
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto o = stop_override(y.x[i], y.v[i], k.dv[i], dt);
    if (o.fired) {
      p.x[i] = o.x;
      p.v[i] = 0.0;
    } else {
      p.x[i] = y.x[i] + (dt * k.dx[i] + (comp ? y.x_lo[i] : 0.0));
      p.v[i] = y.v[i] + (dt * k.dv[i] + (comp ? y.v_lo[i] : 0.0));
    }
  }
  return p;
}

// hi + lo == a + b exactly (Knuth's two-sum).
void two_sum(double a, double b, double& hi, double& lo) {
  hi = a + b;
  const double bb = hi - a;
  lo = (a - (hi - bb)) + (b - bb);
}

// out = y + (dx, dv) for vehicle i, carrying the rounding error when y is
// compensated.
void advance(const PlatoonState& y, std::size_t i, double dx, double dv,
             PlatoonState& out) {
  if (!y.compensated()) {
    out.x[i] = y.x[i] + dx;
    out.v[i] = y.v[i] + dv;
    return;
  }
  two_sum(y.x[i], dx + y.x_lo[i], out.x[i], out.x_lo[i]);
  two_sum(y.v[i], dv + y.v_lo[i], out.v[i], out.v_lo[i]);
}

PlatoonState begin_output(const PlatoonState& y, double h) {
  PlatoonState out{y.t + h, y.x, y.v, {}, {}};
  if (y.compensated()) out.enable_compensation();
  return out;
}

// Final-state override: a vehicle ending the step with negative speed is
// placed at the stopping point of the begin-of-step deceleration.
void finalize(const PlatoonState& y, const Derivative& k1, PlatoonState& out) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(out.v[i] < 0.0)) continue;
    const double a = k1.dv[i];
    if (a < 0.0) {
      out.x[i] = y.x[i] - y.v[i] * y.v[i] / (2.0 * a);
      if (out.compensated()) out.x_lo[i] = y.x_lo[i];
    }
    out.v[i] = 0.0;
    if (out.compensated()) out.v_lo[i] = 0.0;
  }
}

void require_positive_step(double h) {
  if (!(h > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "step size must be positive");
  }
}

}  // namespace

PlatoonState step_euler(const PlatoonState& state, double h,
                        const RhsFunction& f) {
  require_positive_step(h);
  const Derivative k1 = f(state);
  PlatoonState out = begin_output(state, h);
  for (std::size_t i = 0; i < state.size(); ++i) {
    advance(state, i, h * k1.dx[i], h * k1.dv[i], out);
  }
  finalize(state, k1, out);
  return out;
}

PlatoonState step_ballistic(const PlatoonState& state, double h,
                            const RhsFunction& f) {
  require_positive_step(h);
  const Derivative k1 = f(state);
  PlatoonState out = begin_output(state, h);
  for (std::size_t i = 0; i < state.size(); ++i) {
    advance(state, i, h * state.v[i] + 0.5 * h * h * k1.dv[i], h * k1.dv[i],
            out);
  }
  finalize(state, k1, out);
  return out;
}

PlatoonState step_trapezoidal(const PlatoonState& state, double h,
                              const RhsFunction& f) {
  require_positive_step(h);
  const Derivative k1 = f(state);
  const Derivative k2 = f(predictor(state, k1, 1.0, h));
  PlatoonState out = begin_output(state, h);
  for (std::size_t i = 0; i < state.size(); ++i) {
    advance(state, i, 0.5 * h * (k1.dx[i] + k2.dx[i]),
            0.5 * h * (k1.dv[i] + k2.dv[i]), out);
  }
  finalize(state, k1, out);
  return out;
}

PlatoonState step_rk4(const PlatoonState& state, double h,
                      const RhsFunction& f) {
  require_positive_step(h);
  const Derivative k1 = f(state);
  const Derivative k2 = f(predictor(state, k1, 0.5, h));
  const Derivative k3 = f(predictor(state, k2, 0.5, h));
  const Derivative k4 = f(predictor(state, k3, 1.0, h));
  const double w = h / 6.0;
  PlatoonState out = begin_output(state, h);
  for (std::size_t i = 0; i < state.size(); ++i) {
    advance(state, i,
            w * (k1.dx[i] + 2.0 * k2.dx[i] + 2.0 * k3.dx[i] + k4.dx[i]),
            w * (k1.dv[i] + 2.0 * k2.dv[i] + 2.0 * k3.dv[i] + k4.dv[i]), out);
  }
  finalize(state, k1, out);
  return out;
}

PlatoonState step(Scheme scheme, const PlatoonState& state, double h,
                  const RhsFunction& f) {
  switch (scheme) {
    case Scheme::kEuler: return step_euler(state, h, f);
    case Scheme::kBallistic: return step_ballistic(state, h, f);
    case Scheme::kTrapezoidal: return step_trapezoidal(state, h, f);
    case Scheme::kRk4: return step_rk4(state, h, f);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown scheme");
}

}  // namespace carfollow
