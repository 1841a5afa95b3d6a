#include "carfollow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "carfollow/error.hpp"

namespace carfollow {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw Error(ErrorCode::kInvalidArgument, message);
}

void append_sample(TrajectoryRecord& rec, const ScenarioSpec& spec,
                   const PlatoonState& state, double t) {
  Derivative d = rhs(state, spec.model, spec.boundary, spec.lengths);
  // A stopped vehicle stays put: its effective acceleration is zero.
  for (std::size_t i = 0; i < d.dv.size(); ++i) {
    if (state.v[i] <= 0.0 && d.dv[i] < 0.0) d.dv[i] = 0.0;
  }
  rec.times.push_back(t);
  rec.x.push_back(state.x);
  rec.v.push_back(state.v);
  rec.gap.push_back(gaps(state, spec.boundary, spec.lengths));
  rec.acc.push_back(std::move(d.dv));
}

void apply_cutin(PlatoonState& state, const ScenarioSpec& spec,
                 const CutInEvent& ev) {
  const double gap = state.x[0] - state.x[1] - spec.lengths[0];
  state.x[0] = state.x[1] + spec.lengths[0] + ev.gap_factor * gap;
  state.v[0] = ev.leader_speed_after;
  if (state.compensated()) {
    state.x_lo[0] = 0.0;
    state.v_lo[0] = 0.0;
  }
}

}  // namespace

std::size_t ScenarioSpec::record_count() const {
  if (!(record_interval > 0.0) || !(t_max > 0.0)) return 0;
  return static_cast<std::size_t>(std::floor(t_max / record_interval + 1e-9));
}

void ScenarioSpec::validate() const {
  const std::size_t n = size();
  require(n >= 1, "scenario needs at least one vehicle");
  require(initial.v.size() == n, "initial x and v differ in length");
  require(lengths.size() == n, "one vehicle length per vehicle required");
  require(record_interval > 0.0, "record interval must be positive");
  require(t_max > 0.0 && record_count() >= 1,
          "t_max must cover at least one recording interval");
  require(error_vehicle < n, "error vehicle index out of range");
  for (double l : lengths) require(l >= 0.0, "vehicle lengths must be >= 0");
  for (double v : initial.v) require(v >= 0.0, "initial speeds must be >= 0");
  boundary.validate();
  if (boundary.type == LeaderBoundary::Type::kExternalProfile) {
    // Breakpoints are checked by the boundary; the last segment must not
    // drive the speed negative before the run ends.
    require(boundary.profile.speed(t_end()) >= -1e-12,
            "leader profile speed becomes negative before t_max");
  }
  const auto s = gaps(initial, boundary, lengths);
  for (double gap : s) require(gap > 0.0, "initial gaps must be positive");

  if (!events.empty()) {
    require(n >= 2, "cut-in events need a test vehicle behind the leader");
    require(boundary.type == LeaderBoundary::Type::kExternalProfile,
            "cut-in events need an externally driven leader");
  }
  double last = 0.0;
  for (const CutInEvent& ev : events) {
    require(ev.time > last && ev.time < t_max,
            "events must be sorted and lie inside (0, t_max)");
    require(ev.gap_factor > 0.0 && ev.gap_factor <= 1.0,
            "cut-in gap factor must lie in (0, 1]");
    require(ev.leader_speed_after >= 0.0,
            "speed after a cut-in must be non-negative");
    last = ev.time;
  }
}

ScenarioSpec build_start_stop(const Model& model, std::size_t n,
                              double light_distance, double t_max) {
  require(n >= 1, "start-stop scenario needs at least one vehicle");
  require(light_distance > 0.0, "light distance must be positive");
  ScenarioSpec spec;
  spec.name = "start_stop";
  spec.model = model;
  spec.boundary = LeaderBoundary::standing_obstacle(light_distance);
  spec.lengths.assign(n, kVehicleLength);
  const double gap = model.standing_gap();
  spec.initial.t = 0.0;
  spec.initial.v.assign(n, 0.0);
  spec.initial.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    spec.initial.x[i] = 0.0 - double(i) * (kVehicleLength + gap);
  }
  spec.t_max = t_max;
  spec.error_vehicle = std::min<std::size_t>(9, n - 1);
  spec.validate();
  return spec;
}

ScenarioSpec build_external_leader(const Model& model, std::size_t n_followers,
                                   const SpeedProfile& profile, double t_max) {
  require(n_followers >= 10,
          "external-leader scenario needs at least 10 followers");
  const std::size_t n = n_followers + 1;
  const double v_init = profile.initial_speed();
  const double gap = model.equilibrium_gap(v_init);
  ScenarioSpec spec;
  spec.name = "external_leader";
  spec.model = model;
  spec.boundary = LeaderBoundary::external(profile);
  spec.lengths.assign(n, kVehicleLength);
  spec.initial.v.assign(n, v_init);
  spec.initial.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    spec.initial.x[i] = 0.0 - double(i) * (kVehicleLength + gap);
  }
  spec.t_max = t_max;
  spec.error_vehicle = 10;
  spec.validate();
  return spec;
}

ScenarioSpec build_cutin(const Model& model, double leader_speed,
                         std::vector<CutInEvent> events, double t_max) {
  const double gap = model.equilibrium_gap(leader_speed);
  ScenarioSpec spec;
  spec.name = "cut_in";
  spec.model = model;
  spec.boundary = LeaderBoundary::external(SpeedProfile::constant(leader_speed));
  spec.lengths.assign(2, kVehicleLength);
  spec.initial.v.assign(2, leader_speed);
  spec.initial.x = {kVehicleLength + gap, 0.0};
  spec.t_max = t_max;
  spec.events = std::move(events);
  spec.error_vehicle = 1;
  spec.validate();
  return spec;
}

SpeedProfile default_leader_profile() {
  return SpeedProfile(14.0, {{10.0, -2.0}, {15.0, 0.0}, {25.0, 1.0}, {35.0, 0.0}});
}

std::vector<CutInEvent> default_cutin_events() {
  return {{20.0, 0.5, 10.0}, {50.0, 0.5, 8.0}, {80.0, 0.5, 6.0}};
}

std::size_t steps_per_interval(double interval, double h) {
  if (!(h > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "step size must be positive");
  }
  const double ratio = interval / h;
  const double k = std::round(ratio);
  if (k < 1.0 || std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(ErrorCode::kStepMismatch,
                "recording interval " + std::to_string(interval) +
                    " s is not an integer multiple of h = " +
                    std::to_string(h) + " s");
  }
  return static_cast<std::size_t>(k);
}

std::size_t snapped_step(double t, double h) {
  return static_cast<std::size_t>(std::llround(t / h));
}

TrajectoryRecord run(const ScenarioSpec& spec, Scheme scheme, double h,
                     Accumulation accumulation) {
  spec.validate();
  const std::size_t per_record = steps_per_interval(spec.record_interval, h);
  const std::size_t records = spec.record_count();
  const std::size_t total_steps = per_record * records;

  std::vector<std::size_t> event_steps;
  for (const CutInEvent& ev : spec.events) {
    event_steps.push_back(snapped_step(ev.time, h));
  }

  TrajectoryRecord rec;
  rec.scheme = scheme;
  rec.h = h;

  const Dynamics dynamics(spec.model, spec.boundary, spec.lengths);
  const RhsFunction f = [&dynamics](const PlatoonState& s) {
    return dynamics(s);
  };

  PlatoonState state = spec.initial;
  state.t = 0.0;
  state.x_lo.clear();
  state.v_lo.clear();
  if (accumulation == Accumulation::kCompensated) state.enable_compensation();
  std::size_t next_event = 0;
  try {
    append_sample(rec, spec, state, 0.0);
    for (std::size_t j = 1; j <= total_steps; ++j) {
      state = step(scheme, state, h, f);
      state.t = double(j) * h;
      while (next_event < event_steps.size() && event_steps[next_event] <= j) {
        apply_cutin(state, spec, spec.events[next_event]);
        ++next_event;
      }
      if (j % per_record == 0) {
        append_sample(rec, spec, state,
                      double(j / per_record) * spec.record_interval);
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kCrash) throw;
    rec.crashed = true;
    rec.crash_message = e.what();
  }
  return rec;
}

std::vector<std::size_t> find_discontinuities(std::span<const double> a,
                                              double min_jump, double ratio) {
  std::vector<std::size_t> out;
  if (a.size() < 2) return out;
  const std::size_t m = a.size() - 1;
  auto d = [&](std::size_t k) { return std::abs(a[k + 1] - a[k]); };
  for (std::size_t k = 0; k < m; ++k) {
    const double jump = d(k);
    if (jump <= min_jump) continue;
    double neighbour = 0.0;
    if (k >= 2) neighbour = std::max(neighbour, d(k - 2));
    if (k + 2 < m) neighbour = std::max(neighbour, d(k + 2));
    if (jump > ratio * neighbour) out.push_back(k);
  }
  return out;
}

std::vector<std::size_t> find_kinks(std::span<const double> a, double dt,
                                    double min_slope_jump, double ratio) {
  std::vector<std::size_t> out;
  if (a.size() < 3) return out;
  auto d2 = [&](std::size_t k) {
    return std::abs(a[k + 1] - 2.0 * a[k] + a[k - 1]);
  };
  for (std::size_t k = 1; k + 1 < a.size(); ++k) {
    const double c = d2(k);
    if (c <= min_slope_jump * dt) continue;
    double neighbour = 0.0;
    if (k >= 4) neighbour = std::max(neighbour, d2(k - 3));
    if (k + 4 < a.size()) neighbour = std::max(neighbour, d2(k + 3));
    if (c > ratio * neighbour) out.push_back(k);
  }
  return out;
}

std::vector<double> acceleration_series(const TrajectoryRecord& record,
                                        std::size_t vehicle) {
  std::vector<double> out;
  out.reserve(record.acc.size());
  for (const auto& row : record.acc) out.push_back(row.at(vehicle));
  return out;
}

}  // namespace carfollow
