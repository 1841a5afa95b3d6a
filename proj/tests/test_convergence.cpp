#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "carfollow/convergence.hpp"
#include "carfollow/error.hpp"

using namespace carfollow;
using doctest::Approx;

namespace {

TrajectoryRecord record(std::vector<std::vector<double>> v, double dt = 2.4) {
  TrajectoryRecord r;
  for (std::size_t k = 0; k < v.size(); ++k) {
    r.times.push_back(dt * double(k));
    r.x.emplace_back(v[k].size(), 0.0);
    r.gap.emplace_back(v[k].size(), 10.0);
    r.acc.emplace_back(v[k].size(), 0.0);
  }
  r.v = std::move(v);
  return r;
}

std::vector<ConvergencePoint> power_law(double a, double p,
                                        const std::vector<double>& hs) {
  std::vector<ConvergencePoint> pts;
  for (double h : hs) pts.push_back({h, 1.0 / h, a * std::pow(h, p), false});
  return pts;
}

const std::vector<double> kSteps{0.48, 0.3, 0.2, 0.12, 0.08, 0.048, 0.03, 0.02};

}  // namespace

TEST_SUITE("convergence") {

TEST_CASE("speed error norm by hand") {
  const TrajectoryRecord ref = record({{0, 0}, {1, 2}, {3, 4}, {5, 6}});
  const TrajectoryRecord num = record({{9, 9}, {1.5, 2}, {2, 4.5}, {5, 3}});
  // Vehicle 0: (0.5 + 1 + 0) / 3; the t = 0 sample is excluded.
  CHECK(error_norm_speed(num, ref, 0) == Approx(0.5));
  // Vehicle 1: (0 + 0.5 + 3) / 3
  CHECK(error_norm_speed(num, ref, 1) == Approx(3.5 / 3.0));
  // All vehicles: (1.5 + 3.5) / 6
  CHECK(error_norm_all(num, ref) == Approx(5.0 / 6.0));
  CHECK_THROWS_AS(error_norm_speed(num, ref, 2), Error);
}

TEST_CASE("norm axioms") {
  const TrajectoryRecord a = record({{0, 1}, {1, 2}, {2, 2}});
  const TrajectoryRecord b = record({{0, 1}, {1.2, 1.9}, {2.5, 2}});
  const TrajectoryRecord c = record({{0, 1}, {0.7, 2.4}, {2.1, 1.1}});
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(error_norm_speed(a, a, i) == 0.0);
    CHECK(error_norm_speed(a, b, i) >= 0.0);
    CHECK(error_norm_speed(a, b, i) == error_norm_speed(b, a, i));
    CHECK(error_norm_speed(a, c, i) <=
          error_norm_speed(a, b, i) + error_norm_speed(b, c, i) + 1e-15);
  }
  CHECK(error_norm_all(a, a) == 0.0);
  CHECK(error_norm_all(a, b) == error_norm_all(b, a));
  CHECK(error_norm_all(a, c) <= error_norm_all(a, b) + error_norm_all(b, c) + 1e-15);
}

TEST_CASE("norms reject incomparable records") {
  const TrajectoryRecord a = record({{0}, {1}, {2}});
  const TrajectoryRecord shifted = record({{0}, {1}, {2}}, 1.2);
  const TrajectoryRecord shorter = record({{0}, {1}});
  const TrajectoryRecord only_t0 = record({{0}});
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;  // no exception
  };
  CHECK(code([&] { error_norm_speed(a, shifted, 0); }) == ErrorCode::kGridMismatch);
  CHECK(code([&] { error_norm_speed(a, shorter, 0); }) == ErrorCode::kGridMismatch);
  CHECK(code([&] { error_norm_speed(only_t0, only_t0, 0); }) ==
        ErrorCode::kGridMismatch);
  TrajectoryRecord crashed = a;
  crashed.crashed = true;
  CHECK(code([&] { error_norm_speed(crashed, a, 0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("numerical complexity") {
  CHECK(complexity(Scheme::kEuler, 0.1) == Approx(10.0));
  CHECK(complexity(Scheme::kBallistic, 0.1) == Approx(10.0));
  CHECK(complexity(Scheme::kTrapezoidal, 0.1) == Approx(20.0));
  CHECK(complexity(Scheme::kRk4, 0.1) == Approx(40.0));
  CHECK(complexity(Scheme::kRk4, 2.4) == Approx(4.0 / 2.4));
  CHECK_THROWS_AS(complexity(Scheme::kRk4, 0.0), Error);
}

TEST_CASE("order fit is exact on power laws") {
  for (double p : {1.0, 2.0, 3.5, 4.0}) {
    const auto pts = power_law(0.03, p, kSteps);
    const OrderFit fit = estimate_order(pts);
    CHECK(std::abs(fit.order - p) < 1e-12);
    CHECK(std::abs(fit.prefactor / 0.03 - 1.0) < 1e-12);
    CHECK(fit.fit_steps.size() == kSteps.size());
  }
}

TEST_CASE("order fit with multiplicative noise") {
  auto pts = power_law(0.05, 2.0, kSteps);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    pts[k].epsilon *= 1.0 + 0.05 * std::sin(1.7 * double(k) + 0.3);
  }
  CHECK(estimate_order(pts).order == Approx(2.0).epsilon(0.1));
}

TEST_CASE("order fit excludes large steps, crashes and floor points") {
  std::vector<double> hs = kSteps;
  hs.insert(hs.begin(), {2.4, 1.2, 0.8});
  auto pts = power_law(0.1, 2.0, hs);
  pts[0].epsilon = 50.0;  // h = 2.4 is outside h <= 0.5 anyway
  pts[1].crashed = true;
  pts[1].epsilon = std::numeric_limits<double>::quiet_NaN();
  OrderFit fit = estimate_order(pts);
  CHECK(fit.order == Approx(2.0));
  CHECK(fit.fit_steps.size() == kSteps.size());

  // Points within 10x of the floor are dropped: 0.1 h^2 <= 10 * 4e-5 means
  // h <= 0.063, which removes 0.048, 0.03, 0.02.
  FitOptions opt;
  opt.floor = 4e-5;
  fit = estimate_order(pts, opt);
  CHECK(fit.fit_steps.size() == kSteps.size() - 3);
  CHECK(fit.order == Approx(2.0));

  opt.floor = 1.0;
  CHECK_THROWS_AS(estimate_order(pts, opt), Error);
  const auto two = power_law(1.0, 1.0, {0.1, 0.2});
  try {
    estimate_order(two);
    FAIL("expected INSUFFICIENT_POINTS");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientPoints);
  }
}

TEST_CASE("default step grid") {
  const auto hs = default_step_sizes();
  REQUIRE(hs.size() == 16);
  CHECK(hs.front() == 2.4);
  CHECK(hs.back() == 0.002);
  for (std::size_t k = 0; k < hs.size(); ++k) {
    CHECK_NOTHROW(steps_per_interval(2.4, hs[k]));
    if (k > 0) {
      CHECK(hs[k] < hs[k - 1]);
      // Roughly log-spaced: ratios between 1.5 and 2.
      CHECK(hs[k - 1] / hs[k] >= 1.5 - 1e-12);
      CHECK(hs[k - 1] / hs[k] <= 2.0 + 1e-12);
    }
  }
  // The reference step is 20 times below the smallest test step.
  CHECK(kReferenceStep == Approx(hs.back() / 20.0));
}

TEST_CASE("error at matched complexity") {
  ConvergenceResult r;
  r.scheme = Scheme::kEuler;
  r.points = power_law(1.0, 1.0, {0.4, 0.2, 0.1});  // C = 2.5, 5, 10
  CHECK(*error_at_complexity(r, 5.0) == Approx(0.2));
  // eps = 1/C, so log-log interpolation is exact.
  CHECK(*error_at_complexity(r, 7.0) == Approx(1.0 / 7.0));
  CHECK_FALSE(error_at_complexity(r, 20.0).has_value());
}

TEST_CASE("equilibrium reference has zero comparator error") {
  const ScenarioSpec s = build_external_leader(Model::idm(IdmParams::standard()), 10,
                                               SpeedProfile::constant(10.0), 4.8);
  const ReferenceSolution ref = compute_reference(s, 1e-3);
  CHECK(ref.comparator_error == Approx(0.0).scale(1.0).epsilon(1e-13));
  CHECK(ref.error_vehicle == 10);
}

TEST_CASE("single step size gives a point but no fit") {
  const ScenarioSpec s =
      build_start_stop(Model::idm(IdmParams::standard()), 20, 670.0, 24.0);
  const ReferenceSolution ref = compute_reference(s, 1e-3);
  StudyOptions opt;
  opt.steps = {0.1};
  const auto results = convergence_study(s, ref, opt);
  REQUIRE(results.size() == 4);
  for (const auto& r : results) {
    CHECK(r.points.size() == 1);
    CHECK_FALSE(r.fit.has_value());
  }
}

TEST_CASE("crashed cells are NaN, never zero") {
  const ScenarioSpec s =
      build_start_stop(Model::idm(IdmParams::standard()), 20, 670.0, 60.0);
  const ReferenceSolution ref = compute_reference(s, 1e-3);
  StudyOptions opt;
  opt.schemes = {Scheme::kRk4};
  opt.steps = {2.4, 0.3};
  const auto results = convergence_study(s, ref, opt);
  const auto& big = results[0].points.back();  // ascending h
  REQUIRE(big.h == 2.4);
  CHECK(big.crashed);
  CHECK(std::isnan(big.epsilon));
  CHECK(results[0].points.front().epsilon > 0.0);
}

TEST_CASE("parallel study equals serial study") {
  const ScenarioSpec s =
      build_start_stop(Model::idm(IdmParams::standard()), 20, 670.0, 24.0);
  const ReferenceSolution ref = compute_reference(s, 1e-3, 2);
  StudyOptions opt;
  opt.steps = {0.3, 0.12, 0.048};
  const auto serial = convergence_study(s, ref, opt);
  opt.workers = 3;
  const auto parallel = convergence_study(s, ref, opt);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    for (std::size_t k = 0; k < serial[i].points.size(); ++k) {
      CHECK(serial[i].points[k].epsilon == parallel[i].points[k].epsilon);
    }
  }
}

TEST_CASE("smooth study: monotone errors and a stable fit") {
  const ScenarioSpec s =
      build_start_stop(Model::idm(IdmParams::standard()), 20, 670.0, 60.0);
  StudyOptions opt;
  opt.workers = default_worker_count();
  const StudyReport rep = run_study(s, opt);
  CHECK(rep.reference_valid());
  FitOptions fo;
  fo.floor = std::max(rep.reference.comparator_error, rep.reference.roundoff_floor);
  for (const auto& r : rep.results) {
    CAPTURE(to_string(r.scheme));
    REQUIRE(r.fit.has_value());
    // Non-increasing in C over the fit range (ascending h = descending C).
    const auto& fs = r.fit->fit_steps;
    for (std::size_t k = 0; k + 1 < r.points.size(); ++k) {
      const auto& p = r.points[k];
      const auto& q = r.points[k + 1];
      const bool in = std::find(fs.begin(), fs.end(), p.h) != fs.end() &&
                      std::find(fs.begin(), fs.end(), q.h) != fs.end();
      if (in) CHECK(p.epsilon <= q.epsilon);
    }
    // Dropping the smallest step from the fit range moves p by less than 0.3.
    std::vector<ConvergencePoint> trimmed;
    for (const auto& p : r.points) {
      if (p.h != fs.front()) trimmed.push_back(p);
    }
    const OrderFit again = estimate_order(trimmed, fo);
    CHECK(std::abs(again.order - r.fit->order) < 0.3);
  }
}

TEST_CASE("worker count from the environment") {
  CHECK(default_worker_count() >= 1u);
}

}  // TEST_SUITE
