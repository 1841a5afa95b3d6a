#include <doctest.h>

#include <cmath>

#include "carfollow/error.hpp"
#include "carfollow/model.hpp"

using namespace carfollow;
using doctest::Approx;

TEST_SUITE("model") {

TEST_CASE("standard and creep parameter sets") {
  const IdmParams st = IdmParams::standard();
  CHECK(st.v0 == 15.0);
  CHECK(st.T == 1.0);
  CHECK(st.s0 == 2.0);
  CHECK(st.a == 1.0);
  CHECK(st.b == 1.5);
  const IdmParams cr = IdmParams::creep();
  CHECK(cr.v0 == 15.0);
  CHECK(cr.T == 1.0);
  CHECK(cr.s0 == 1.0);
  CHECK(cr.a == 2.0);
  CHECK(cr.b == 1.5);
}

TEST_CASE("IDM acceleration against hand-evaluated values") {
  const IdmParams p = IdmParams::standard();
  // s* = 2 + 10*1 = 12 with no approach term; 1 - (2/3)^4 - (12/20)^2
  CHECK(acc_idm(20.0, 10.0, 10.0, p) == Approx(1.0 - 16.0 / 81.0 - 0.36).epsilon(1e-14));
  // Approaching at 2 m/s: s* = 2 + 10 + 10*2/(2*sqrt(1.5)) = 12 + 10/sqrt(1.5)
  const double s_star = 12.0 + 10.0 / std::sqrt(1.5);
  CHECK(desired_gap(10.0, 8.0, p) == Approx(s_star).epsilon(1e-14));
  CHECK(acc_idm(30.0, 10.0, 8.0, p) ==
        Approx(1.0 - 16.0 / 81.0 - (s_star / 30.0) * (s_star / 30.0)).epsilon(1e-14));
  // At rest behind a stopped leader at gap s0 the two terms cancel.
  CHECK(acc_idm(2.0, 0.0, 0.0, p) == Approx(0.0).scale(1.0));
  // Desired speed on a free road: zero acceleration.
  CHECK(acc_idm(kInfiniteGap, 15.0, 15.0, p) == 0.0);
}

TEST_CASE("desired gap is clamped at zero when the leader is much faster") {
  const IdmParams p = IdmParams::standard();
  // s0 + vT + v dv/(2 sqrt(ab)) with v = 5, dv = -20: 2 + 5 - 100/(2 sqrt 1.5) < 0
  CHECK(desired_gap(5.0, 25.0, p) == 0.0);
  CHECK(acc_idm(1.0, 5.0, 25.0, p) == Approx(free_acceleration_idm(5.0, p)));
}

TEST_CASE("infinite gap switches the interaction term off exactly") {
  const IdmParams p = IdmParams::standard();
  for (double v : {0.0, 3.0, 7.5, 14.0, 15.0, 18.0}) {
    CAPTURE(v);
    CHECK(acc_idm(kInfiniteGap, v, 0.0, p) == free_acceleration_idm(v, p));
    CHECK(acc_idm_plus(kInfiniteGap, v, 0.0, p) == free_acceleration_idm(v, p));
    CHECK(acc_idm_modified_free(kInfiniteGap, v, 0.0, p) ==
          free_acceleration_modified(v, p));
  }
  CHECK(is_infinite_gap(kInfiniteGap));
  CHECK_FALSE(is_infinite_gap(1e300));
}

TEST_CASE("IDM-Plus takes the smaller of free and interaction terms") {
  const IdmParams p = IdmParams::standard();
  // Large gap: free term binds.
  CHECK(acc_idm_plus(500.0, 10.0, 10.0, p) == Approx(1.0 - 16.0 / 81.0));
  // Small gap: interaction term binds, 1 - (12/15)^2.
  CHECK(acc_idm_plus(15.0, 10.0, 10.0, p) == Approx(1.0 - 0.64));
  // Never above plain IDM's free part, never below plain IDM.
  for (double s : {3.0, 10.0, 30.0, 100.0}) {
    for (double v : {0.0, 5.0, 12.0}) {
      CHECK(acc_idm_plus(s, v, v, p) >= acc_idm(s, v, v, p));
      CHECK(acc_idm_plus(s, v, v, p) <= free_acceleration_idm(v, p));
    }
  }
}

TEST_CASE("modified free acceleration jumps at the desired speed") {
  const IdmParams p = IdmParams::standard();
  CHECK(free_acceleration_modified(0.0, p) == 1.0);
  CHECK(free_acceleration_modified(14.999, p) == 1.0);
  CHECK(free_acceleration_modified(15.0, p) == 0.0);
  CHECK(free_acceleration_modified(18.0, p) == Approx(1.0 * (1.0 - 18.0 / 15.0)));
}

TEST_CASE("optimal velocity function") {
  OvmParams p;  // v0 15, beta 1.5, delta_s 8
  const double tb = std::tanh(1.5);
  CHECK(optimal_velocity(0.0, p) == Approx(0.0).scale(1.0));
  CHECK(optimal_velocity(12.0, p) == Approx(15.0 * tb / (1.0 + tb)));
  CHECK(optimal_velocity(1e6, p) == Approx(15.0));
  // Monotone and never negative.
  double prev = 0.0;
  for (double s = 0.0; s < 100.0; s += 0.5) {
    const double v = optimal_velocity(s, p);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(acc_ovm(12.0, 5.0, p) ==
        Approx((15.0 * tb / (1.0 + tb) - 5.0) / p.tau));
}

TEST_CASE("OVM and FVDM with tau = 1 by hand") {
  OvmParams p;
  p.tau = 1.0;
  // v_opt(beta * delta_s) = 15 tanh(1.5) / (1 + tanh(1.5)) = 7.1266...
  const double vopt = 15.0 * std::tanh(1.5) / (1.0 + std::tanh(1.5));
  CHECK(acc_ovm(12.0, 10.0, p) == Approx(vopt - 10.0).epsilon(1e-14));
  CHECK(std::abs(acc_ovm(12.0, 10.0, p) + 2.874) < 1e-3);
  CHECK(acc_ovm(1e9, 0.0, p) == Approx(15.0));
  FvdmParams f;
  f.ovm = p;
  f.lambda = 0.5;
  CHECK(acc_fvdm(12.0, 10.0, 12.0, f) == Approx(vopt - 10.0 + 1.0).epsilon(1e-14));
  CHECK(std::abs(acc_fvdm(12.0, 10.0, 12.0, f) + 1.874) < 1e-3);
  f.lambda = 0.0;
  CHECK(acc_fvdm(12.0, 10.0, 3.0, f) == acc_ovm(12.0, 10.0, p));
}

TEST_CASE("FVDM adds the speed-difference term to OVM") {
  FvdmParams p;
  CHECK(acc_fvdm(20.0, 8.0, 10.0, p) ==
        Approx(acc_ovm(20.0, 8.0, p.ovm) + 0.6 * 2.0));
  CHECK(acc_fvdm(20.0, 8.0, 8.0, p) == acc_ovm(20.0, 8.0, p.ovm));
}

TEST_CASE("model wrapper dispatches to the acceleration functions") {
  const IdmParams p = IdmParams::standard();
  CHECK(Model::idm(p).acceleration(25.0, 9.0, 7.0) == acc_idm(25.0, 9.0, 7.0, p));
  CHECK(Model::idm_plus(p).acceleration(25.0, 9.0, 7.0) ==
        acc_idm_plus(25.0, 9.0, 7.0, p));
  CHECK(Model::idm_modified_free(p).acceleration(25.0, 9.0, 7.0) ==
        acc_idm_modified_free(25.0, 9.0, 7.0, p));
  CHECK(Model::ovm(OvmParams{}).acceleration(25.0, 9.0, 7.0) ==
        acc_ovm(25.0, 9.0, OvmParams{}));
  CHECK(Model::fvdm(FvdmParams{}).acceleration(25.0, 9.0, 7.0) ==
        acc_fvdm(25.0, 9.0, 7.0, FvdmParams{}));
  CHECK(Model().type() == ModelType::kIdm);
  CHECK(Model::idm(p).free_acceleration(9.0) == free_acceleration_idm(9.0, p));
}

TEST_CASE("model names round-trip") {
  for (ModelType t : {ModelType::kIdm, ModelType::kIdmPlus,
                      ModelType::kIdmModifiedFree, ModelType::kOvm,
                      ModelType::kFvdm}) {
    CHECK(model_type_from_string(to_string(t)) == t);
  }
  CHECK_THROWS_AS(model_type_from_string("gipps"), Error);
}

TEST_CASE("equilibrium gap") {
  const Model m = Model::idm(IdmParams::standard());
  // At 14 m/s: (s*/s)^2 = 1 - (14/15)^4 with s* = 2 + 14 = 16.
  const double expected = 16.0 / std::sqrt(1.0 - std::pow(14.0 / 15.0, 4));
  CHECK(expected == Approx(32.58).epsilon(1e-3));
  CHECK(m.equilibrium_gap(14.0) == Approx(expected).epsilon(1e-10));
  CHECK(m.equilibrium_gap(0.0) == Approx(2.0).epsilon(1e-10));
  CHECK_THROWS_AS(m.equilibrium_gap(15.0), Error);

  const Model ovm = Model::ovm(OvmParams{});
  const double s = ovm.equilibrium_gap(10.0);
  CHECK(optimal_velocity(s, OvmParams{}) == Approx(10.0).epsilon(1e-10));
}

TEST_CASE("equilibrium is a fixed point of every model") {
  const Model models[] = {Model::idm(IdmParams::standard()),
                          Model::idm(IdmParams::creep()),
                          Model::idm_plus(IdmParams::standard()),
                          Model::idm_modified_free(IdmParams::standard()),
                          Model::ovm(OvmParams{}), Model::fvdm(FvdmParams{})};
  for (const Model& m : models) {
    for (double v : {0.5, 5.0, 10.0, 14.0}) {
      CAPTURE(to_string(m.type()));
      CAPTURE(v);
      const double s = m.equilibrium_gap(v);
      CHECK(s > 0.0);
      CHECK(std::abs(m.acceleration(s, v, v)) < 1e-9);
    }
  }
}

TEST_CASE("standing gap") {
  CHECK(Model::idm(IdmParams::standard()).standing_gap() == 2.0);
  CHECK(Model::idm(IdmParams::creep()).standing_gap() == 1.0);
  const Model ovm = Model::ovm(OvmParams{});
  CHECK(ovm.standing_gap() > 0.0);
}

TEST_CASE("invalid parameters are rejected") {
  IdmParams p = IdmParams::standard();
  p.T = 0.0;
  CHECK_THROWS_AS(Model::idm(p), Error);
  OvmParams o;
  o.tau = -1.0;
  CHECK_THROWS_AS(Model::ovm(o), Error);
  FvdmParams f;
  f.lambda = -0.1;
  CHECK_THROWS_AS(Model::fvdm(f), Error);
}

}  // TEST_SUITE
