#include "carfollow/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "carfollow/error.hpp"

namespace carfollow {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw Error(ErrorCode::kInvalidArgument, message);
}

// (s*/s)^2, zero on a free road.
double interaction_ratio_squared(double s, double s_star) {
  if (is_infinite_gap(s)) return 0.0;
  const double r = s_star / s;
  return r * r;
}

}  // namespace

void IdmParams::validate() const {
  require(v0 > 0 && T > 0 && s0 > 0 && a > 0 && b > 0,
          "IDM parameters v0, T, s0, a, b must be strictly positive");
}

void OvmParams::validate() const {
  require(v0 > 0 && tau > 0 && delta_s > 0,
          "OVM parameters v0, tau, delta_s must be strictly positive");
  require(std::isfinite(beta), "OVM form factor beta must be finite");
}

void FvdmParams::validate() const {
  ovm.validate();
  require(lambda >= 0, "FVDM sensitivity lambda must be non-negative");
}

double desired_gap(double v, double v_lead, const IdmParams& p) {
  const double s_star =
      p.s0 + v * p.T + v * (v - v_lead) / (2.0 * std::sqrt(p.a * p.b));
  return std::max(s_star, 0.0);
}

double free_acceleration_idm(double v, const IdmParams& p) {
  const double r = v / p.v0;
  const double r2 = r * r;
  return p.a * (1.0 - r2 * r2);
}

double free_acceleration_modified(double v, const IdmParams& p) {
  return v < p.v0 ? p.a : p.a * (1.0 - v / p.v0);
}

double acc_idm(double s, double v, double v_lead, const IdmParams& p) {
  return free_acceleration_idm(v, p) -
         p.a * interaction_ratio_squared(s, desired_gap(v, v_lead, p));
}

double acc_idm_plus(double s, double v, double v_lead, const IdmParams& p) {
  const double interaction =
      p.a * (1.0 - interaction_ratio_squared(s, desired_gap(v, v_lead, p)));
  return std::min(free_acceleration_idm(v, p), interaction);
}

double acc_idm_modified_free(double s, double v, double v_lead,
                             const IdmParams& p) {
  return free_acceleration_modified(v, p) -
         p.a * interaction_ratio_squared(s, desired_gap(v, v_lead, p));
}

double optimal_velocity(double s, const OvmParams& p) {
  const double tb = std::tanh(p.beta);
  const double v = p.v0 * (std::tanh(s / p.delta_s - p.beta) + tb) / (1.0 + tb);
  return std::max(v, 0.0);
}

double acc_ovm(double s, double v, const OvmParams& p) {
  return (optimal_velocity(s, p) - v) / p.tau;
}

double acc_fvdm(double s, double v, double v_lead, const FvdmParams& p) {
  return acc_ovm(s, v, p.ovm) + p.lambda * (v_lead - v);
}

std::string_view to_string(ModelType type) {
  switch (type) {
    case ModelType::kIdm: return "idm";
    case ModelType::kIdmPlus: return "idm_plus";
    case ModelType::kIdmModifiedFree: return "idm_modified_free";
    case ModelType::kOvm: return "ovm";
    case ModelType::kFvdm: return "fvdm";
  }
  return "unknown";
}

ModelType model_type_from_string(std::string_view name) {
  for (ModelType t : {ModelType::kIdm, ModelType::kIdmPlus,
                      ModelType::kIdmModifiedFree, ModelType::kOvm,
                      ModelType::kFvdm}) {
    if (to_string(t) == name) return t;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown model type '" + std::string(name) + "'");
}

Model::Model(ModelType type, Params params) : type_(type), params_(params) {
  switch (type_) {
    case ModelType::kIdm:
    case ModelType::kIdmPlus:
    case ModelType::kIdmModifiedFree:
      std::get<IdmParams>(params_).validate();
      break;
    case ModelType::kOvm:
      std::get<OvmParams>(params_).validate();
      break;
    case ModelType::kFvdm:
      std::get<FvdmParams>(params_).validate();
      break;
  }
}

double Model::acceleration(double s, double v, double v_lead) const {
  switch (type_) {
    case ModelType::kIdm:
      return acc_idm(s, v, v_lead, *std::get_if<IdmParams>(&params_));
    case ModelType::kIdmPlus:
      return acc_idm_plus(s, v, v_lead, *std::get_if<IdmParams>(&params_));
    case ModelType::kIdmModifiedFree:
      return acc_idm_modified_free(s, v, v_lead,
                                   *std::get_if<IdmParams>(&params_));
    case ModelType::kOvm:
      return acc_ovm(s, v, *std::get_if<OvmParams>(&params_));
    case ModelType::kFvdm:
      return acc_fvdm(s, v, v_lead, *std::get_if<FvdmParams>(&params_));
  }
  return 0.0;
}

double Model::standing_gap() const {
  if (const auto* idm = std::get_if<IdmParams>(&params_)) return idm->s0;
  // The optimal-velocity curve vanishes only at s = 0, so an OVM queue at
  // rest is never in equilibrium. Queue them at a fixed small gap instead.
  return 2.0;
}

double Model::equilibrium_gap(double v) const {
  // acceleration(s, v, v) is non-decreasing in s for every supported model.
  auto f = [&](double s) { return acceleration(s, v, v); };
  double lo = 1e-9;
  double hi = 1.0;
  while (f(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e9) {
      throw Error(ErrorCode::kInvalidArgument,
                  "no equilibrium gap exists at speed " + std::to_string(v));
    }
  }
  if (f(lo) >= 0.0) return lo;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace carfollow
