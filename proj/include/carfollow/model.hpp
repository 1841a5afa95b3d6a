#pragma once

#include <limits>
#include <string>
#include <string_view>
#include <variant>

namespace carfollow {

/// Gap value standing for "no leader in sight". Every interaction term of
/// the IDM family evaluates to exactly zero at this gap.
inline constexpr double kInfiniteGap = std::numeric_limits<double>::infinity();

inline bool is_infinite_gap(double s) { return s == kInfiniteGap; }

struct IdmParams {
  double v0 = 15.0;  // desired speed (m/s)
  double T = 1.0;    // time gap (s)
  double s0 = 2.0;   // minimum gap (m)
  double a = 1.0;    // maximum acceleration (m/s^2)
  double b = 1.5;    // comfortable deceleration (m/s^2)

  /// Parameter set used for the start-stop studies (distinct stop).
  static IdmParams standard() { return {15.0, 1.0, 2.0, 1.0, 1.5}; }
  /// Parameter set producing a creeping halt in front of a standing obstacle.
  static IdmParams creep() { return {15.0, 1.0, 1.0, 2.0, 1.5}; }

  void validate() const;
};

struct OvmParams {
  double v0 = 15.0;      // desired speed (m/s)
  double tau = 0.5;      // speed adaptation time (s)
  double beta = 1.5;     // form factor of the optimal-velocity curve
  double delta_s = 8.0;  // transition width (m)

  void validate() const;
};

struct FvdmParams {
  OvmParams ovm;
  double lambda = 0.6;  // speed-difference sensitivity (1/s)

  void validate() const;
};

// Acceleration functions a(s, v, v_lead). All are pure.

/// Dynamic desired gap s*(v, v_lead), clamped at zero.
double desired_gap(double v, double v_lead, const IdmParams& p);
double free_acceleration_idm(double v, const IdmParams& p);
/// Free acceleration of the modified IDM: a below v0, a(1 - v/v0) from v0 on.
double free_acceleration_modified(double v, const IdmParams& p);
double acc_idm(double s, double v, double v_lead, const IdmParams& p);
double acc_idm_plus(double s, double v, double v_lead, const IdmParams& p);
double acc_idm_modified_free(double s, double v, double v_lead,
                             const IdmParams& p);
double optimal_velocity(double s, const OvmParams& p);
double acc_ovm(double s, double v, const OvmParams& p);
double acc_fvdm(double s, double v, double v_lead, const FvdmParams& p);

enum class ModelType { kIdm, kIdmPlus, kIdmModifiedFree, kOvm, kFvdm };

std::string_view to_string(ModelType type);
ModelType model_type_from_string(std::string_view name);

/// One acceleration function together with its parameter bundle.
class Model {
 public:
  using Params = std::variant<IdmParams, OvmParams, FvdmParams>;

  /// IDM with the standard parameter set.
  Model() : Model(ModelType::kIdm, IdmParams::standard()) {}

  static Model idm(const IdmParams& p) { return {ModelType::kIdm, p}; }
  static Model idm_plus(const IdmParams& p) { return {ModelType::kIdmPlus, p}; }
  static Model idm_modified_free(const IdmParams& p) {
    return {ModelType::kIdmModifiedFree, p};
  }
  static Model ovm(const OvmParams& p) { return {ModelType::kOvm, p}; }
  static Model fvdm(const FvdmParams& p) { return {ModelType::kFvdm, p}; }

  ModelType type() const { return type_; }
  const Params& params() const { return params_; }

  double acceleration(double s, double v, double v_lead) const;
  /// Free-flow acceleration a(inf, v, v).
  double free_acceleration(double v) const {
    return acceleration(kInfiniteGap, v, v);
  }

  /// Gap that keeps a vehicle at rest, used to line up a standing queue.
  double standing_gap() const;

  /// Gap s with acceleration(s, v, v) == 0. Throws if no equilibrium exists
  /// at this speed (for the IDM family when v >= v0).
  double equilibrium_gap(double v) const;

 private:
  Model(ModelType type, Params params);

  ModelType type_;
  Params params_;
};

}  // namespace carfollow
