#pragma once

#include "ccpdi/sim/gait.hpp"

// Per-leg torque generation: stance legs map planned ground forces through the
// leg Jacobian transpose; swing legs track a smooth lift-and-place trajectory
// toward a velocity-corrected foothold with a Cartesian PD.

namespace ccpdi::sim {

struct SwingParams {
  double kp = 500.0;
  double kd = 18.0;
  double apex_height = 0.05;
  double raibert_gain = 0.05;  // extra foothold shift per m/s of velocity error
  double centroid_shift_gain = 1.0;  // fraction of the centroid offset applied to footholds
  double joint_damping = 0.02;
  double torque_limit = 8.0;
};

struct LegCommand {
  bool stance = false;
  Vec3 grf = Vec3::Zero();  // planned ground reaction force, world frame
};

class LegController {
 public:
  LegController(const RobotDescription& d, const SwingParams& p) : desc_(d), params_(p) {}

  /// Joint torques for all legs (indexed like EngineState::qd); the spine dof,
  /// when present, is left untouched.
  Eigen::VectorXd compute(const QuadrupedModel& model, const EngineState& s,
                          const Kinematics& kin, const GaitSchedule& gait, double t,
                          const std::array<LegCommand, kNumLegs>& commands,
                          const Vec3& com_position, const Vec3& com_velocity,
                          const Vec3& commanded_velocity);

  /// Raibert-style foothold under the hip, recentred so the stance pattern
  /// straddles the measured centroid, shifted along the velocity error;
  /// clamped to the leg workspace.
  Vec3 foothold_target(const QuadrupedModel& model, const Kinematics& kin, int leg,
                       const GaitSchedule& gait, double t, const Vec3& com_position,
                       const Vec3& com_velocity, const Vec3& commanded_velocity,
                       bool& clamped) const;

  /// Offset from the hip-pattern centre to the centroid, on the ground plane.
  Vec3 support_shift(const QuadrupedModel& model, const Kinematics& kin,
                     const Vec3& com_position) const;

  bool reach_clamped() const { return reach_clamped_; }

 private:
  RobotDescription desc_;
  SwingParams params_;
  struct SwingState {
    bool active = false;
    Vec3 liftoff = Vec3::Zero();
    Vec3 target = Vec3::Zero();
  };
  std::array<SwingState, kNumLegs> swing_{};
  bool reach_clamped_ = false;
};

}  // namespace ccpdi::sim
