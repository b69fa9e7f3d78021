#include "ccpdi/sim/leg_control.hpp"

namespace ccpdi::sim {

Vec3 LegController::support_shift(const QuadrupedModel& model, const Kinematics& kin,
                                  const Vec3& com_position) const {
  Vec3 center = Vec3::Zero();
  for (int leg = 0; leg < kNumLegs; ++leg)
    center += model.engine.point_position(kin, model.thigh_body[leg], Vec3::Zero());
  center /= kNumLegs;
  Vec3 shift = params_.centroid_shift_gain * (com_position - center);
  shift.z() = 0.0;
  return shift;
}

Vec3 LegController::foothold_target(const QuadrupedModel& model, const Kinematics& kin, int leg,
                                    const GaitSchedule& gait, double t, const Vec3& com_position,
                                    const Vec3& com_velocity, const Vec3& commanded_velocity,
                                    bool& clamped) const {
  const Vec3 hip = model.engine.point_position(kin, model.thigh_body[leg], Vec3::Zero());
  Vec3 target = hip + support_shift(model, kin, com_position);
  target.z() = 0.0;
  const Vec3 verr = com_velocity - commanded_velocity;
  target.head<2>() += (gait.stance_duration(t) / 2.0) * com_velocity.head<2>() +
                      params_.raibert_gain * verr.head<2>();

  const double reach = 0.96 * (desc_.thigh_length + desc_.shank_length);
  const Vec3 rel = target - hip;
  clamped = false;
  if (rel.norm() > reach) {
    clamped = true;
    return hip + rel * (reach / rel.norm());
  }
  return target;
}

Eigen::VectorXd LegController::compute(const QuadrupedModel& model, const EngineState& s,
                                       const Kinematics& kin, const GaitSchedule& gait, double t,
                                       const std::array<LegCommand, kNumLegs>& commands,
                                       const Vec3& com_position, const Vec3& com_velocity,
                                       const Vec3& commanded_velocity) {
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(model.engine.num_joints());

  for (int leg = 0; leg < kNumLegs; ++leg) {
    const Vec3 foot = model.engine.point_position(kin, model.shank_body[leg], model.foot_local);
    const Vec3 foot_vel = model.engine.point_velocity(kin, model.shank_body[leg], model.foot_local);
    const Eigen::MatrixXd jac =
        model.engine.point_jacobian(s, kin, model.shank_body[leg], model.foot_local);

    Vec3 force;  // force to exert on the foot, world frame
    if (commands[leg].stance && gait.in_stance(leg, t)) {
      swing_[leg].active = false;
      force = -commands[leg].grf;
    } else {
      auto& sw = swing_[leg];
      if (!sw.active) {
        sw.active = true;
        sw.liftoff = foot;
      }
      bool clamped = false;
      sw.target = foothold_target(model, kin, leg, gait, t, com_position, com_velocity,
                                  commanded_velocity, clamped);
      if (clamped) reach_clamped_ = true;

      const double sp = std::clamp(gait.swing_phase(leg, t), 0.0, 1.0);
      const double blend = sp * sp * (3.0 - 2.0 * sp);
      const double dblend = 6.0 * sp * (1.0 - sp) / gait.swing_duration(t);
      Vec3 p_des = sw.liftoff + (sw.target - sw.liftoff) * blend;
      Vec3 v_des = (sw.target - sw.liftoff) * dblend;
      p_des.z() += params_.apex_height * 0.5 * (1.0 - std::cos(2.0 * M_PI * sp));
      v_des.z() += params_.apex_height * M_PI * std::sin(2.0 * M_PI * sp) / gait.swing_duration(t);

      force = params_.kp * (p_des - foot) + params_.kd * (v_des - foot_vel);
    }

    for (int j = 0; j < 3; ++j) {
      const int dof = model.leg_dof[leg][j];
      double tq = jac.col(6 + dof).dot(force) - params_.joint_damping * s.qd[dof];
      tau[dof] = std::clamp(tq, -params_.torque_limit, params_.torque_limit);
    }
  }
  return tau;
}

}  // namespace ccpdi::sim
