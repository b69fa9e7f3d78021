#pragma once

#include "ccpdi/sim/robot.hpp"

// Fixed-step simulation of the quadruped: full joint-space dynamics, passive
// spring-damper spine with travel stops, Kelvin-Voigt ground contact with
// Coulomb-regularized friction on the point feet.

namespace ccpdi::sim {

struct SimState {
  EngineState engine;
  double time = 0.0;
  std::array<bool, kNumLegs> foot_contact{};
  std::array<Vec3, kNumLegs> contact_force{};  // world frame, from the contact model
  bool diverged = false;
};

class Simulator {
 public:
  Simulator(const QuadrupedModel& model, const RobotDescription& desc, double dt = 1e-3);

  /// One semi-implicit Euler step under the given actuation torques (indexed
  /// like EngineState::qd; any spine entry is ignored — the spine is passive).
  /// Sets SimState::diverged instead of throwing when the state blows up.
  SimState step(const SimState& s, const Eigen::VectorXd& joint_torques) const;

  SimState initial_state() const;

  double dt() const { return dt_; }
  const QuadrupedModel& model() const { return model_; }
  const RobotDescription& description() const { return desc_; }

  /// Contact force for one foot at the given world position/velocity.
  Vec3 contact_model(const Vec3& pos, const Vec3& vel) const;

 private:
  const QuadrupedModel& model_;
  RobotDescription desc_;
  double dt_;
};

}  // namespace ccpdi::sim
