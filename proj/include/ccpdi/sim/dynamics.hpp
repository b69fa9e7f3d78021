#pragma once

#include <string>
#include <vector>

#include "ccpdi/multibody_tree.hpp"

// Rigid floating-base multibody engine for the desk-scale digital twin.
// Generalized velocity is [base twist (base frame, angular first); joint
// rates]. Mass matrix via the composite-rigid-body algorithm, bias forces via
// a recursive Newton-Euler sweep, external point forces mapped through
// world-frame point Jacobians.

namespace ccpdi::sim {

struct EngineJoint {
  JointKind kind = JointKind::Revolute;
  Vec6 axis = Vec6::Zero();  // unit screw in the joint frame
  Transform parent_mount;    // joint frame expressed in the parent body frame
  Transform child_mount;     // child body frame expressed in the moved joint frame
};

struct EngineBody {
  std::string name;
  int parent = -1;  // -1 for the floating base
  EngineJoint joint;
  SpatialInertia inertia = SpatialInertia::Zero();  // in the body frame
};

struct EngineState {
  Transform base_pose;            // base body frame in world
  Twist base_twist = Twist::Zero();  // expressed in the base frame
  Eigen::VectorXd q;              // one entry per non-base body
  Eigen::VectorXd qd;
};

struct Kinematics {
  std::vector<Transform> world_pose;  // per body
  std::vector<Twist> body_twist;      // per body, expressed in that body frame
};

class RigidBodyEngine {
 public:
  /// Body 0 is the floating base.
  int add_base(const std::string& name, const SpatialInertia& inertia);
  int add_body(const std::string& name, int parent, const EngineJoint& joint,
               const SpatialInertia& inertia);

  int num_bodies() const { return static_cast<int>(bodies_.size()); }
  int num_joints() const { return num_bodies() - 1; }
  int velocity_dim() const { return 6 + num_joints(); }
  const EngineBody& body(int i) const { return bodies_[i]; }

  EngineState make_state() const;

  Kinematics forward_kinematics(const EngineState& s) const;

  /// Joint-space mass matrix (velocity_dim x velocity_dim), built by the
  /// composite-rigid-body algorithm in body coordinates.
  Eigen::MatrixXd mass_matrix(const EngineState& s) const;

  /// Velocity-product and gravity generalized forces h(q, v), so that
  /// M vdot + h = tau_generalized.
  Eigen::VectorXd bias_forces(const EngineState& s, const Vec3& gravity) const;

  /// 3 x velocity_dim Jacobian of the world velocity of a body-fixed point.
  Eigen::MatrixXd point_jacobian(const EngineState& s, const Kinematics& kin, int body,
                                 const Vec3& local_point) const;

  Vec3 point_position(const Kinematics& kin, int body, const Vec3& local_point) const;
  Vec3 point_velocity(const Kinematics& kin, int body, const Vec3& local_point) const;

  /// Semi-implicit Euler: velocities first, then pose/positions with the new
  /// velocities; the base pose advances along its twist exponential.
  EngineState integrate(const EngineState& s, const Eigen::VectorXd& vdot, double dt) const;

  /// Kinetic plus gravitational potential energy (diagnostics and tests).
  double total_energy(const EngineState& s, const Vec3& gravity) const;
  double total_mass() const;
  Vec3 com_world(const EngineState& s) const;
  /// Mass-weighted velocity of the composite centroid, world frame.
  Vec3 com_velocity_world(const EngineState& s) const;

 private:
  std::vector<EngineBody> bodies_;
  // Fixed part of the child-from-parent transform; the joint motion is
  // inserted between mount frames per step.
  Transform child_from_parent(int i, double q) const;

  std::vector<SpatialInertia> body_inertias_() const;
};

}  // namespace ccpdi::sim
