#pragma once

#include <vector>

#include "ccpdi/deformable_body.hpp"

// Deformable multibody tree: bodies connected by joints, where each joint
// hangs off a specific sub-body of the parent. Twists propagate through the
// joint and, for a deforming parent, through the predictive adjoint of that
// sub-body, which is also what the composite-inertia recursion consumes.

namespace ccpdi {

enum class JointKind { Revolute, Prismatic, Floating };

struct JointModel {
  JointKind kind = JointKind::Revolute;
  /// Columns are unit screws (the joint free modes), in the joint frame.
  Eigen::Matrix<double, 6, Eigen::Dynamic> free_modes;
  /// Joint base frame expressed in the parent sub-body frame.
  Transform parent_mount;
  /// Child body frame expressed in the joint tip frame.
  Transform child_mount;

  int dof() const { return static_cast<int>(free_modes.cols()); }

  /// Free modes re-expressed in the child body frame (the frame twists
  /// propagate in); differs from free_modes when child_mount is not identity.
  Eigen::Matrix<double, 6, Eigen::Dynamic> child_frame_modes() const;

  static JointModel revolute(const Vec3& axis, const Transform& parent_mount = {},
                             const Transform& child_mount = {});
  static JointModel prismatic(const Vec3& axis, const Transform& parent_mount = {},
                              const Transform& child_mount = {});
  static JointModel floating();
};

struct JointState {
  Eigen::VectorXd q;
  Eigen::VectorXd qd;

  static JointState zero(int dof) {
    return {Eigen::VectorXd::Zero(dof), Eigen::VectorXd::Zero(dof)};
  }
};

/// Pose of the child body frame expressed in the parent sub-body frame:
/// parent_mount * exp(free_modes * q) * child_mount (product of exponentials
/// over the columns for multi-dof joints).
Transform joint_child_pose(const JointModel& j, const Eigen::VectorXd& q);

/// Adjoint mapping parent-sub-body-frame twists into the child body frame,
/// as a function of the joint position.
Adjoint joint_adjoint(const JointModel& j, const JointState& s);

/// Rigid twist propagation: child = X(q) * parent + free_modes * qd.
Twist propagate_twist_rigid(const Twist& parent_twist, const JointModel& j, const JointState& s);

struct DeformablePropagation {
  Twist child_twist;
  /// Step-k parent-body-to-child adjoint: joint adjoint composed with the
  /// parent sub-body's predictive adjoint.
  Adjoint parent_to_child;
};

/// Twist propagation through a deforming parent: the parent twist is carried
/// into the predicted sub-body frame (predictive adjoint `pat`), augmented by
/// the measured sub-body twist, then pushed through the joint.
DeformablePropagation propagate_twist_deformable(const Twist& parent_twist, const Adjoint& pat,
                                                 const Twist& sub_twist, const JointModel& j,
                                                 const JointState& s);

struct DeformableTree {
  std::vector<DeformableBody> bodies;
  /// parent[i] < i; parent[0] == -1 (body 0 is the floating root).
  std::vector<int> parent;
  /// Sub-body of the parent that body i hangs off.
  std::vector<int> parent_sub;
  std::vector<JointModel> joints;       // joints[0] is the root's fictitious joint
  std::vector<JointState> joint_states;
  /// Root body twist, expressed in the root body frame.
  Twist root_twist = Twist::Zero();

  int num_bodies() const { return static_cast<int>(bodies.size()); }
  double total_mass() const;

  /// Throws std::invalid_argument on topology violations.
  void validate() const;
};

/// Composite centroidal inertia prediction over the horizon.
struct CcpdiSchedule {
  double dt = 0.0;
  int horizon = 0;
  double total_mass = 0.0;
  /// Composite inertia of the whole tree per prediction step, root frame.
  std::vector<SpatialInertia> root_inertia;
  /// Predicted composite centroid per step, root frame.
  std::vector<Vec3> centroid;
  /// Composite inertia re-expressed at the centroid (axis-aligned with the
  /// root frame); the coupling blocks cancel by construction.
  std::vector<SpatialInertia> center_inertia;
  /// Instantaneous twist of the center-body frame (root twist carried to the
  /// k = 0 centroid).
  Twist center_twist = Twist::Zero();
};

/// Leaf-to-root composite inertia recursion at every prediction step.
///
/// Per body the prediction schedule of compute_pdi supplies both the predicted
/// body inertia (recursion seed) and the parent-sub-body predictive adjoints
/// that close the parent-to-child transform at step k; joints are held at
/// their current configuration across the horizon (leg motion over the
/// horizon is the controller's business, not the inertia schedule's).
CcpdiSchedule compute_ccpdi(const DeformableTree& tree, double dt, int horizon);

}  // namespace ccpdi
