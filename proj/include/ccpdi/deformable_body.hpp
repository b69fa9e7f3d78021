#pragma once

#include <vector>

#include "ccpdi/spatial.hpp"

// Unified rigid/deformable body: a body is a set of rigid sub-bodies with
// constant local inertias; deformation shows up as relative sub-body motion.
// Sub-body 0 carries the body frame, so a single sub-body with zero twist is
// exactly a rigid body.

namespace ccpdi {

/// Constant properties of one rigid sub-body, in its own frame.
struct SubBodyParams {
  double mass = 0.0;
  Vec3 com = Vec3::Zero();
  Mat3 rot_inertia = Mat3::Zero();  // about the CoM, axes parallel to the sub-body frame
};

/// Live kinematics of a sub-body frame relative to the body frame, with the
/// twist expressed in the sub-body frame itself.
struct SubBodyState {
  Transform pose;
  Twist twist = Twist::Zero();
};

struct DeformableBody {
  std::vector<SubBodyParams> params;
  std::vector<SubBodyState> states;
  /// Successor body ids attached to each sub-body. Informational for tree
  /// wiring; the authoritative linkage lives in DeformableTree.
  std::vector<std::vector<int>> successors;

  int num_sub_bodies() const { return static_cast<int>(params.size()); }

  static DeformableBody rigid(const SubBodyParams& p);

  /// Throws std::invalid_argument on inconsistent sizes, invalid sub-body
  /// parameters, or a non-anchored sub-body 0.
  void validate() const;
};

/// 6x6 spatial inertia of one sub-body in its own frame:
/// [[Icm + m S(c) S(c)^T, m S(c)], [m S(c)^T, m 1]].
/// Throws std::invalid_argument for non-positive mass or a rotational inertia
/// that is not symmetric positive semidefinite.
SpatialInertia sub_body_inertia(const SubBodyParams& p);

/// Congruence change of frame X^{-T} I X^{-1}: given I expressed in the child
/// frame and x mapping child twists to the parent frame, returns I expressed
/// in the parent frame. Mass is preserved exactly.
SpatialInertia transform_inertia(const SpatialInertia& inertia, const Adjoint& x);
SpatialInertia transform_inertia(const SpatialInertia& inertia, const Transform& child_in_parent);

/// Sum of the sub-body inertias expressed in the body frame.
SpatialInertia instantaneous_body_inertia(const DeformableBody& b);

double inertia_mass(const SpatialInertia& inertia);
Vec3 inertia_com(const SpatialInertia& inertia);

/// Predicted inertia tensors and per-sub-body predictive adjoints over a
/// horizon, under the constant-twist extrapolation of the current sub-body
/// twists (the schedule's prediction model: twists are frozen, not damped).
struct PdiSchedule {
  double dt = 0.0;
  int horizon = 0;
  double total_mass = 0.0;
  /// inertia[k]: body inertia predicted k steps ahead, in the body frame.
  std::vector<SpatialInertia> inertia;
  /// pat[j][k]: adjoint of sub-body j's current frame relative to its
  /// predicted frame at step k (pat[j][0] is the plain frame inverse).
  std::vector<std::vector<Adjoint>> pat;
};

/// Constant-twist inertia prediction for one body.
///
/// Per sub-body j the one-step pose increment exp([S] theta) of twist V_j over
/// dt gives the incremental adjoint; its inverse is composed k times to move
/// the (time-invariant) local inertia back into the body frame at each step,
/// and the per-step sum over sub-bodies is the predicted body inertia.
PdiSchedule compute_pdi(const DeformableBody& b, double dt, int horizon);

}  // namespace ccpdi
