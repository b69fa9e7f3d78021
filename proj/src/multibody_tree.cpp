#include "ccpdi/multibody_tree.hpp"

#include <stdexcept>

namespace ccpdi {

JointModel JointModel::revolute(const Vec3& axis, const Transform& parent_mount,
                                const Transform& child_mount) {
  JointModel j;
  j.kind = JointKind::Revolute;
  j.free_modes.resize(6, 1);
  j.free_modes.col(0).head<3>() = axis.normalized();
  j.free_modes.col(0).tail<3>().setZero();
  j.parent_mount = parent_mount;
  j.child_mount = child_mount;
  return j;
}

JointModel JointModel::prismatic(const Vec3& axis, const Transform& parent_mount,
                                 const Transform& child_mount) {
  JointModel j;
  j.kind = JointKind::Prismatic;
  j.free_modes.resize(6, 1);
  j.free_modes.col(0).head<3>().setZero();
  j.free_modes.col(0).tail<3>() = axis.normalized();
  j.parent_mount = parent_mount;
  j.child_mount = child_mount;
  return j;
}

JointModel JointModel::floating() {
  JointModel j;
  j.kind = JointKind::Floating;
  j.free_modes = Eigen::Matrix<double, 6, 6>::Identity();
  return j;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> JointModel::child_frame_modes() const {
  return adjoint_of(child_mount.inverse()) * free_modes;
}

Transform joint_child_pose(const JointModel& j, const Eigen::VectorXd& q) {
  if (q.size() != j.dof()) throw std::invalid_argument("joint position dimension mismatch");
  Transform motion;
  for (int c = 0; c < j.dof(); ++c) {
    ScrewDecomposition s;
    s.axis = j.free_modes.col(c);
    s.travel = q[c];
    motion = motion * exp_se3(s);
  }
  return j.parent_mount * motion * j.child_mount;
}

Adjoint joint_adjoint(const JointModel& j, const JointState& s) {
  return adjoint_of(joint_child_pose(j, s.q).inverse());
}

Twist propagate_twist_rigid(const Twist& parent_twist, const JointModel& j, const JointState& s) {
  if (s.qd.size() != j.dof()) throw std::invalid_argument("joint velocity dimension mismatch");
  return joint_adjoint(j, s) * parent_twist + j.child_frame_modes() * s.qd;
}

DeformablePropagation propagate_twist_deformable(const Twist& parent_twist, const Adjoint& pat,
                                                 const Twist& sub_twist, const JointModel& j,
                                                 const JointState& s) {
  if (s.qd.size() != j.dof()) throw std::invalid_argument("joint velocity dimension mismatch");
  const Adjoint xj = joint_adjoint(j, s);
  DeformablePropagation out;
  out.child_twist = xj * (pat * parent_twist + sub_twist) + j.child_frame_modes() * s.qd;
  out.parent_to_child = xj * pat;
  return out;
}

double DeformableTree::total_mass() const {
  double m = 0.0;
  for (const auto& b : bodies)
    for (const auto& p : b.params) m += p.mass;
  return m;
}

void DeformableTree::validate() const {
  const int n = num_bodies();
  if (n == 0) throw std::invalid_argument("tree has no bodies");
  if (static_cast<int>(parent.size()) != n || static_cast<int>(parent_sub.size()) != n ||
      static_cast<int>(joints.size()) != n || static_cast<int>(joint_states.size()) != n)
    throw std::invalid_argument("tree arrays must all have one entry per body");
  if (parent[0] != -1) throw std::invalid_argument("body 0 must be the root");
  for (int i = 1; i < n; ++i) {
    if (parent[i] < 0 || parent[i] >= i)
      throw std::invalid_argument("parents must precede children (topological order)");
    if (parent_sub[i] < 0 || parent_sub[i] >= bodies[parent[i]].num_sub_bodies())
      throw std::invalid_argument("parent_sub out of range for parent body");
    if (joints[i].kind == JointKind::Floating)
      throw std::invalid_argument("floating joint allowed on the root only");
    if (joint_states[i].q.size() != joints[i].dof() ||
        joint_states[i].qd.size() != joints[i].dof())
      throw std::invalid_argument("joint state dimension mismatch");
  }
  for (const auto& b : bodies) b.validate();
}

CcpdiSchedule compute_ccpdi(const DeformableTree& tree, double dt, int horizon) {
  tree.validate();
  const int n = tree.num_bodies();

  std::vector<PdiSchedule> pdi;
  pdi.reserve(n);
  for (const auto& b : tree.bodies) pdi.push_back(compute_pdi(b, dt, horizon));

  CcpdiSchedule out;
  out.dt = dt;
  out.horizon = horizon;
  out.total_mass = tree.total_mass();
  out.root_inertia.resize(horizon);
  out.centroid.resize(horizon);
  out.center_inertia.resize(horizon);

  // Working composite tensors, seeded with each body's predicted inertia.
  std::vector<std::vector<SpatialInertia>> composite(n);
  for (int i = 0; i < n; ++i) composite[i] = pdi[i].inertia;

  for (int k = 0; k < horizon; ++k) {
    for (int i = n - 1; i >= 1; --i) {
      const int p = tree.parent[i];
      const Adjoint& pat = pdi[p].pat[tree.parent_sub[i]][k];
      const Adjoint x = joint_adjoint(tree.joints[i], tree.joint_states[i]) * pat;
      composite[p][k] += x.transpose() * composite[i][k] * x;
    }
    out.root_inertia[k] = composite[0][k];
    out.centroid[k] = inertia_com(out.root_inertia[k]);

    Adjoint x0c = Adjoint::Identity();  // pure translation to the centroid
    x0c.bottomLeftCorner<3, 3>() = skew(out.centroid[k]);
    out.center_inertia[k] = x0c.transpose() * out.root_inertia[k] * x0c;
  }

  out.center_twist = adjoint_of(Transform::translate(out.centroid[0]).inverse()) * tree.root_twist;
  return out;
}

}  // namespace ccpdi
