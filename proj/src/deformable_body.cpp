#include "ccpdi/deformable_body.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace ccpdi {

DeformableBody DeformableBody::rigid(const SubBodyParams& p) {
  DeformableBody b;
  b.params = {p};
  b.states = {SubBodyState{}};
  b.successors = {{}};
  return b;
}

void DeformableBody::validate() const {
  if (params.empty()) throw std::invalid_argument("deformable body has no sub-bodies");
  if (params.size() != states.size())
    throw std::invalid_argument("sub-body params/states size mismatch");
  if (!successors.empty() && successors.size() != params.size())
    throw std::invalid_argument("sub-body successors size mismatch");
  for (const auto& p : params) sub_body_inertia(p);  // throws on bad params
  const auto& anchor = states[0];
  if ((anchor.pose.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-12 ||
      anchor.pose.translation.cwiseAbs().maxCoeff() > 1e-12 ||
      anchor.twist.cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("sub-body 0 must carry the body frame (identity pose, zero twist)");
  for (const auto& s : states)
    if (!s.pose.rotation.allFinite() || !s.pose.translation.allFinite() || !s.twist.allFinite())
      throw std::invalid_argument("non-finite sub-body state");
}

SpatialInertia sub_body_inertia(const SubBodyParams& p) {
  if (!(p.mass > 0.0)) throw std::invalid_argument("sub-body mass must be positive");
  if ((p.rot_inertia - p.rot_inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("sub-body rotational inertia must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es(p.rot_inertia);
  if (es.eigenvalues().minCoeff() < -1e-12)
    throw std::invalid_argument("sub-body rotational inertia must be positive semidefinite");

  const Mat3 cx = skew(p.com);
  SpatialInertia inertia;
  inertia.topLeftCorner<3, 3>() = p.rot_inertia + p.mass * cx * cx.transpose();
  inertia.topRightCorner<3, 3>() = p.mass * cx;
  inertia.bottomLeftCorner<3, 3>() = p.mass * cx.transpose();
  inertia.bottomRightCorner<3, 3>() = p.mass * Mat3::Identity();
  return inertia;
}

SpatialInertia transform_inertia(const SpatialInertia& inertia, const Adjoint& x) {
  // For adjoints the inverse is cheap and exact through the transform, but a
  // caller handing us a bare 6x6 only guarantees invertibility; the adjoint
  // block structure lets us invert analytically: X = [[R,0],[PR,R]] =>
  // X^{ -1 } = [[R^T, 0], [-R^T P, R^T]].
  const Mat3 r = x.topLeftCorner<3, 3>();
  const Mat3 pr = x.bottomLeftCorner<3, 3>();
  Adjoint xinv = Adjoint::Zero();
  xinv.topLeftCorner<3, 3>() = r.transpose();
  xinv.bottomRightCorner<3, 3>() = r.transpose();
  xinv.bottomLeftCorner<3, 3>() = -r.transpose() * pr * r.transpose();
  return xinv.transpose() * inertia * xinv;
}

SpatialInertia transform_inertia(const SpatialInertia& inertia, const Transform& child_in_parent) {
  const Adjoint y = adjoint_of(child_in_parent.inverse());  // X^{-1}
  return y.transpose() * inertia * y;
}

SpatialInertia instantaneous_body_inertia(const DeformableBody& b) {
  SpatialInertia total = SpatialInertia::Zero();
  for (int j = 0; j < b.num_sub_bodies(); ++j)
    total += transform_inertia(sub_body_inertia(b.params[j]), b.states[j].pose);
  return total;
}

double inertia_mass(const SpatialInertia& inertia) {
  return inertia.bottomRightCorner<3, 3>().diagonal().mean();
}

Vec3 inertia_com(const SpatialInertia& inertia) {
  return unskew(inertia.topRightCorner<3, 3>()) / inertia_mass(inertia);
}

PdiSchedule compute_pdi(const DeformableBody& b, double dt, int horizon) {
  if (!(dt > 0.0)) throw std::invalid_argument("compute_pdi: dt must be positive");
  if (horizon < 1) throw std::invalid_argument("compute_pdi: horizon must be >= 1");

  const int n = b.num_sub_bodies();
  PdiSchedule out;
  out.dt = dt;
  out.horizon = horizon;
  out.inertia.assign(horizon, SpatialInertia::Zero());
  out.pat.assign(n, std::vector<Adjoint>(static_cast<size_t>(horizon)));

  for (int j = 0; j < n; ++j) {
    const SpatialInertia local = sub_body_inertia(b.params[j]);
    out.total_mass += b.params[j].mass;

    // One-step incremental adjoint of the predicted frame motion; its inverse
    // maps quantities from a frame one step old into the frame one step new.
    const Transform step = exp_twist(b.states[j].twist, dt);
    const Adjoint step_back = adjoint_of(step.inverse());

    Adjoint y = adjoint_of(b.states[j].pose.inverse());  // body frame -> sub-body frame, k = 0
    for (int k = 0; k < horizon; ++k) {
      out.pat[j][k] = y;
      out.inertia[k] += y.transpose() * local * y;
      y = step_back * y;
    }
  }
  return out;
}

}  // namespace ccpdi
