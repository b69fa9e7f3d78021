#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

// SE(3)/se(3) algebra used by every other module: rotations, homogeneous
// transforms, 6x6 adjoints, twists and screw exponential coordinates.
//
// Conventions (used consistently throughout the library):
//   * twists are angular-first: V = [w; v]
//   * Transform{R, p} is the pose of a child frame expressed in its parent,
//     i.e. x_parent = R * x_child + p
//   * adjoint_of(T) maps child-frame twists to the parent frame and has the
//     block form [[R, 0], [S(p) R, R]]
//   * spatial inertias transform with the inverse-transpose congruence
//     X^{-T} I X^{-1} (see deformable_body.hpp)

namespace ccpdi {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Spatial velocity [angular; linear].
using Twist = Vec6;
/// 6x6 twist change-of-frame matrix.
using Adjoint = Mat6;
/// 6x6 spatial inertia with the usual [[Ibar, m S(r)], [m S(r)^T, m 1]] blocks.
using SpatialInertia = Mat6;

inline Eigen::Ref<const Vec3> angular(const Twist& v) { return v.head<3>(); }
inline Eigen::Ref<const Vec3> linear(const Twist& v) { return v.tail<3>(); }

/// Skew-symmetric operator: skew(v) * w == v.cross(w).
Mat3 skew(const Vec3& v);

/// Inverse of skew(); assumes m is (numerically) skew-symmetric.
Vec3 unskew(const Mat3& m);

/// Rotation about the world z axis by yaw.
Mat3 rot_z(double yaw);
Mat3 rot_y(double pitch);
Mat3 rot_x(double roll);

/// ZYX Euler angles [roll, pitch, yaw] of a rotation matrix.
Vec3 euler_zyx(const Mat3& r);
Mat3 from_euler_zyx(const Vec3& rpy);

bool is_rotation(const Mat3& r, double tol = 1e-9);

/// Rigid transform: pose of a child frame expressed in its parent frame.
struct Transform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Transform identity() { return {}; }
  static Transform translate(const Vec3& p) { return {Mat3::Identity(), p}; }
  static Transform rotate(const Mat3& r) { return {r, Vec3::Zero()}; }

  Transform operator*(const Transform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }
  Transform inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }
  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }

  Eigen::Matrix4d matrix() const;
};

/// Twist change of frame, child -> parent: [[R, 0], [S(p) R, R]].
Adjoint adjoint_of(const Transform& t);

/// Unit screw axis with the travel that reproduces a constant-twist motion.
/// If the angular part of the source twist is nonzero its norm is 1;
/// otherwise the linear part has norm 1. A zero twist has travel 0.
struct ScrewDecomposition {
  Vec6 axis = Vec6::Zero();
  double travel = 0.0;
};

/// Screw coordinates of the pose increment produced by holding twist v for dt.
ScrewDecomposition twist_to_screw(const Twist& v, double dt);

/// Closed-form exponential map se(3) -> SE(3) (Rodrigues rotation plus the
/// translation column; pure-translation branch when the axis has no angular
/// part).
Transform exp_se3(const ScrewDecomposition& s);

/// exp_se3(twist_to_screw(v, dt)): the pose increment over one step.
Transform exp_twist(const Twist& v, double dt);

/// Matrix logarithm SE(3) -> se(3), returned as a twist with unit time
/// (exp_twist(log_se3(T), 1) == T). Rotation angles near pi use the
/// trace-based branch.
Twist log_se3(const Transform& t);

/// Motion cross product ad(v): d/dt of a twist under frame motion v.
Mat6 cross_motion(const Twist& v);

/// Force cross product: v x* f, the dual of cross_motion.
Mat6 cross_force(const Twist& v);

}  // namespace ccpdi
