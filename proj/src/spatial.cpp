#include "ccpdi/spatial.hpp"

#include <cmath>

namespace ccpdi {

namespace {
// Below this angle the exp/log trigonometric coefficients switch to their
// first-order series to avoid 0/0.
constexpr double kSmallAngle = 1e-9;
}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return s;
}

Vec3 unskew(const Mat3& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

Mat3 rot_z(double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  Mat3 r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

Mat3 rot_y(double pitch) {
  const double c = std::cos(pitch), s = std::sin(pitch);
  Mat3 r;
  r << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
  return r;
}

Mat3 rot_x(double roll) {
  const double c = std::cos(roll), s = std::sin(roll);
  Mat3 r;
  r << 1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c;
  return r;
}

Vec3 euler_zyx(const Mat3& r) {
  // R = Rz(yaw) Ry(pitch) Rx(roll)
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  double roll, yaw;
  if (std::abs(std::cos(pitch)) > 1e-9) {
    roll = std::atan2(r(2, 1), r(2, 2));
    yaw = std::atan2(r(1, 0), r(0, 0));
  } else {
    roll = std::atan2(-r(1, 2), r(1, 1));
    yaw = 0.0;
  }
  return {roll, pitch, yaw};
}

Mat3 from_euler_zyx(const Vec3& rpy) {
  return rot_z(rpy.z()) * rot_y(rpy.y()) * rot_x(rpy.x());
}

bool is_rotation(const Mat3& r, double tol) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < tol &&
         std::abs(r.determinant() - 1.0) < tol;
}

Eigen::Matrix4d Transform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Adjoint adjoint_of(const Transform& t) {
  Adjoint x = Adjoint::Zero();
  x.topLeftCorner<3, 3>() = t.rotation;
  x.bottomRightCorner<3, 3>() = t.rotation;
  x.bottomLeftCorner<3, 3>() = skew(t.translation) * t.rotation;
  return x;
}

ScrewDecomposition twist_to_screw(const Twist& v, double dt) {
  ScrewDecomposition s;
  const double wn = angular(v).norm();
  const double vn = linear(v).norm();
  if (wn > kSmallAngle) {
    s.axis = v / wn;
    s.travel = wn * dt;
  } else if (vn > kSmallAngle) {
    s.axis.setZero();
    s.axis.tail<3>() = linear(v) / vn;
    s.travel = vn * dt;
  } else {
    // Zero twist: travel 0 with an arbitrary (here zero) axis.
    s.axis.setZero();
    s.travel = 0.0;
  }
  return s;
}

Transform exp_se3(const ScrewDecomposition& s) {
  const Vec3 w = s.axis.head<3>();
  const Vec3 v = s.axis.tail<3>();
  const double th = s.travel;
  if (w.norm() < kSmallAngle) {
    return Transform{Mat3::Identity(), v * th};
  }
  const Mat3 wx = skew(w);
  const double sth = std::sin(th), cth = std::cos(th);
  Transform t;
  t.rotation = Mat3::Identity() + sth * wx + (1.0 - cth) * wx * wx;
  const Mat3 g = Mat3::Identity() * th + (1.0 - cth) * wx + (th - sth) * wx * wx;
  t.translation = g * v;
  return t;
}

Transform exp_twist(const Twist& v, double dt) {
  return exp_se3(twist_to_screw(v, dt));
}

namespace {

Vec3 log_so3(const Mat3& r) {
  const double cth = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double th = std::acos(cth);
  if (th < kSmallAngle) {
    return unskew(r - r.transpose()) / 2.0;
  }
  if (M_PI - th < 1e-6) {
    // Near pi the sin(th) denominator degenerates; recover the axis from the
    // dominant diagonal of (R + I)/2 = aa^T + O(pi - th).
    Mat3 b = (r + Mat3::Identity()) / 2.0;
    int k;
    b.diagonal().maxCoeff(&k);
    Vec3 a = b.col(k) / std::sqrt(b(k, k));
    // Fix the sign so that exp matches r (a and -a give the same rotation at
    // exactly pi but not nearby).
    const Vec3 res = unskew(r - r.transpose()) / 2.0;
    if (res.dot(a) < 0.0) a = -a;
    return th * a;
  }
  return th / (2.0 * std::sin(th)) * unskew(r - r.transpose());
}

}  // namespace

Twist log_se3(const Transform& t) {
  const Vec3 wth = log_so3(t.rotation);
  const double th = wth.norm();
  Twist v;
  if (th < kSmallAngle) {
    v.head<3>() = wth;
    v.tail<3>() = t.translation;
    return v;
  }
  const Vec3 w = wth / th;
  const Mat3 wx = skew(w);
  // Inverse of the translation integrator G(th) from exp_se3.
  const Mat3 ginv = Mat3::Identity() / th - wx / 2.0 +
                    (1.0 / th - 0.5 / std::tan(th / 2.0)) * wx * wx;
  v.head<3>() = wth;
  v.tail<3>() = th * (ginv * t.translation);
  return v;
}

Mat6 cross_motion(const Twist& v) {
  Mat6 m = Mat6::Zero();
  const Mat3 wx = skew(angular(v));
  m.topLeftCorner<3, 3>() = wx;
  m.bottomRightCorner<3, 3>() = wx;
  m.bottomLeftCorner<3, 3>() = skew(linear(v));
  return m;
}

Mat6 cross_force(const Twist& v) { return -cross_motion(v).transpose(); }

}  // namespace ccpdi
