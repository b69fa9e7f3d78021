#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ccpdi/spatial.hpp"
#include "oracles/oracles.hpp"

using namespace ccpdi;

namespace {
double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }
}  // namespace

TEST_CASE("skew zero and unit axis") {
  CHECK(max_abs(skew(Vec3::Zero())) == 0.0);
  Mat3 expected;
  expected << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  CHECK(max_abs(skew(Vec3::UnitX()) - expected) == 0.0);
}

TEST_CASE("skew matches the cross product on random vectors") {
  oracles::Rng rng(11u);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const Vec3 v(u(rng), u(rng), u(rng)), w(u(rng), u(rng), u(rng));
    CHECK(max_abs(skew(v) * w - v.cross(w)) < 1e-14);
    CHECK(max_abs(skew(v) + skew(v).transpose()) == 0.0);
  }
}

TEST_CASE("adjoint of identity and pure translation") {
  CHECK(max_abs(adjoint_of(Transform::identity()) - Mat6::Identity()) == 0.0);
  const Vec3 p(0.1, -0.2, 0.3);
  const Adjoint x = adjoint_of(Transform::translate(p));
  CHECK(max_abs(x.topLeftCorner<3, 3>() - Mat3::Identity()) == 0.0);
  CHECK(max_abs(x.bottomLeftCorner<3, 3>() - skew(p)) == 0.0);
}

TEST_CASE("adjoint functoriality on random pairs") {
  oracles::Rng rng(12u);
  for (int i = 0; i < 200; ++i) {
    const Transform t1 = oracles::random_transform(rng), t2 = oracles::random_transform(rng);
    CHECK(max_abs(adjoint_of(t1 * t2) - adjoint_of(t1) * adjoint_of(t2)) < 1e-10);
  }
}

TEST_CASE("transform inverse and associativity") {
  oracles::Rng rng(13u);
  for (int i = 0; i < 100; ++i) {
    const Transform t = oracles::random_transform(rng);
    const Transform id = t * t.inverse();
    CHECK(max_abs(id.rotation - Mat3::Identity()) < 1e-10);
    CHECK(id.translation.norm() < 1e-10);
    const Transform a = oracles::random_transform(rng), b = oracles::random_transform(rng);
    const Transform lhs = (t * a) * b, rhs = t * (a * b);
    CHECK(max_abs(lhs.rotation - rhs.rotation) < 1e-12);
    CHECK(max_abs(lhs.translation - rhs.translation) < 1e-12);
  }
}

TEST_CASE("twist_to_screw trivial cases") {
  const auto zero = twist_to_screw(Twist::Zero(), 0.03);
  CHECK(zero.travel == 0.0);
  const Transform t = exp_se3(zero);
  CHECK(max_abs(t.rotation - Mat3::Identity()) == 0.0);
  CHECK(t.translation.norm() == 0.0);

  Twist spin = Twist::Zero();
  spin[2] = 2.0 * M_PI;
  const auto s = twist_to_screw(spin, 0.5);
  CHECK(s.travel == doctest::Approx(M_PI).epsilon(1e-14));
  CHECK(max_abs(s.axis - (Vec6() << 0, 0, 1, 0, 0, 0).finished()) < 1e-15);
}

TEST_CASE("exp_se3 pure translation") {
  ScrewDecomposition s;
  s.axis << 0, 0, 0, 1, 0, 0;
  s.travel = 0.2;
  const Transform t = exp_se3(s);
  CHECK(max_abs(t.rotation - Mat3::Identity()) == 0.0);
  CHECK(max_abs(t.translation - Vec3(0.2, 0, 0)) < 1e-16);
}

TEST_CASE("exp_se3 against the dense matrix exponential") {
  oracles::Rng rng(14u);
  for (int i = 0; i < 200; ++i) {
    const Twist v = oracles::random_twist(rng, 3.0, 1.0);
    const auto s = twist_to_screw(v, 0.4);
    const Transform t = exp_se3(s);
    const Eigen::Matrix4d ref = oracles::dense_exp_se3(s.axis, s.travel);
    CHECK(max_abs(t.matrix() - ref) < 1e-12);
  }
}

TEST_CASE("constant-twist pose increment against substep integration") {
  oracles::Rng rng(15u);
  for (int i = 0; i < 20; ++i) {
    const Twist v = oracles::random_twist(rng, 2.0, 0.5);
    const double dt = 0.03;
    const Transform t = exp_twist(v, dt);
    const Eigen::Matrix4d ref = oracles::integrate_frame(v, dt, 10000);
    CHECK(max_abs(t.matrix() - ref) < 1e-12);
  }
}

TEST_CASE("exp/log round trip recovers the twist") {
  oracles::Rng rng(16u);
  for (int i = 0; i < 200; ++i) {
    const Twist v = oracles::random_twist(rng, 2.0, 0.7);
    const double dt = 0.25;
    const Transform t = exp_twist(v, dt);
    const Twist back = log_se3(t);
    CHECK(max_abs(back - v * dt) < 1e-8);
  }
}

TEST_CASE("log near pi uses the stable branch") {
  oracles::Rng rng(17u);
  for (int i = 0; i < 50; ++i) {
    Vec3 axis = Vec3::Zero();
    axis[i % 3] = 1.0;
    const Mat3 r = oracles::random_rotation(rng);
    const Vec3 w = (M_PI - 1e-8) * (r * axis);
    Twist v = Twist::Zero();
    v.head<3>() = w;
    const Transform t = exp_twist(v, 1.0);
    const Transform round = exp_twist(log_se3(t), 1.0);
    CHECK(max_abs(round.rotation - t.rotation) < 1e-6);
  }
}

TEST_CASE("euler zyx round trip") {
  oracles::Rng rng(18u);
  std::uniform_real_distribution<double> u(-1.4, 1.4);
  for (int i = 0; i < 100; ++i) {
    const Vec3 rpy(u(rng), u(rng), u(rng));
    CHECK(max_abs(euler_zyx(from_euler_zyx(rpy)) - rpy) < 1e-12);
  }
  CHECK(is_rotation(rot_z(0.7)));
  CHECK(is_rotation(rot_y(-0.4)));
  CHECK(is_rotation(rot_x(2.9)));
}
