#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Cholesky>

#include "ccpdi/centroidal_mpc.hpp"
#include "oracles/oracles.hpp"

using namespace ccpdi;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

// Direct Newton-Euler evaluation of the linearized centroidal model.
Eigen::Matrix<double, kNumStates, 1> direct_dynamics(const CentroidalState& s,
                                                     const std::vector<Vec3>& r,
                                                     const std::vector<Vec3>& f,
                                                     const Mat3& inertia, double mass) {
  Eigen::Matrix<double, kNumStates, 1> xdot;
  xdot.setZero();
  xdot.segment<3>(0) = rot_z(s.euler_zyx.z()).transpose() * s.angular_velocity;
  xdot.segment<3>(3) = s.linear_velocity;
  Vec3 torque = Vec3::Zero(), force = Vec3::Zero();
  for (size_t i = 0; i < r.size(); ++i) {
    torque += r[i].cross(f[i]);
    force += f[i];
  }
  xdot.segment<3>(6) = inertia.ldlt().solve(torque);
  xdot.segment<3>(9) = force / mass;
  xdot[11] += s.gravity_z;
  return xdot;
}

MpcProblem static_fixture(double r_force = 3e-9) {
  MpcProblem p;
  p.horizon = 10;
  p.dt = 0.03;
  p.mass = 10.0;
  p.friction = 0.6;
  p.f_max = 300.0;
  p.state.position = {0.0, 0.0, 0.25};
  p.state.gravity_z = -9.81;
  p.inertia.assign(p.horizon, Vec3(0.08, 0.22, 0.25).asDiagonal());
  p.plan.num_feet = 4;
  p.plan.horizon = p.horizon;
  p.plan.contact.assign(p.horizon * 4, 1);
  p.plan.foothold.resize(p.horizon * 4);
  const double a = 0.15, b = 0.11, h = 0.25;
  const Vec3 feet[4] = {{a, b, -h}, {a, -b, -h}, {-a, b, -h}, {-a, -b, -h}};
  for (int k = 0; k < p.horizon; ++k)
    for (int i = 0; i < 4; ++i) p.plan.foothold[k * 4 + i] = feet[i];
  p.weights.q_position = {1e-5, 1e-5, 2e3};
  p.weights.q_velocity = {1e3, 1e3, 1e2};
  p.weights.q_euler = {1e2, 4e2, 1e2};
  p.weights.q_angular_velocity = {1e1, 1e1, 1e1};
  p.weights.r_force = Vec3::Constant(r_force);
  p.reference.assign(p.horizon, Eigen::Matrix<double, kNumStates, 1>::Zero());
  for (auto& ref : p.reference) {
    ref.segment<3>(3) = Vec3(0.0, 0.0, 0.25);
    ref[12] = -9.81;
  }
  return p;
}

QpSettings tight_settings() {
  QpSettings s;
  s.residual_tolerance = 1e-11;
  s.gap_tolerance = 1e-12;
  return s;
}

}  // namespace

TEST_CASE("single foot at the centroid produces pure force rows") {
  CentroidalState s;
  const ContinuousDynamics d =
      build_continuous_dynamics(s, {Vec3::Zero()}, Mat3::Identity(), 10.0);
  CHECK(max_abs(d.b.block<3, 3>(6, 0)) == 0.0);
  CHECK(max_abs(d.b.block<3, 3>(9, 0) - Mat3::Identity() / 10.0) < 1e-16);
  CHECK(d.a(11, 12) == 1.0);
}

TEST_CASE("free fall comes from the gravity channel") {
  CentroidalState s;
  s.gravity_z = -9.81;
  const ContinuousDynamics d = build_continuous_dynamics(s, {}, Mat3::Identity(), 5.0);
  const Eigen::Matrix<double, kNumStates, 1> xdot = d.a * s.vector();
  CHECK(xdot[11] == doctest::Approx(-9.81));
  CHECK(xdot.segment<3>(0).norm() == 0.0);
}

TEST_CASE("singular inertia is rejected") {
  CentroidalState s;
  Mat3 singular = Mat3::Zero();
  singular(0, 0) = 1.0;
  CHECK_THROWS_AS(build_continuous_dynamics(s, {Vec3::UnitX()}, singular, 1.0),
                  std::invalid_argument);
}

TEST_CASE("continuous dynamics match the direct Newton-Euler evaluation") {
  oracles::Rng rng(71u);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    CentroidalState s;
    s.euler_zyx = {0.05 * u(rng), 0.05 * u(rng), 2.0 * u(rng)};
    s.position = {u(rng), u(rng), 0.3 + 0.1 * u(rng)};
    s.angular_velocity = {u(rng), u(rng), u(rng)};
    s.linear_velocity = {u(rng), u(rng), u(rng)};
    const Mat3 rr = oracles::random_rotation(rng);
    const Mat3 inertia = rr * Vec3(0.1, 0.2, 0.25).asDiagonal() * rr.transpose();
    std::vector<Vec3> r(4), f(4);
    for (int i = 0; i < 4; ++i) {
      r[i] = {0.3 * u(rng), 0.3 * u(rng), -0.25};
      f[i] = {10 * u(rng), 10 * u(rng), 30 + 10 * u(rng)};
    }
    const ContinuousDynamics d = build_continuous_dynamics(s, r, inertia, 10.0);
    Eigen::VectorXd uvec(12);
    for (int i = 0; i < 4; ++i) uvec.segment<3>(3 * i) = f[i];
    const Eigen::VectorXd xdot = d.a * s.vector() + d.b * uvec;
    const Eigen::VectorXd ref = direct_dynamics(s, r, f, inertia, 10.0);
    CHECK(max_abs(xdot - ref) < 1e-10);
  }
}

TEST_CASE("inject_ccpdi rotates the center-frame rotational block") {
  oracles::Rng rng(72u);
  // Deforming body: two sliding masses.
  DeformableTree tree;
  DeformableBody body;
  body.params = {{2.0, Vec3::Zero(), Vec3(0.01, 0.02, 0.02).asDiagonal()},
                 {2.0, Vec3::Zero(), Vec3(0.01, 0.02, 0.02).asDiagonal()}};
  body.states.resize(2);
  body.states[1].pose = Transform::translate({-0.2, 0, 0});
  body.states[1].twist = (Vec6() << 0, 0, 0, -0.3, 0, 0).finished();
  tree.bodies = {body};
  tree.parent = {-1};
  tree.parent_sub = {0};
  tree.joints = {JointModel::floating()};
  tree.joint_states = {JointState::zero(6)};
  const CcpdiSchedule schedule = compute_ccpdi(tree, 0.03, 8);

  const auto plain = inject_ccpdi(schedule, 0.0, true, 8);
  for (int k = 0; k < 8; ++k)
    CHECK(max_abs(plain[k] - schedule.center_inertia[k].topLeftCorner<3, 3>()) == 0.0);

  const double yaw = M_PI / 4.0;
  const auto rotated = inject_ccpdi(schedule, yaw, true, 8);
  for (int k = 0; k < 8; ++k) {
    const Mat3 ref =
        rot_z(yaw) * schedule.center_inertia[k].topLeftCorner<3, 3>() * rot_z(yaw).transpose();
    CHECK(max_abs(rotated[k] - ref) < 1e-15);
  }

  const auto disabled = inject_ccpdi(schedule, yaw, false, 8);
  for (int k = 0; k < 8; ++k) CHECK(max_abs(disabled[k] - rotated[0]) == 0.0);

  // A rigid tree makes enabled and disabled coincide.
  const DeformableTree rigid = oracles::random_tree(rng, 0.0, 0.0);
  const CcpdiSchedule rs = compute_ccpdi(rigid, 0.03, 8);
  const auto on = inject_ccpdi(rs, 0.3, true, 8);
  const auto off = inject_ccpdi(rs, 0.3, false, 8);
  for (int k = 0; k < 8; ++k) CHECK(max_abs(on[k] - off[k]) < 1e-12);
}

TEST_CASE("discretize trivial cases") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3, 2);
  const DiscreteDynamics d = discretize(a, b, 0.5);
  CHECK(max_abs(d.a - Eigen::MatrixXd::Identity(3, 3)) == 0.0);
  CHECK(max_abs(d.b) == 0.0);

  // Double integrator: position picks up dt * velocity exactly.
  Eigen::MatrixXd a2 = Eigen::MatrixXd::Zero(2, 2);
  a2(0, 1) = 1.0;
  Eigen::MatrixXd b2 = Eigen::MatrixXd::Zero(2, 1);
  b2(1, 0) = 1.0;
  const DiscreteDynamics d2 = discretize(a2, b2, 0.1);
  CHECK(d2.a(0, 1) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(d2.b(1, 0) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(d2.b(0, 0) == doctest::Approx(0.005).epsilon(1e-12));
}

TEST_CASE("zero-order hold matches the substep RK4 oracle") {
  oracles::Rng rng(73u);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd a(13, 13), b(13, 6);
    for (int i = 0; i < 13; ++i) {
      for (int j = 0; j < 13; ++j) a(i, j) = g(rng);
      for (int j = 0; j < 6; ++j) b(i, j) = g(rng);
    }
    Eigen::VectorXd x0(13), u(6);
    for (int i = 0; i < 13; ++i) x0[i] = g(rng);
    for (int i = 0; i < 6; ++i) u[i] = g(rng);
    const double dt = 0.03;
    const DiscreteDynamics d = discretize(a, b, dt);
    const Eigen::VectorXd xd = d.a * x0 + d.b * u;
    const Eigen::VectorXd ref = oracles::integrate_linear(a, b, x0, u, dt, 10000);
    CHECK(max_abs(xd - ref) < 1e-8);
  }
}

TEST_CASE("static equilibrium splits the weight evenly") {
  const MpcProblem p = static_fixture();
  const MpcSolution sol = solve_grf_qp(p, tight_settings());
  REQUIRE(sol.status == QpStatus::Solved);

  const double mg = p.mass * 9.81;
  double sum_z = 0.0;
  for (int i = 0; i < 4; ++i) {
    sum_z += sol.first_step[i].z();
    CHECK(std::abs(sol.first_step[i].z() - mg / 4.0) < 1e-6);
    CHECK(sol.first_step[i].head<2>().norm() < 1e-6);
  }
  CHECK(std::abs(sum_z - mg) < 1e-6);

  // Matches the least-norm static allocation.
  std::vector<Vec3> feet(p.plan.foothold.begin(), p.plan.foothold.begin() + 4);
  const auto ls = oracles::static_allocation(feet, p.mass, 9.81);
  for (int i = 0; i < 4; ++i) CHECK((sol.first_step[i] - ls[i]).cwiseAbs().maxCoeff() < 1e-6);

  // Friction pyramid feasibility across the whole plan.
  for (int k = 0; k < p.horizon; ++k)
    for (int i = 0; i < 4; ++i) {
      const Vec3 f = sol.forces.col(k).segment<3>(3 * i);
      CHECK(std::abs(f.x()) <= p.friction * f.z() + 1e-6 * p.f_max);
      CHECK(std::abs(f.y()) <= p.friction * f.z() + 1e-6 * p.f_max);
      CHECK(f.z() <= p.f_max + 1e-6 * p.f_max);
      CHECK(f.z() >= -1e-9);
    }

  const KktReport kkt = kkt_check(p, sol);
  CHECK(kkt.stationarity < 1e-6);
  CHECK(kkt.primal_feasibility < 1e-6);
  CHECK(kkt.complementarity < 1e-6);
}

TEST_CASE("perturbed solution breaks stationarity") {
  const MpcProblem p = static_fixture();
  MpcSolution sol = solve_grf_qp(p, tight_settings());
  sol.qp_solution[2] += 1.0;  // one extra newton of vertical force
  const KktReport kkt = kkt_check(p, sol);
  CHECK(kkt.stationarity > 1e-3);
}

TEST_CASE("all-swing horizon returns zero forces and a free-fall rollout") {
  MpcProblem p = static_fixture();
  p.plan.contact.assign(p.horizon * 4, 0);
  const MpcSolution sol = solve_grf_qp(p);
  CHECK(max_abs(sol.forces) == 0.0);
  // Vertical velocity integrates gravity.
  CHECK(sol.rollout(11, 0) == doctest::Approx(-9.81 * p.dt).epsilon(1e-9));
  CHECK(sol.rollout(11, p.horizon - 1) ==
        doctest::Approx(-9.81 * p.dt * p.horizon).epsilon(1e-9));
}

TEST_CASE("paper weight set loads and solves the fixture") {
  MpcProblem p = static_fixture(1e-8);  // table weights, GRF weight 1e-8
  p.state.position.z() = 0.24;          // slightly low, so the QP must push
  const MpcSolution sol = solve_grf_qp(p);
  REQUIRE(sol.status == QpStatus::Solved);
  double sum_z = 0.0;
  for (int i = 0; i < 4; ++i) sum_z += sol.first_step[i].z();
  CHECK(sum_z > p.mass * 9.81);  // recovering height needs more than hover thrust
  Eigen::LLT<Eigen::MatrixXd> llt(sol.qp.hessian);
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("returned rollout satisfies the discrete dynamics") {
  MpcProblem p = static_fixture();
  p.state.position.z() = 0.26;
  p.state.linear_velocity = {0.05, -0.02, 0.01};
  p.state.euler_zyx = {0.02, -0.03, 0.4};
  const MpcSolution sol = solve_grf_qp(p, tight_settings());
  Eigen::Matrix<double, kNumStates, 1> x = p.state.vector();
  for (int k = 0; k < p.horizon; ++k) {
    std::vector<Vec3> r(4);
    for (int i = 0; i < 4; ++i) r[i] = p.plan.r(k, i);
    const ContinuousDynamics c = build_continuous_dynamics(p.state, r, p.inertia[k], p.mass);
    const DiscreteDynamics d = discretize(c.a, c.b, p.dt);
    x = d.a * x + d.b * sol.forces.col(k);
    CHECK(max_abs(x - sol.rollout.col(k)) < 1e-8);
  }
}

TEST_CASE("rigid schedule makes enabled and disabled QP data identical") {
  oracles::Rng rng(74u);
  const DeformableTree tree = oracles::random_tree(rng, 0.0, 0.0);
  const CcpdiSchedule schedule = compute_ccpdi(tree, 0.03, 10);
  MpcProblem p = static_fixture();
  p.mass = schedule.total_mass;
  p.inertia = inject_ccpdi(schedule, 0.2, true, p.horizon);
  const MpcSolution on = solve_grf_qp(p);
  p.inertia = inject_ccpdi(schedule, 0.2, false, p.horizon);
  const MpcSolution off = solve_grf_qp(p);
  CHECK(max_abs(on.qp.hessian - off.qp.hessian) == 0.0);
  CHECK(max_abs(on.qp.gradient - off.qp.gradient) == 0.0);
  CHECK(max_abs(on.forces - off.forces) == 0.0);
}
