#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ccpdi/multibody_tree.hpp"
#include "oracles/oracles.hpp"

using namespace ccpdi;

namespace {
double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }
}  // namespace

TEST_CASE("revolute joint at zero with identity mounts") {
  const JointModel j = JointModel::revolute(Vec3::UnitZ());
  CHECK(max_abs(joint_adjoint(j, JointState::zero(1)) - Adjoint::Identity()) < 1e-15);
}

TEST_CASE("prismatic joint gives a pure-translation adjoint") {
  const JointModel j = JointModel::prismatic(Vec3::UnitZ());
  JointState s = JointState::zero(1);
  s.q[0] = 0.05;
  const Adjoint x = joint_adjoint(j, s);
  CHECK(max_abs(x.topLeftCorner<3, 3>() - Mat3::Identity()) < 1e-15);
  CHECK(max_abs(x.bottomLeftCorner<3, 3>() - skew(Vec3(0, 0, -0.05))) < 1e-15);
}

TEST_CASE("joint adjoint is consistent with the transform composition") {
  oracles::Rng rng(41u);
  std::uniform_real_distribution<double> q(-1.5, 1.5);
  for (int i = 0; i < 100; ++i) {
    const Vec3 axis = Vec3::Unit(i % 3);
    const Transform pm = oracles::random_transform(rng);
    const Transform cm = oracles::random_transform(rng);
    const JointModel j = (i % 2 == 0) ? JointModel::revolute(axis, pm, cm)
                                      : JointModel::prismatic(axis, pm, cm);
    JointState s = JointState::zero(1);
    s.q[0] = q(rng);
    ScrewDecomposition sd;
    sd.axis = j.free_modes.col(0);
    sd.travel = s.q[0];
    const Transform composed = pm * exp_se3(sd) * cm;
    CHECK(max_abs(joint_adjoint(j, s) - adjoint_of(composed.inverse())) < 1e-12);
  }
}

TEST_CASE("rigid twist propagation basics") {
  const JointModel j = JointModel::revolute(Vec3::UnitY());
  JointState s = JointState::zero(1);
  CHECK(propagate_twist_rigid(Twist::Zero(), j, s).norm() == 0.0);
  s.qd[0] = 1.0;
  const Twist v = propagate_twist_rigid(Twist::Zero(), j, s);
  CHECK(max_abs(v - j.free_modes.col(0)) < 1e-15);
}

TEST_CASE("rigid chain tip twist against finite differences") {
  oracles::Rng rng(42u);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<JointModel> joints;
    std::vector<JointState> states;
    for (int i = 0; i < 3; ++i) {
      const Vec3 axis = Vec3::Unit((trial + i) % 3);
      joints.push_back(i % 2 == 0
                           ? JointModel::revolute(axis, oracles::random_transform(rng),
                                                  oracles::random_transform(rng))
                           : JointModel::prismatic(axis, oracles::random_transform(rng),
                                                   oracles::random_transform(rng)));
      JointState s = JointState::zero(1);
      s.q[0] = u(rng);
      s.qd[0] = u(rng);
      states.push_back(s);
    }

    const auto chain_pose = [&](const std::vector<double>& q) {
      Transform t;
      for (int i = 0; i < 3; ++i)
        t = t * joint_child_pose(joints[i], Eigen::VectorXd::Constant(1, q[i]));
      return t;
    };

    Twist v = Twist::Zero();
    std::vector<double> q(3);
    for (int i = 0; i < 3; ++i) {
      v = propagate_twist_rigid(v, joints[i], states[i]);
      q[i] = states[i].q[0];
    }

    // Finite-difference body twist of the tip frame.
    const double h = 1e-6;
    const Transform t0 = chain_pose(q);
    std::vector<double> q1 = q;
    for (int i = 0; i < 3; ++i) q1[i] += h * states[i].qd[0];
    const Transform t1 = chain_pose(q1);
    const Twist v_fd = log_se3(t0.inverse() * t1) / h;
    CHECK(max_abs(v - v_fd) < 1e-5);
  }
}

TEST_CASE("deformable propagation reduces to rigid for a frozen parent") {
  oracles::Rng rng(43u);
  for (int trial = 0; trial < 25; ++trial) {
    const Transform sub_pose = oracles::random_transform(rng);
    const JointModel j = JointModel::revolute(Vec3::UnitZ(), oracles::random_transform(rng),
                                              oracles::random_transform(rng));
    JointState s = JointState::zero(1);
    s.q[0] = 0.4;
    s.qd[0] = -0.7;
    const Twist parent = oracles::random_twist(rng, 1.0, 1.0);

    // Parent sub-body frozen: its predictive adjoint at k = 0 is the plain
    // frame inverse, and the composite must equal the rigid propagation with
    // the sub-body pose folded into the joint mount.
    const Adjoint pat0 = adjoint_of(sub_pose.inverse());
    const auto prop = propagate_twist_deformable(parent, pat0, Twist::Zero(), j, s);

    const JointModel folded = JointModel::revolute(Vec3::UnitZ(), sub_pose * j.parent_mount,
                                                   j.child_mount);
    const Twist rigid = propagate_twist_rigid(parent, folded, s);
    CHECK(max_abs(prop.child_twist - rigid) < 1e-12);
  }
}

TEST_CASE("deformable propagation adds the transformed sub-body twist") {
  oracles::Rng rng(44u);
  const JointModel j = JointModel::revolute(Vec3::UnitY());
  const JointState s = JointState::zero(1);  // zero joint rates
  Twist spine = Twist::Zero();
  spine[3] = 0.2;  // pure extension measured at the parent sub-body
  const auto prop = propagate_twist_deformable(Twist::Zero(), Adjoint::Identity(), spine, j, s);
  CHECK(max_abs(prop.child_twist - joint_adjoint(j, s) * spine) < 1e-15);
}

TEST_CASE("step-k adjoint composes joint and rolled sub-body frame") {
  oracles::Rng rng(45u);
  for (int trial = 0; trial < 25; ++trial) {
    const DeformableBody parent_body = oracles::random_body(rng, 3, 1.5, 0.5);
    const int ps = parent_body.num_sub_bodies() - 1;
    const double dt = 0.04;
    const int k = 5;
    const PdiSchedule sched = compute_pdi(parent_body, dt, k + 1);

    const JointModel j = JointModel::revolute(Vec3::UnitX(), oracles::random_transform(rng),
                                              oracles::random_transform(rng));
    JointState s = JointState::zero(1);
    s.q[0] = 0.3;

    const auto prop =
        propagate_twist_deformable(Twist::Zero(), sched.pat[ps][k], Twist::Zero(), j, s);

    // Roll the sub-body frame forward k steps by plain transform composition.
    Transform pose = parent_body.states[ps].pose;
    const Transform step = exp_twist(parent_body.states[ps].twist, dt);
    for (int i = 0; i < k; ++i) pose = pose * step;
    const Transform parent_to_child = (pose * joint_child_pose(j, s.q)).inverse();
    CHECK(max_abs(prop.parent_to_child - adjoint_of(parent_to_child)) < 1e-10);
  }
}

TEST_CASE("tree validation catches topology violations") {
  oracles::Rng rng(46u);
  DeformableTree tree = oracles::random_tree(rng, 0.0, 0.0);
  DeformableTree broken = tree;
  broken.parent[1] = 1;  // self-parent
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
  broken = tree;
  broken.parent_sub[1] = 99;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
  broken = tree;
  broken.joints[1] = JointModel::floating();
  broken.joint_states[1] = JointState::zero(6);
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
}

TEST_CASE("single rigid root body: schedule constant, coupling-free center") {
  oracles::Rng rng(47u);
  DeformableTree tree;
  tree.bodies.push_back(oracles::random_body(rng, 3, 0.0, 0.0));
  tree.parent = {-1};
  tree.parent_sub = {0};
  tree.joints = {JointModel::floating()};
  tree.joint_states = {JointState::zero(6)};

  const CcpdiSchedule s = compute_ccpdi(tree, 0.03, 8);
  const SpatialInertia body = instantaneous_body_inertia(tree.bodies[0]);
  for (int k = 0; k < 8; ++k) {
    CHECK(max_abs(s.root_inertia[k] - body) < 1e-12);
    CHECK(max_abs(s.center_inertia[k].topRightCorner<3, 3>()) < 1e-10);
    CHECK(max_abs(s.center_inertia[k].bottomLeftCorner<3, 3>()) < 1e-10);
  }
}

TEST_CASE("all-rigid tree at k = 0 equals the flat-sum composite") {
  oracles::Rng rng(48u);
  for (int trial = 0; trial < 50; ++trial) {
    const DeformableTree tree = oracles::random_tree(rng, 0.0, 0.0);
    const CcpdiSchedule s = compute_ccpdi(tree, 0.03, 4);
    const SpatialInertia ref = oracles::flat_sum_composite(tree);
    CHECK(max_abs(s.root_inertia[0] - ref) / std::max(1.0, max_abs(ref)) < 1e-11);
  }
}

TEST_CASE("rigid tree keeps the schedule constant over k") {
  oracles::Rng rng(49u);
  for (int trial = 0; trial < 25; ++trial) {
    const DeformableTree tree = oracles::random_tree(rng, 0.0, 0.0);
    const CcpdiSchedule s = compute_ccpdi(tree, 0.05, 10);
    for (int k = 1; k < 10; ++k)
      CHECK(max_abs(s.root_inertia[k] - s.root_inertia[0]) < 1e-12);
  }
}

TEST_CASE("deformable tree matches the whole-tree rollout oracle") {
  oracles::Rng rng(50u);
  for (int trial = 0; trial < 20; ++trial) {
    const DeformableTree tree = oracles::random_tree(rng, 1.5, 0.5);
    const double dt = 0.05;
    const int horizon = 10;  // 0.5 s ahead
    const CcpdiSchedule s = compute_ccpdi(tree, dt, horizon);
    for (int k = 0; k < horizon; ++k) {
      const SpatialInertia ref = oracles::rollout_tree_inertia(tree, dt, k);
      CHECK(max_abs(s.root_inertia[k] - ref) / std::max(1.0, max_abs(ref)) < 1e-8);
    }
  }
}

TEST_CASE("composite centroid is frame independent") {
  oracles::Rng rng(51u);
  for (int trial = 0; trial < 20; ++trial) {
    const DeformableTree tree = oracles::random_tree(rng, 1.0, 0.4);
    const CcpdiSchedule s = compute_ccpdi(tree, 0.04, 6);
    // Independent centroid: mass-weighted sub-body CoM positions in the root
    // frame from plain transform chains.
    const int n = tree.num_bodies();
    std::vector<Transform> root_from_body(n);
    for (int i = 1; i < n; ++i) {
      root_from_body[i] = root_from_body[tree.parent[i]] *
                          tree.bodies[tree.parent[i]].states[tree.parent_sub[i]].pose *
                          joint_child_pose(tree.joints[i], tree.joint_states[i].q);
    }
    Vec3 weighted = Vec3::Zero();
    double mass = 0.0;
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < tree.bodies[i].num_sub_bodies(); ++jj) {
        const auto& p = tree.bodies[i].params[jj];
        weighted +=
            p.mass * (root_from_body[i] * tree.bodies[i].states[jj].pose).apply(p.com);
        mass += p.mass;
      }
    CHECK(max_abs(s.centroid[0] - weighted / mass) < 1e-9);
    CHECK(s.total_mass == doctest::Approx(mass).epsilon(1e-12));
  }
}

TEST_CASE("center-frame tensors lose their coupling blocks") {
  oracles::Rng rng(52u);
  for (int trial = 0; trial < 20; ++trial) {
    const DeformableTree tree = oracles::random_tree(rng, 1.5, 0.5);
    const CcpdiSchedule s = compute_ccpdi(tree, 0.03, 8);
    for (int k = 0; k < 8; ++k) {
      CHECK(max_abs(s.center_inertia[k].topRightCorner<3, 3>()) < 1e-10);
      CHECK(max_abs(s.center_inertia[k].bottomRightCorner<3, 3>() -
                    s.total_mass * Mat3::Identity()) < 1e-10);
    }
  }
}

TEST_CASE("center-body twist carries the root twist to the centroid") {
  oracles::Rng rng(53u);
  DeformableTree tree = oracles::random_tree(rng, 1.0, 0.3);
  tree.root_twist = oracles::random_twist(rng, 1.0, 0.5);
  const CcpdiSchedule s = compute_ccpdi(tree, 0.03, 4);
  const Vec3 w = tree.root_twist.head<3>();
  const Vec3 v = tree.root_twist.tail<3>();
  CHECK(max_abs(s.center_twist.head<3>() - w) < 1e-12);
  CHECK(max_abs(s.center_twist.tail<3>() - (v + w.cross(s.centroid[0]))) < 1e-12);
}
