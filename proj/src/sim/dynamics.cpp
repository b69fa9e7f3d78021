#include "ccpdi/sim/dynamics.hpp"

#include <stdexcept>

namespace ccpdi::sim {

int RigidBodyEngine::add_base(const std::string& name, const SpatialInertia& inertia) {
  if (!bodies_.empty()) throw std::logic_error("base must be the first body");
  EngineBody b;
  b.name = name;
  b.inertia = inertia;
  bodies_.push_back(std::move(b));
  return 0;
}

int RigidBodyEngine::add_body(const std::string& name, int parent, const EngineJoint& joint,
                              const SpatialInertia& inertia) {
  if (parent < 0 || parent >= num_bodies()) throw std::invalid_argument("bad parent body");
  EngineBody b;
  b.name = name;
  b.parent = parent;
  b.joint = joint;
  b.inertia = inertia;
  bodies_.push_back(std::move(b));
  return num_bodies() - 1;
}

EngineState RigidBodyEngine::make_state() const {
  EngineState s;
  s.q = Eigen::VectorXd::Zero(num_joints());
  s.qd = Eigen::VectorXd::Zero(num_joints());
  return s;
}

Transform RigidBodyEngine::child_from_parent(int i, double q) const {
  const EngineJoint& j = bodies_[i].joint;
  ScrewDecomposition s;
  s.axis = j.axis;
  s.travel = q;
  return j.parent_mount * exp_se3(s) * j.child_mount;
}

Kinematics RigidBodyEngine::forward_kinematics(const EngineState& s) const {
  Kinematics kin;
  kin.world_pose.resize(num_bodies());
  kin.body_twist.resize(num_bodies());
  kin.world_pose[0] = s.base_pose;
  kin.body_twist[0] = s.base_twist;
  for (int i = 1; i < num_bodies(); ++i) {
    const EngineBody& b = bodies_[i];
    const Transform child_in_parent = child_from_parent(i, s.q[i - 1]);
    kin.world_pose[i] = kin.world_pose[b.parent] * child_in_parent;
    // Joint axis expressed in the child body frame.
    const Adjoint x_child_mount = adjoint_of(bodies_[i].joint.child_mount.inverse());
    kin.body_twist[i] = adjoint_of(child_in_parent.inverse()) * kin.body_twist[b.parent] +
                        x_child_mount * b.joint.axis * s.qd[i - 1];
  }
  return kin;
}

Eigen::MatrixXd RigidBodyEngine::mass_matrix(const EngineState& s) const {
  const int n = num_bodies();
  const int nv = velocity_dim();

  // Child-from-parent adjoints and child-frame joint axes at the current q.
  std::vector<Adjoint> x_up(n);
  std::vector<Vec6> axis(n);
  for (int i = 1; i < n; ++i) {
    const Transform t = child_from_parent(i, s.q[i - 1]);
    x_up[i] = adjoint_of(t.inverse());
    axis[i] = adjoint_of(bodies_[i].joint.child_mount.inverse()) * bodies_[i].joint.axis;
  }

  std::vector<SpatialInertia> composite(n);
  for (int i = 0; i < n; ++i) composite[i] = bodies_[i].inertia;
  for (int i = n - 1; i >= 1; --i)
    composite[bodies_[i].parent] += x_up[i].transpose() * composite[i] * x_up[i];

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nv, nv);
  m.topLeftCorner<6, 6>() = composite[0];
  for (int i = 1; i < n; ++i) {
    Vec6 f = composite[i] * axis[i];
    m(5 + i, 5 + i) = axis[i].dot(f);
    int j = i;
    while (bodies_[j].parent >= 1) {
      f = x_up[j].transpose() * f;
      j = bodies_[j].parent;
      m(5 + i, 5 + j) = f.dot(axis[j]);
      m(5 + j, 5 + i) = m(5 + i, 5 + j);
    }
    f = x_up[j].transpose() * f;  // into the base frame
    m.block<6, 1>(0, 5 + i) = f;
    m.block<1, 6>(5 + i, 0) = f.transpose();
  }
  return m;
}

Eigen::VectorXd RigidBodyEngine::bias_forces(const EngineState& s, const Vec3& gravity) const {
  const int n = num_bodies();

  std::vector<Adjoint> x_up(n);
  std::vector<Vec6> axis(n);
  for (int i = 1; i < n; ++i) {
    const Transform t = child_from_parent(i, s.q[i - 1]);
    x_up[i] = adjoint_of(t.inverse());
    axis[i] = adjoint_of(bodies_[i].joint.child_mount.inverse()) * bodies_[i].joint.axis;
  }

  // Newton-Euler sweep with vdot = 0; gravity enters as a fictitious base
  // acceleration, which yields exactly the gravity generalized forces.
  std::vector<Twist> v(n), a(n);
  std::vector<Vec6> f(n);
  v[0] = s.base_twist;
  Twist a0 = Twist::Zero();
  a0.tail<3>() = -(s.base_pose.rotation.transpose() * gravity);
  a[0] = a0;
  f[0] = bodies_[0].inertia * a[0] + cross_force(v[0]) * (bodies_[0].inertia * v[0]);
  for (int i = 1; i < n; ++i) {
    const Vec6 vj = axis[i] * s.qd[i - 1];
    v[i] = x_up[i] * v[bodies_[i].parent] + vj;
    a[i] = x_up[i] * a[bodies_[i].parent] + cross_motion(v[i]) * vj;
    f[i] = bodies_[i].inertia * a[i] + cross_force(v[i]) * (bodies_[i].inertia * v[i]);
  }

  Eigen::VectorXd h = Eigen::VectorXd::Zero(velocity_dim());
  for (int i = n - 1; i >= 1; --i) {
    h[5 + i] = axis[i].dot(f[i]);
    f[bodies_[i].parent] += x_up[i].transpose() * f[i];
  }
  h.head<6>() = f[0];
  return h;
}

Eigen::MatrixXd RigidBodyEngine::point_jacobian(const EngineState& s, const Kinematics& kin,
                                                int body, const Vec3& local_point) const {
  const int nv = velocity_dim();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3, nv);

  // World velocity of the point: R_wb (v_b + w_b x p) for the body's own
  // twist; accumulate each dof's unit-twist contribution at the body.
  const Mat3 r_wb = kin.world_pose[body].rotation;
  const auto point_map = [&](const Twist& unit_twist_in_body) -> Vec3 {
    return r_wb * (unit_twist_in_body.tail<3>() +
                   unit_twist_in_body.head<3>().cross(local_point));
  };

  // Base columns: body twist from a unit base twist e is X_{body<-base} e.
  const Transform base_from_body = kin.world_pose[0].inverse() * kin.world_pose[body];
  const Adjoint x_body_base = adjoint_of(base_from_body.inverse());
  for (int c = 0; c < 6; ++c) jac.col(c) = point_map(x_body_base * Vec6::Unit(c));

  // Joint columns along the ancestor chain.
  int i = body;
  Adjoint x_body_i = Adjoint::Identity();
  while (i >= 1) {
    const Vec6 axis_i = adjoint_of(bodies_[i].joint.child_mount.inverse()) * bodies_[i].joint.axis;
    jac.col(5 + i) = point_map(x_body_i * axis_i);
    const Transform t = child_from_parent(i, s.q[i - 1]);
    x_body_i = x_body_i * adjoint_of(t.inverse());
    i = bodies_[i].parent;
  }
  return jac;
}

Vec3 RigidBodyEngine::point_position(const Kinematics& kin, int body,
                                     const Vec3& local_point) const {
  return kin.world_pose[body].apply(local_point);
}

Vec3 RigidBodyEngine::point_velocity(const Kinematics& kin, int body,
                                     const Vec3& local_point) const {
  const Twist& v = kin.body_twist[body];
  return kin.world_pose[body].rotation * (v.tail<3>() + v.head<3>().cross(local_point));
}

EngineState RigidBodyEngine::integrate(const EngineState& s, const Eigen::VectorXd& vdot,
                                       double dt) const {
  EngineState next = s;
  next.base_twist += vdot.head<6>() * dt;
  next.qd += vdot.tail(num_joints()) * dt;
  next.base_pose = s.base_pose * exp_twist(next.base_twist, dt);
  next.q += next.qd * dt;
  return next;
}

double RigidBodyEngine::total_mass() const {
  double m = 0.0;
  for (const auto& b : bodies_) m += inertia_mass(b.inertia);
  return m;
}

Vec3 RigidBodyEngine::com_world(const EngineState& s) const {
  const Kinematics kin = forward_kinematics(s);
  Vec3 weighted = Vec3::Zero();
  double m = 0.0;
  for (int i = 0; i < num_bodies(); ++i) {
    const double mi = inertia_mass(bodies_[i].inertia);
    weighted += mi * kin.world_pose[i].apply(inertia_com(bodies_[i].inertia));
    m += mi;
  }
  return weighted / m;
}

Vec3 RigidBodyEngine::com_velocity_world(const EngineState& s) const {
  const Kinematics kin = forward_kinematics(s);
  Vec3 momentum = Vec3::Zero();
  double m = 0.0;
  for (int i = 0; i < num_bodies(); ++i) {
    const double mi = inertia_mass(bodies_[i].inertia);
    momentum += mi * point_velocity(kin, i, inertia_com(bodies_[i].inertia));
    m += mi;
  }
  return momentum / m;
}

double RigidBodyEngine::total_energy(const EngineState& s, const Vec3& gravity) const {
  const Kinematics kin = forward_kinematics(s);
  double e = 0.0;
  for (int i = 0; i < num_bodies(); ++i) {
    const Twist& v = kin.body_twist[i];
    e += 0.5 * v.dot(bodies_[i].inertia * v);
    const double mi = inertia_mass(bodies_[i].inertia);
    e -= mi * gravity.dot(kin.world_pose[i].apply(inertia_com(bodies_[i].inertia)));
  }
  return e;
}

}  // namespace ccpdi::sim
