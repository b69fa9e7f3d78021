#include "ccpdi/sim/simulation.hpp"

#include <Eigen/Cholesky>

namespace ccpdi::sim {

Simulator::Simulator(const QuadrupedModel& model, const RobotDescription& desc, double dt)
    : model_(model), desc_(desc), dt_(dt) {
  if (dt_ <= 0.0 || dt_ > 1e-3 + 1e-12)
    throw std::invalid_argument("simulator dt must be in (0, 1 ms]");
}

SimState Simulator::initial_state() const {
  SimState s;
  s.engine = nominal_state(model_, desc_);
  return s;
}

Vec3 Simulator::contact_model(const Vec3& pos, const Vec3& vel) const {
  if (pos.z() >= 0.0) return Vec3::Zero();
  const double fn =
      std::max(0.0, -desc_.contact_stiffness * pos.z() - desc_.contact_damping * vel.z());
  const Eigen::Vector2d vt = vel.head<2>();
  const double vnorm = std::sqrt(vt.squaredNorm() + desc_.contact_vreg * desc_.contact_vreg);
  const Eigen::Vector2d ft = -desc_.contact_mu * fn * vt / vnorm;
  return {ft.x(), ft.y(), fn};
}

SimState Simulator::step(const SimState& s, const Eigen::VectorXd& joint_torques) const {
  const RigidBodyEngine& eng = model_.engine;
  const int nv = eng.velocity_dim();

  SimState next = s;
  const Kinematics kin = eng.forward_kinematics(s.engine);

  Eigen::VectorXd tau = Eigen::VectorXd::Zero(nv);
  tau.tail(eng.num_joints()) = joint_torques;

  // Passive spine: spring-damper about the rest length plus travel stops. The
  // stop springs engage a little inside the bounds so they can decelerate the
  // carriage before the hard clamp below ever acts.
  if (model_.compliant) {
    const double l = s.engine.q[model_.spine_dof];
    const double ld = s.engine.qd[model_.spine_dof];
    double f = -desc_.spine_stiffness * (l - desc_.spine_rest) -
               desc_.effective_spine_damping() * ld;
    constexpr double kStop = 3.0e3;
    constexpr double kStopDamping = 60.0;
    constexpr double kStopMargin = 0.015;
    const double lo = desc_.spine_min + kStopMargin;
    const double hi = desc_.spine_max - kStopMargin;
    if (l < lo) f += kStop * (lo - l) - kStopDamping * std::min(ld, 0.0);
    if (l > hi) f += kStop * (hi - l) - kStopDamping * std::max(ld, 0.0);
    tau[6 + model_.spine_dof] = f;
  }

  // Ground contact on the point feet. The velocity-dependent part of the
  // contact force (normal damping and the regularized friction, whose
  // effective viscosity near sticking far exceeds what an explicit 1 kHz step
  // tolerates) is handled implicitly: f(v + dv) ~ f(v) + C J dv with C <= 0,
  // which moves dt J' |C| J onto the mass matrix.
  Eigen::MatrixXd m = eng.mass_matrix(s.engine);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const Vec3 pos = eng.point_position(kin, model_.shank_body[leg], model_.foot_local);
    const Vec3 vel = eng.point_velocity(kin, model_.shank_body[leg], model_.foot_local);
    const Vec3 f = contact_model(pos, vel);
    next.foot_contact[leg] = f.z() > 0.0;
    next.contact_force[leg] = f;
    if (f.z() > 0.0) {
      const Eigen::MatrixXd jac =
          eng.point_jacobian(s.engine, kin, model_.shank_body[leg], model_.foot_local);
      tau += jac.transpose() * f;
      const double vreg = desc_.contact_vreg;
      const double vt = std::sqrt(vel.head<2>().squaredNorm() + vreg * vreg);
      Vec3 damping(desc_.contact_mu * f.z() / vt, desc_.contact_mu * f.z() / vt,
                   desc_.contact_damping);
      m.noalias() += dt_ * jac.transpose() * damping.asDiagonal() * jac;
    }
  }

  const Eigen::VectorXd h = eng.bias_forces(s.engine, {0.0, 0.0, desc_.gravity_z});
  const Eigen::VectorXd vdot = m.ldlt().solve(tau - h);

  next.engine = eng.integrate(s.engine, vdot, dt_);
  next.time = s.time + dt_;

  // Hard travel clamp: the stops above do the physics, this keeps the length
  // inside the bounds to the integrator's resolution.
  if (model_.compliant) {
    double& l = next.engine.q[model_.spine_dof];
    double& ld = next.engine.qd[model_.spine_dof];
    if (l < desc_.spine_min) {
      l = desc_.spine_min;
      ld = std::max(ld, 0.0);
    } else if (l > desc_.spine_max) {
      l = desc_.spine_max;
      ld = std::min(ld, 0.0);
    }
  }

  if (!next.engine.q.allFinite() || !next.engine.qd.allFinite() ||
      !next.engine.base_twist.allFinite() || !next.engine.base_pose.translation.allFinite())
    next.diverged = true;
  return next;
}

}  // namespace ccpdi::sim
