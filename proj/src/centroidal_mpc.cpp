#include "ccpdi/centroidal_mpc.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <stdexcept>

namespace ccpdi {

Eigen::Matrix<double, kNumStates, 1> CentroidalState::vector() const {
  Eigen::Matrix<double, kNumStates, 1> x;
  x << euler_zyx, position, angular_velocity, linear_velocity, gravity_z;
  return x;
}

bool CentroidalState::small_angle_valid() const {
  return std::abs(euler_zyx.x()) < M_PI / 2 && std::abs(euler_zyx.y()) < M_PI / 2;
}

int FootholdPlan::stance_count() const {
  int n = 0;
  for (uint8_t c : contact) n += (c != 0);
  return n;
}

Eigen::Matrix<double, kNumStates, 1> MpcWeights::state_diag() const {
  Eigen::Matrix<double, kNumStates, 1> q;
  q << q_euler, q_position, q_angular_velocity, q_velocity, 0.0;
  return q;
}

void MpcProblem::check() const {
  if (horizon < 1 || dt <= 0.0) throw std::invalid_argument("mpc: bad horizon or dt");
  if (mass <= 0.0) throw std::invalid_argument("mpc: mass must be positive");
  if (static_cast<int>(inertia.size()) < horizon)
    throw std::invalid_argument("mpc: inertia schedule shorter than horizon");
  if (plan.horizon < horizon || plan.num_feet < 1)
    throw std::invalid_argument("mpc: foothold plan shorter than horizon");
  if (static_cast<int>(reference.size()) < horizon)
    throw std::invalid_argument("mpc: reference shorter than horizon");
  for (int k = 0; k < horizon; ++k) {
    Eigen::LLT<Mat3> llt(inertia[k]);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("mpc: inertia must be positive definite");
  }
}

ContinuousDynamics build_continuous_dynamics(const CentroidalState& s,
                                             const std::vector<Vec3>& footholds,
                                             const Mat3& inertia, double mass) {
  if (mass <= 0.0) throw std::invalid_argument("dynamics: mass must be positive");
  Eigen::FullPivLU<Mat3> lu(inertia);
  if (!lu.isInvertible()) throw std::invalid_argument("dynamics: singular inertia");
  const Mat3 inertia_inv = lu.inverse();

  ContinuousDynamics d;
  d.a.setZero();
  d.a.block<3, 3>(0, 6) = rot_z(s.euler_zyx.z()).transpose();
  d.a.block<3, 3>(3, 9) = Mat3::Identity();
  d.a(11, 12) = 1.0;  // gravity feeds the vertical velocity

  const int nf = static_cast<int>(footholds.size());
  d.b.setZero(kNumStates, 3 * nf);
  for (int i = 0; i < nf; ++i) {
    d.b.block<3, 3>(6, 3 * i) = inertia_inv * skew(footholds[i]);
    d.b.block<3, 3>(9, 3 * i) = Mat3::Identity() / mass;
  }
  return d;
}

std::vector<Mat3> inject_ccpdi(const CcpdiSchedule& schedule, double yaw, bool enabled,
                               int horizon) {
  if (schedule.horizon < horizon)
    throw std::invalid_argument("inject_ccpdi: schedule shorter than horizon");
  const Mat3 rz = rot_z(yaw);
  std::vector<Mat3> out(static_cast<size_t>(horizon));
  for (int k = 0; k < horizon; ++k) {
    const int src = enabled ? k : 0;
    out[k] = rz * schedule.center_inertia[src].topLeftCorner<3, 3>() * rz.transpose();
  }
  return out;
}

DiscreteDynamics discretize(const Eigen::Ref<const Eigen::MatrixXd>& a_c,
                            const Eigen::Ref<const Eigen::MatrixXd>& b_c, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("discretize: dt must be positive");
  const Eigen::Index n = a_c.rows();
  const Eigen::Index m = b_c.cols();
  Eigen::MatrixXd stacked = Eigen::MatrixXd::Zero(n + m, n + m);
  stacked.topLeftCorner(n, n) = a_c * dt;
  stacked.topRightCorner(n, m) = b_c * dt;
  const Eigen::MatrixXd e = stacked.exp();
  DiscreteDynamics d;
  d.a = e.topLeftCorner(n, n);
  d.b = e.topRightCorner(n, m);
  return d;
}

namespace {

// Index map from condensed stance variables to the full force vector.
struct StanceIndex {
  std::vector<int> to_full;  // condensed var -> column in (k * 3nf) layout
  int count = 0;
};

StanceIndex build_stance_index(const FootholdPlan& plan, int horizon) {
  StanceIndex s;
  for (int k = 0; k < horizon; ++k)
    for (int i = 0; i < plan.num_feet; ++i)
      if (plan.in_contact(k, i))
        for (int c = 0; c < 3; ++c) s.to_full.push_back((k * plan.num_feet + i) * 3 + c);
  s.count = static_cast<int>(s.to_full.size());
  return s;
}

}  // namespace

MpcSolution solve_grf_qp(const MpcProblem& problem, const QpSettings& settings) {
  problem.check();
  const int n = problem.horizon;
  const int nf = problem.plan.num_feet;
  const int nu = 3 * nf;

  // A depends only on the yaw and gravity channel, so one hold map serves all
  // steps: A_d = exp(A dt) and B_{d,k} = (int_0^dt exp(A s) ds) B_k, the ZOH
  // being linear in B. This also keeps sign-symmetric foot columns exactly
  // sign-symmetric through the discretization.
  std::vector<Eigen::Matrix<double, kNumStates, kNumStates>> a_d(n);
  std::vector<Eigen::MatrixXd> b_d(n);
  {
    std::vector<Vec3> r0(nf);
    for (int i = 0; i < nf; ++i) r0[i] = problem.plan.r(0, i);
    const ContinuousDynamics c0 =
        build_continuous_dynamics(problem.state, r0, problem.inertia[0], problem.mass);
    const DiscreteDynamics hold = discretize(
        c0.a, Eigen::MatrixXd::Identity(kNumStates, kNumStates), problem.dt);
    for (int k = 0; k < n; ++k) {
      std::vector<Vec3> r(nf);
      for (int i = 0; i < nf; ++i) r[i] = problem.plan.r(k, i);
      const ContinuousDynamics c =
          build_continuous_dynamics(problem.state, r, problem.inertia[k], problem.mass);
      a_d[k] = hold.a;
      b_d[k] = hold.b * c.b;
    }
  }

  // Stack the prediction x_k = (prod A) x0 + sum (prod A) B u: S_x and S_u.
  const Eigen::Matrix<double, kNumStates, 1> x0 = problem.state.vector();
  Eigen::MatrixXd s_x(kNumStates * n, kNumStates);
  Eigen::MatrixXd s_u = Eigen::MatrixXd::Zero(kNumStates * n, nu * n);
  Eigen::Matrix<double, kNumStates, kNumStates> prod =
      Eigen::Matrix<double, kNumStates, kNumStates>::Identity();
  for (int k = 0; k < n; ++k) {
    // Row block k holds x_{k+1}.
    if (k == 0) {
      s_u.block(0, 0, kNumStates, nu) = b_d[0];
    } else {
      s_u.block(kNumStates * k, 0, kNumStates, nu * k) =
          a_d[k] * s_u.block(kNumStates * (k - 1), 0, kNumStates, nu * k);
      s_u.block(kNumStates * k, nu * k, kNumStates, nu) = b_d[k];
    }
    prod = a_d[k] * prod;
    s_x.block(kNumStates * k, 0, kNumStates, kNumStates) = prod;
  }

  // Condense onto stance variables only; swing forces are identically zero.
  const StanceIndex stance = build_stance_index(problem.plan, n);
  Eigen::MatrixXd s_u_red(kNumStates * n, stance.count);
  for (int c = 0; c < stance.count; ++c) s_u_red.col(c) = s_u.col(stance.to_full[c]);

  Eigen::VectorXd q_diag(kNumStates * n);
  Eigen::VectorXd r_diag(stance.count);
  const Eigen::Matrix<double, kNumStates, 1> q_step = problem.weights.state_diag();
  for (int k = 0; k < n; ++k) q_diag.segment(kNumStates * k, kNumStates) = q_step;
  for (int c = 0; c < stance.count; ++c)
    r_diag[c] = problem.weights.r_force[stance.to_full[c] % 3];

  Eigen::VectorXd x_ref(kNumStates * n);
  for (int k = 0; k < n; ++k) x_ref.segment(kNumStates * k, kNumStates) = problem.reference[k];

  QpProblem qp;
  const Eigen::MatrixXd qsu = q_diag.asDiagonal() * s_u_red;
  qp.hessian = 2.0 * (s_u_red.transpose() * qsu);
  qp.hessian.diagonal() += 2.0 * r_diag;
  qp.gradient = 2.0 * (qsu.transpose() * (s_x * x0 - x_ref));

  // Friction pyramid per stance foot per step:
  //   |f_x| <= mu f_z, |f_y| <= mu f_z, 0 <= f_z <= f_max.
  const int per_foot = 6;
  const int n_stance_feet = stance.count / 3;
  qp.constraints = Eigen::MatrixXd::Zero(per_foot * n_stance_feet, stance.count);
  qp.bounds = Eigen::VectorXd::Zero(per_foot * n_stance_feet);
  for (int f = 0; f < n_stance_feet; ++f) {
    const int col = 3 * f;
    const int row = per_foot * f;
    const double mu = problem.friction;
    qp.constraints(row + 0, col + 0) = 1.0;   // f_x - mu f_z <= 0
    qp.constraints(row + 0, col + 2) = -mu;
    qp.constraints(row + 1, col + 0) = -1.0;  // -f_x - mu f_z <= 0
    qp.constraints(row + 1, col + 2) = -mu;
    qp.constraints(row + 2, col + 1) = 1.0;
    qp.constraints(row + 2, col + 2) = -mu;
    qp.constraints(row + 3, col + 1) = -1.0;
    qp.constraints(row + 3, col + 2) = -mu;
    qp.constraints(row + 4, col + 2) = 1.0;   // f_z <= f_max
    qp.bounds[row + 4] = problem.f_max;
    qp.constraints(row + 5, col + 2) = -1.0;  // -f_z <= 0
  }

  const QpResult qr = solve_qp(qp, settings);

  MpcSolution sol;
  sol.qp = std::move(qp);
  sol.qp_solution = qr.x;
  sol.qp_multipliers = qr.multipliers;
  sol.status = qr.status;
  sol.iterations = qr.iterations;
  sol.dual_residual = qr.dual_residual;
  sol.primal_residual = qr.primal_residual;
  sol.complementarity = qr.complementarity;

  sol.forces = Eigen::MatrixXd::Zero(nu, n);
  for (int c = 0; c < stance.count; ++c) {
    const int full = stance.to_full[c];
    sol.forces(full % nu, full / nu) = qr.x[c];
  }
  sol.first_step.resize(nf);
  for (int i = 0; i < nf; ++i) sol.first_step[i] = sol.forces.col(0).segment<3>(3 * i);

  const Eigen::VectorXd stacked =
      s_x * x0 + (stance.count > 0 ? Eigen::VectorXd(s_u_red * qr.x)
                                   : Eigen::VectorXd(Eigen::VectorXd::Zero(kNumStates * n)));
  sol.rollout.resize(kNumStates, n);
  for (int k = 0; k < n; ++k) sol.rollout.col(k) = stacked.segment(kNumStates * k, kNumStates);
  return sol;
}

double KktReport::max_violation() const {
  return std::max({stationarity, primal_feasibility, complementarity});
}

KktReport kkt_check(const MpcProblem& problem, const MpcSolution& solution) {
  (void)problem;
  KktReport rep;
  const Eigen::VectorXd& u = solution.qp_solution;
  const Eigen::VectorXd& lam = solution.qp_multipliers;
  if (u.size() == 0) return rep;
  const Eigen::VectorXd grad_lag = solution.qp.hessian * u + solution.qp.gradient +
                                   solution.qp.constraints.transpose() * lam;
  rep.stationarity = grad_lag.cwiseAbs().maxCoeff();
  const Eigen::VectorXd viol = solution.qp.constraints * u - solution.qp.bounds;
  rep.primal_feasibility = std::max(0.0, viol.maxCoeff());
  rep.complementarity = viol.cwiseProduct(lam).cwiseAbs().maxCoeff();
  return rep;
}

}  // namespace ccpdi
