#include "ccpdi/qp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <stdexcept>

namespace ccpdi {

namespace {

// Largest alpha in (0, 1] keeping v + alpha*dv >= (1 - tau) * v.
double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv, double tau) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) alpha = std::min(alpha, -tau * v[i] / dv[i]);
  return alpha;
}

}  // namespace

QpResult solve_qp(const QpProblem& p, const QpSettings& settings) {
  const Eigen::Index n = p.hessian.rows();
  const Eigen::Index m = p.constraints.rows();
  if (p.hessian.cols() != n || p.gradient.size() != n)
    throw std::invalid_argument("solve_qp: inconsistent objective dimensions");
  if (p.bounds.size() != m || (m > 0 && p.constraints.cols() != n))
    throw std::invalid_argument("solve_qp: inconsistent constraint dimensions");

  QpResult res;
  if (n == 0) {
    res.x.resize(0);
    res.multipliers.resize(m);
    res.multipliers.setZero();
    res.slacks = p.bounds;
    return res;
  }
  if (m == 0) {
    res.x = p.hessian.ldlt().solve(-p.gradient);
    res.multipliers.resize(0);
    res.slacks.resize(0);
    res.dual_residual = (p.hessian * res.x + p.gradient).cwiseAbs().maxCoeff();
    return res;
  }

  const double obj_scale = std::max({1.0, p.gradient.cwiseAbs().maxCoeff(),
                                     p.hessian.cwiseAbs().maxCoeff()});
  const double rhs_scale = std::max(1.0, p.bounds.cwiseAbs().maxCoeff());

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s = (p.bounds - p.constraints * x).cwiseMax(1.0);
  Eigen::VectorXd lam = Eigen::VectorXd::Ones(m);

  for (int it = 0; it < settings.max_iterations; ++it) {
    Eigen::VectorXd r_dual = p.hessian * x + p.gradient + p.constraints.transpose() * lam;
    Eigen::VectorXd r_prim = p.constraints * x + s - p.bounds;
    const double mu = s.dot(lam) / static_cast<double>(m);

    res.iterations = it;
    res.dual_residual = r_dual.cwiseAbs().maxCoeff();
    res.primal_residual = r_prim.cwiseAbs().maxCoeff();
    res.complementarity = mu;
    if (res.dual_residual <= settings.residual_tolerance * obj_scale &&
        res.primal_residual <= settings.residual_tolerance * rhs_scale &&
        mu <= settings.gap_tolerance * std::max(1.0, rhs_scale)) {
      res.x = x;
      res.multipliers = lam;
      res.slacks = s;
      res.status = QpStatus::Solved;
      return res;
    }

    // Normal equations: (H + A' diag(lam/s) A) dx = rhs. PD because H is PD.
    const Eigen::VectorXd d = lam.cwiseQuotient(s);
    Eigen::MatrixXd k = p.hessian;
    k.noalias() += p.constraints.transpose() * d.asDiagonal() * p.constraints;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) {
      k.diagonal().array() += 1e-12 * obj_scale;
      llt.compute(k);
    }

    // Newton directions satisfy
    //   H dx + A' dlam = -r_dual,  A dx + ds = -r_prim,  Lam ds + S dlam = -rc,
    // which after eliminating ds and dlam reduces to
    //   (H + A' D A) dx = -r_dual + A' (rc ./ s - d .* r_prim).
    const auto solve_direction = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx,
                                     Eigen::VectorXd& ds, Eigen::VectorXd& dlam) {
      const Eigen::VectorXd rhs =
          -r_dual + p.constraints.transpose() * (rc.cwiseQuotient(s) - d.cwiseProduct(r_prim));
      dx = llt.solve(rhs);
      ds = -r_prim - p.constraints * dx;
      dlam = -(rc + lam.cwiseProduct(ds)).cwiseQuotient(s);
    };

    // Affine (predictor) direction.
    Eigen::VectorXd rc_aff = s.cwiseProduct(lam);
    Eigen::VectorXd dx, ds, dlam;
    solve_direction(rc_aff, dx, ds, dlam);

    const double alpha_aff =
        std::min(max_step(s, ds, 1.0), max_step(lam, dlam, 1.0));
    const double mu_aff = (s + alpha_aff * ds).dot(lam + alpha_aff * dlam) / static_cast<double>(m);
    const double sigma = std::pow(std::clamp(mu_aff / std::max(mu, 1e-300), 0.0, 1.0), 3);

    // Corrector with centering.
    const Eigen::VectorXd rc =
        rc_aff + ds.cwiseProduct(dlam) - Eigen::VectorXd::Constant(m, sigma * mu);
    solve_direction(rc, dx, ds, dlam);

    const double tau = 0.995;
    const double alpha = std::min({1.0, max_step(s, ds, tau), max_step(lam, dlam, tau)});
    x += alpha * dx;
    s += alpha * ds;
    lam += alpha * dlam;
  }

  res.x = x;
  res.multipliers = lam;
  res.slacks = s;
  res.status = QpStatus::MaxIterations;
  return res;
}

}  // namespace ccpdi
