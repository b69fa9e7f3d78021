#pragma once

#include <Eigen/Core>

// Dense convex QP solver:  min 1/2 x'Hx + g'x  s.t.  Ax <= b.
// Mehrotra-style primal-dual interior point with deterministic iteration
// order; sized for the condensed force-planning problems (a few hundred
// variables at most).

namespace ccpdi {

struct QpProblem {
  Eigen::MatrixXd hessian;      // symmetric positive definite
  Eigen::VectorXd gradient;
  Eigen::MatrixXd constraints;  // m x n, may have zero rows
  Eigen::VectorXd bounds;       // m
};

enum class QpStatus { Solved, MaxIterations };

struct QpResult {
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;  // one per inequality row
  Eigen::VectorXd slacks;
  QpStatus status = QpStatus::Solved;
  int iterations = 0;
  double dual_residual = 0.0;
  double primal_residual = 0.0;
  double complementarity = 0.0;
};

struct QpSettings {
  double residual_tolerance = 1e-8;
  double gap_tolerance = 1e-10;
  int max_iterations = 100;
};

QpResult solve_qp(const QpProblem& p, const QpSettings& settings = {});

}  // namespace ccpdi
