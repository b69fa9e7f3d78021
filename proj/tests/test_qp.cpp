#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "ccpdi/qp.hpp"
#include "oracles/oracles.hpp"

using namespace ccpdi;

namespace {

// Active-set enumeration oracle for small problems: try every subset of
// constraints as the active set, solve the equality-constrained system, and
// keep the feasible candidate with nonnegative multipliers.
Eigen::VectorXd brute_force_qp(const QpProblem& p) {
  const int n = static_cast<int>(p.hessian.rows());
  const int m = static_cast<int>(p.constraints.rows());
  REQUIRE(m <= 12);
  double best_cost = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> active;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) active.push_back(i);
    const int a = static_cast<int>(active.size());
    if (a > n) continue;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + a, n + a);
    kkt.topLeftCorner(n, n) = p.hessian;
    Eigen::VectorXd rhs(n + a);
    rhs.head(n) = -p.gradient;
    for (int i = 0; i < a; ++i) {
      kkt.block(n + i, 0, 1, n) = p.constraints.row(active[i]);
      kkt.block(0, n + i, n, 1) = p.constraints.row(active[i]).transpose();
      rhs[n + i] = p.bounds[active[i]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd x = sol.head(n);
    const Eigen::VectorXd lam = sol.tail(a);
    if (lam.size() > 0 && lam.minCoeff() < -1e-9) continue;
    if (m > 0 && ((p.constraints * x - p.bounds).maxCoeff() > 1e-9)) continue;
    const double cost = 0.5 * x.dot(p.hessian * x) + p.gradient.dot(x);
    if (cost < best_cost) {
      best_cost = cost;
      best = x;
    }
  }
  REQUIRE(best.size() == n);
  return best;
}

QpProblem random_qp(oracles::Rng& rng, int n, int m) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  QpProblem p;
  p.hessian = a.transpose() * a + 0.1 * Eigen::MatrixXd::Identity(n, n);
  p.gradient.resize(n);
  for (int i = 0; i < n; ++i) p.gradient[i] = g(rng);
  p.constraints.resize(m, n);
  p.bounds.resize(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) p.constraints(i, j) = g(rng);
    p.bounds[i] = std::abs(g(rng));  // x = 0 stays feasible
  }
  return p;
}

}  // namespace

TEST_CASE("unconstrained QP solves the normal equations") {
  QpProblem p;
  p.hessian = (Eigen::Matrix2d() << 2, 0, 0, 4).finished();
  p.gradient = Eigen::Vector2d(-2, -8);
  p.constraints.resize(0, 2);
  p.bounds.resize(0);
  const QpResult r = solve_qp(p);
  CHECK(r.status == QpStatus::Solved);
  CHECK((r.x - Eigen::Vector2d(1, 2)).norm() < 1e-10);
}

TEST_CASE("clipped projection hits the active bound") {
  // min 1/2 |x - (2, 1)|^2 with x0 <= 1: solution (1, 1), multiplier 1.
  QpProblem p;
  p.hessian = Eigen::Matrix2d::Identity();
  p.gradient = Eigen::Vector2d(-2, -1);
  p.constraints = (Eigen::MatrixXd(1, 2) << 1, 0).finished();
  p.bounds = Eigen::VectorXd::Constant(1, 1.0);
  const QpResult r = solve_qp(p);
  CHECK(r.status == QpStatus::Solved);
  CHECK((r.x - Eigen::Vector2d(1, 1)).norm() < 1e-7);
  CHECK(r.multipliers[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("random QPs match the active-set enumeration oracle") {
  oracles::Rng rng(61u);
  for (int trial = 0; trial < 40; ++trial) {
    const QpProblem p = random_qp(rng, 4, 8);
    const QpResult r = solve_qp(p);
    REQUIRE(r.status == QpStatus::Solved);
    const Eigen::VectorXd ref = brute_force_qp(p);
    CHECK((r.x - ref).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("KKT conditions hold at the reported solution") {
  oracles::Rng rng(62u);
  for (int trial = 0; trial < 25; ++trial) {
    const QpProblem p = random_qp(rng, 8, 16);
    const QpResult r = solve_qp(p);
    REQUIRE(r.status == QpStatus::Solved);
    const Eigen::VectorXd stat = p.hessian * r.x + p.gradient + p.constraints.transpose() * r.multipliers;
    CHECK(stat.cwiseAbs().maxCoeff() < 1e-6);
    CHECK((p.constraints * r.x - p.bounds).maxCoeff() < 1e-7);
    CHECK(r.multipliers.minCoeff() > -1e-10);
    const Eigen::VectorXd slack = p.bounds - p.constraints * r.x;
    CHECK(slack.cwiseProduct(r.multipliers).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("zero-variable and zero-constraint problems") {
  QpProblem p;
  p.hessian.resize(0, 0);
  p.gradient.resize(0);
  p.constraints.resize(3, 0);
  p.bounds = Eigen::VectorXd::Ones(3);
  const QpResult r = solve_qp(p);
  CHECK(r.status == QpStatus::Solved);
  CHECK(r.x.size() == 0);
}

TEST_CASE("dimension mismatches are rejected") {
  QpProblem p;
  p.hessian = Eigen::Matrix2d::Identity();
  p.gradient = Eigen::Vector3d::Zero();
  p.constraints.resize(0, 2);
  p.bounds.resize(0);
  CHECK_THROWS_AS(solve_qp(p), std::invalid_argument);
}
