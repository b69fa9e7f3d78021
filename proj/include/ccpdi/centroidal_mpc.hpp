#pragma once

#include <vector>

#include "ccpdi/multibody_tree.hpp"
#include "ccpdi/qp.hpp"

// Convex ground-reaction-force MPC on the simplified centroidal dynamics.
// State (13): [euler_zyx(3), position(3), angular velocity(3), linear
// velocity(3), g_z], all world frame; the gravity component rides along as a
// constant state so the dynamics stay linear. Controls are the stacked foot
// forces. The rotational inertia used in the torque rows can vary per
// prediction step, which is where the composite inertia schedule plugs in.

namespace ccpdi {

inline constexpr int kNumStates = 13;

struct CentroidalState {
  Vec3 euler_zyx = Vec3::Zero();  // [roll, pitch, yaw]
  Vec3 position = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
  Vec3 linear_velocity = Vec3::Zero();
  double gravity_z = -9.81;

  Eigen::Matrix<double, kNumStates, 1> vector() const;
  /// True when the small roll/pitch linearization still applies.
  bool small_angle_valid() const;
};

/// Contact flags and centroid-to-foothold vectors over the horizon.
struct FootholdPlan {
  int num_feet = 0;
  int horizon = 0;
  std::vector<uint8_t> contact;   // [k * num_feet + i]
  std::vector<Vec3> foothold;     // world frame, same indexing

  bool in_contact(int k, int i) const { return contact[k * num_feet + i] != 0; }
  const Vec3& r(int k, int i) const { return foothold[k * num_feet + i]; }
  int stance_count() const;
};

struct MpcWeights {
  Vec3 q_position = Vec3::Zero();
  Vec3 q_velocity = Vec3::Zero();
  Vec3 q_euler = Vec3::Zero();
  Vec3 q_angular_velocity = Vec3::Zero();
  Vec3 r_force = Vec3::Zero();

  /// Diagonal of the state cost in state order (gravity entry is zero).
  Eigen::Matrix<double, kNumStates, 1> state_diag() const;
};

struct MpcProblem {
  int horizon = 0;
  double dt = 0.0;
  double mass = 0.0;
  double friction = 0.6;
  double f_max = 0.0;
  CentroidalState state;
  FootholdPlan plan;
  std::vector<Mat3> inertia;  // one world-frame rotational inertia per step
  MpcWeights weights;
  /// Reference states, one per step (x_1 .. x_N).
  std::vector<Eigen::Matrix<double, kNumStates, 1>> reference;

  void check() const;  // throws std::invalid_argument
};

struct MpcSolution {
  /// Force plan, 3*num_feet x horizon; swing entries are exactly zero.
  Eigen::MatrixXd forces;
  /// First-step stance forces per foot, for execution.
  std::vector<Vec3> first_step;
  /// Predicted states x_1..x_N under the returned forces.
  Eigen::MatrixXd rollout;
  QpStatus status = QpStatus::Solved;
  int iterations = 0;
  double dual_residual = 0.0;
  double primal_residual = 0.0;
  double complementarity = 0.0;
  /// Condensed QP data retained for diagnostics (kkt_check).
  QpProblem qp;
  Eigen::VectorXd qp_solution;
  Eigen::VectorXd qp_multipliers;
};

struct ContinuousDynamics {
  Eigen::Matrix<double, kNumStates, kNumStates> a;
  Eigen::MatrixXd b;  // kNumStates x 3*num_feet
};

/// Continuous-time centroidal dynamics for one prediction step: yaw-rotated
/// Euler-rate map, velocity integrator, gravity channel, and per-foot torque
/// (I^{-1} S(r)) and force (1/m) rows. Gyroscopic w x Iw is dropped with the
/// small roll/pitch assumption. Throws on singular inertia.
ContinuousDynamics build_continuous_dynamics(const CentroidalState& s,
                                             const std::vector<Vec3>& footholds,
                                             const Mat3& inertia, double mass);

/// Per-step world-frame rotational inertias from the composite schedule:
/// the center-frame rotational block conjugated by the yaw rotation. When
/// disabled the step-0 tensor is reused across the whole horizon.
std::vector<Mat3> inject_ccpdi(const CcpdiSchedule& schedule, double yaw, bool enabled,
                               int horizon);

struct DiscreteDynamics {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
};

/// Exact zero-order hold: matrix exponential of the stacked [[A, B], [0, 0]]
/// system scaled by dt.
DiscreteDynamics discretize(const Eigen::Ref<const Eigen::MatrixXd>& a_c,
                            const Eigen::Ref<const Eigen::MatrixXd>& b_c, double dt);

/// Condensed (state-eliminated) dense QP over the stance forces with friction
/// pyramid constraints; swing-foot forces are eliminated, not constrained, so
/// they come back exactly zero.
MpcSolution solve_grf_qp(const MpcProblem& problem, const QpSettings& settings = {});

struct KktReport {
  double stationarity = 0.0;
  double primal_feasibility = 0.0;
  double complementarity = 0.0;
  double max_violation() const;
};

/// Recomputes KKT residuals of the condensed QP from first principles.
KktReport kkt_check(const MpcProblem& problem, const MpcSolution& solution);

}  // namespace ccpdi
