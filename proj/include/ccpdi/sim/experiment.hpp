#pragma once

#include <optional>
#include <string>

#include "ccpdi/centroidal_mpc.hpp"
#include "ccpdi/sim/gait.hpp"
#include "ccpdi/sim/leg_control.hpp"
#include "ccpdi/sim/simulation.hpp"

// Closed-loop experiment: ground-truth state -> inertia prediction schedule ->
// force MPC -> joint torques -> simulation step, logged at the control rate.

namespace ccpdi::sim {

struct ExperimentOptions {
  bool compliant_spine = false;
  bool ccpdi_enabled = true;
  double duration = 20.0;
  uint64_t seed = 0;
  int mpc_horizon = 10;
  double mpc_dt = 0.03;
  double mpc_mu = 0.6;
  double mpc_f_max = -1.0;  // negative: 3 * 4 m g / N_f
  MpcWeights weights;       // zeros select the built-in defaults
  GaitSchedule gait = GaitSchedule::trot(0.3);
  /// Initial all-stance settling interval before the trot clock starts.
  double stand_time = 0.5;
  SwingParams swing;

  static MpcWeights default_weights();
  static ExperimentOptions from_config(const Config& cfg);
};

/// One row per MPC tick.
struct LogRow {
  double time = 0.0;
  double height = 0.0;  // composite centroid height
  double roll = 0.0, pitch = 0.0, yaw = 0.0;
  Vec3 com = Vec3::Zero();
  Vec3 com_velocity = Vec3::Zero();
  double spine_length = 0.0, spine_rate = 0.0;
  std::array<int, kNumLegs> contact{};
  std::array<Vec3, kNumLegs> planned_force{};
  /// Root-frame composite yy inertia as used by the controller, per step
  /// (k = 0 is always the true instantaneous value).
  std::vector<double> root_iyy;
  Vec3 inertia_diag_k0 = Vec3::Zero();  // world-frame rotational inertia fed to the MPC
  int qp_iterations = 0;
};

struct RunLog {
  std::string status = "stable";  // stable | failed | diverged
  double fall_time = -1.0;
  double duration = 0.0;
  double nominal_height = 0.0;
  double dt_mpc = 0.0;
  int horizon = 0;
  double max_abs_pitch = 0.0;
  double max_abs_roll = 0.0;
  bool reach_clamped = false;
  bool spine_rest_in_bounds = true;
  std::vector<LogRow> rows;
};

RunLog run_experiment(const RobotDescription& desc, const ExperimentOptions& opts);

/// Worst-case relative prediction error of the composite yy inertia per tick:
/// the step-k prediction made at tick i against the instantaneous value at
/// tick i + k, maximized over k. Rows without a full future window get no
/// entry.
std::vector<double> prediction_error_metric(const RunLog& log);

struct RunMetrics {
  double height_rmse = 0.0;
  double tracking_rmse_roll = 0.0;
  double tracking_rmse_pitch = 0.0;
  double tracking_rmse_yaw = 0.0;
  double eps_yy_mean = 0.0;
  double eps_yy_max = 0.0;
  std::array<double, kNumLegs> mean_grf_norm{};
  double grf_spread = 0.0;  // max deviation of per-leg means from the all-leg mean
};

/// Aggregates over rows with time < window_end (negative: whole log).
RunMetrics compute_metrics(const RunLog& log, double window_end = -1.0);

void write_run_csvs(const RunLog& log, const std::string& dir);
void write_summary(const RunLog& log, const RunMetrics& metrics, const Config& resolved,
                   const std::string& dir);

/// Reads back the CSVs written by write_run_csvs (for the report command).
RunLog read_run_csvs(const std::string& dir);

}  // namespace ccpdi::sim
