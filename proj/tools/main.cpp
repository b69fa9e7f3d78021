#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ccpdi/sim/experiment.hpp"

// Experiment front end. Exit codes: 0 success/stable, 1 configuration error,
// 2 the run ended in a fall.

namespace {

using namespace ccpdi;
using namespace ccpdi::sim;

struct RunFlags {
  std::string robot_file;
  std::string spine = "";        // rigid | compliant
  double ks = -1.0;
  double lrest = -1.0;
  std::string ccpdi = "";        // on | off
  double duration = -1.0;
  long seed = -1;
  std::string out_dir = "run";
};

std::string resolve_out_dir(const std::string& dir) {
  if (std::filesystem::path(dir).is_absolute()) return dir;
  if (const char* root = std::getenv("CCPDI_OUT_ROOT"))
    return (std::filesystem::path(root) / dir).string();
  return dir;
}

// Merges the robot/experiment file with command-line overrides into the
// resolved config that gets hashed into the summary.
Config resolve_config(const RunFlags& flags) {
  Config cfg = Config::parse_file(flags.robot_file);
  if (!flags.spine.empty()) cfg.set("experiment.spine", flags.spine);
  if (flags.ks > 0.0) cfg.set_double("spine.ks", flags.ks);
  if (flags.lrest > 0.0) cfg.set_double("spine.l_rest", flags.lrest);
  if (!flags.ccpdi.empty()) cfg.set("mpc.ccpdi", flags.ccpdi == "on" ? "true" : "false");
  if (flags.duration > 0.0) cfg.set_double("experiment.duration", flags.duration);
  if (flags.seed >= 0) cfg.set_double("experiment.seed", static_cast<double>(flags.seed));
  const std::string spine_mode = cfg.get_string("experiment.spine", "rigid");
  if (spine_mode != "rigid" && spine_mode != "compliant")
    throw std::runtime_error("config key 'experiment.spine' must be rigid or compliant");
  return cfg;
}

int do_single_run(const Config& cfg, const std::string& out_dir, bool quiet = false) {
  const RobotDescription desc = RobotDescription::from_config(cfg);
  const ExperimentOptions opts = ExperimentOptions::from_config(cfg);
  const RunLog log = run_experiment(desc, opts);
  const RunMetrics metrics = compute_metrics(log);
  write_run_csvs(log, out_dir);
  write_summary(log, metrics, cfg, out_dir);
  if (!quiet) {
    std::printf("status=%s", log.status.c_str());
    if (log.fall_time >= 0.0) std::printf(" fall_time=%.3f", log.fall_time);
    std::printf(" height_rmse=%.4f eps_yy_mean=%.3g out=%s\n", metrics.height_rmse,
                metrics.eps_yy_mean, out_dir.c_str());
  }
  return log.status == "stable" ? 0 : 2;
}

int cmd_run(const RunFlags& flags) {
  const Config cfg = resolve_config(flags);
  return do_single_run(cfg, resolve_out_dir(flags.out_dir));
}

int cmd_sweep(const RunFlags& flags, const std::vector<double>& ks_grid,
              const std::vector<double>& lrest_grid) {
  if (ks_grid.empty() || lrest_grid.empty())
    throw std::runtime_error("sweep requires non-empty --ks-grid and --lrest-grid");
  const std::string out_root = resolve_out_dir(flags.out_dir);
  std::filesystem::create_directories(out_root);

  std::string map = "# ccpdi-map-v1\nks,l_rest,status,fall_time,eps_yy_mean,grf_spread\n";
  for (double ks : ks_grid) {
    for (double lrest : lrest_grid) {
      RunFlags cell = flags;
      cell.spine = "compliant";
      cell.ks = ks;
      cell.lrest = lrest;
      const Config cfg = resolve_config(cell);
      char name[64];
      std::snprintf(name, sizeof(name), "cell_ks%.4g_lrest%.4g", ks, lrest);
      const std::string dir = out_root + "/" + name;

      std::string status = "error";
      double fall_time = -1.0, eps = 0.0, spread = 0.0;
      try {
        const RobotDescription desc = RobotDescription::from_config(cfg);
        const ExperimentOptions opts = ExperimentOptions::from_config(cfg);
        const RunLog log = run_experiment(desc, opts);
        const RunMetrics metrics = compute_metrics(log);
        write_run_csvs(log, dir);
        write_summary(log, metrics, cfg, dir);
        status = log.status;
        fall_time = log.fall_time;
        eps = metrics.eps_yy_mean;
        spread = metrics.grf_spread;
      } catch (const std::exception& e) {
        std::fprintf(stderr, "cell %s failed: %s\n", name, e.what());
      }
      char row[256];
      std::snprintf(row, sizeof(row), "%.17g,%.17g,%s,%.17g,%.17g,%.17g\n", ks, lrest,
                    status.c_str(), fall_time, eps, spread);
      map += row;
      std::printf("%-32s %s\n", name, status.c_str());
    }
  }
  std::ofstream out(out_root + "/map.csv", std::ios::binary);
  out << map;
  return 0;
}

int cmd_report(const std::string& run_dir) {
  const std::string dir = resolve_out_dir(run_dir);
  const RunLog log = read_run_csvs(dir);
  const double window = log.fall_time >= 0.0 ? log.fall_time : -1.0;
  const RunMetrics m = compute_metrics(log, window);
  const auto eps = prediction_error_metric(log);

  std::string report = "# ccpdi-report-v1\nmetric,value\n";
  const auto add = [&report](const std::string& k, double v) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s,%.17g\n", k.c_str(), v);
    report += buf;
  };
  add("eps_yy_mean", m.eps_yy_mean);
  add("eps_yy_max", m.eps_yy_max);
  add("height_rmse", m.height_rmse);
  add("tracking_rmse_roll", m.tracking_rmse_roll);
  add("tracking_rmse_pitch", m.tracking_rmse_pitch);
  add("tracking_rmse_yaw", m.tracking_rmse_yaw);
  for (int leg = 0; leg < kNumLegs; ++leg)
    add("mean_grf_norm_leg" + std::to_string(leg), m.mean_grf_norm[leg]);
  add("grf_spread", m.grf_spread);
  add("samples", static_cast<double>(log.rows.size()));
  add("eps_samples", static_cast<double>(eps.size()));

  std::ofstream out(dir + "/report.csv", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report.csv in " + dir);
  out << report;
  std::printf("eps_yy_mean=%.6g grf_spread=%.6g -> %s/report.csv\n", m.eps_yy_mean, m.grf_spread,
              dir.c_str());
  return 0;
}

int cmd_validate(const std::string& robot_file) {
  const Config cfg = Config::parse_file(robot_file);
  const RobotDescription desc = RobotDescription::from_config(cfg);
  std::printf("robot '%s': mass=%.3f kg, stand height=%.3f m\n", desc.name.c_str(),
              desc.total_mass(), desc.stand_height);
  if (!desc.rest_length_in_bounds())
    std::printf("note: spine rest length %.3f outside travel [%.3f, %.3f] "
                "(always-tensioned regime)\n",
                desc.spine_rest, desc.spine_min, desc.spine_max);
  // Exercise the builders so structural mistakes surface here, not mid-run.
  build_sim_model(desc, true);
  build_control_tree(desc).validate();
  std::printf("ok\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deformable-quadruped trot experiments"};
  app.require_subcommand(1);

  RunFlags flags;
  std::vector<double> ks_grid, lrest_grid;
  std::string report_dir, validate_file;

  auto* run = app.add_subcommand("run", "Run one closed-loop experiment");
  run->add_option("--robot", flags.robot_file, "robot/experiment config file")->required();
  run->add_option("--spine", flags.spine, "rigid | compliant");
  run->add_option("--ks", flags.ks, "spine stiffness override [N/m]");
  run->add_option("--lrest", flags.lrest, "spine rest length override [m]");
  run->add_option("--ccpdi", flags.ccpdi, "on | off");
  run->add_option("--duration", flags.duration, "run length [s]");
  run->add_option("--seed", flags.seed, "random seed");
  run->add_option("--out", flags.out_dir, "output directory");

  auto* sweep = app.add_subcommand("sweep", "Grid sweep over spine stiffness and rest length");
  sweep->add_option("--robot", flags.robot_file)->required();
  sweep->add_option("--ks-grid", ks_grid, "spine stiffness values")->expected(-1);
  sweep->add_option("--lrest-grid", lrest_grid, "rest length values")->expected(-1);
  sweep->add_option("--ccpdi", flags.ccpdi);
  sweep->add_option("--duration", flags.duration);
  sweep->add_option("--seed", flags.seed);
  sweep->add_option("--out", flags.out_dir);

  auto* report = app.add_subcommand("report", "Aggregate a finished run directory");
  report->add_option("dir", report_dir, "run directory")->required();

  auto* validate = app.add_subcommand("validate-robot", "Check a robot description file");
  validate->add_option("file", validate_file, "robot config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(flags);
    if (sweep->parsed()) return cmd_sweep(flags, ks_grid, lrest_grid);
    if (report->parsed()) return cmd_report(report_dir);
    if (validate->parsed()) return cmd_validate(validate_file);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
