#include "ccpdi/sim/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ccpdi::sim {

MpcWeights ExperimentOptions::default_weights() {
  MpcWeights w;
  w.q_position = {1e-5, 1e-5, 2e3};
  w.q_velocity = {1e3, 1e3, 1e2};
  w.q_euler = {1e2, 4e2, 1e2};
  w.q_angular_velocity = {1e1, 1e1, 1e1};
  w.r_force = {1e-8, 1e-8, 1e-8};
  return w;
}

ExperimentOptions ExperimentOptions::from_config(const Config& cfg) {
  ExperimentOptions o;
  o.compliant_spine = cfg.get_string("experiment.spine", "rigid") == "compliant";
  o.ccpdi_enabled = cfg.get_bool("mpc.ccpdi", true);
  o.duration = cfg.get_double("experiment.duration", o.duration);
  o.seed = static_cast<uint64_t>(cfg.get_double("experiment.seed", 0.0));
  o.mpc_horizon = cfg.get_int("mpc.horizon", o.mpc_horizon);
  o.mpc_dt = cfg.get_double("mpc.dt", o.mpc_dt);
  o.mpc_mu = cfg.get_double("mpc.mu", o.mpc_mu);
  o.mpc_f_max = cfg.get_double("mpc.f_max", o.mpc_f_max);

  const MpcWeights defaults = default_weights();
  o.weights.q_position = cfg.get_vec3("mpc.q_position", defaults.q_position);
  o.weights.q_velocity = cfg.get_vec3("mpc.q_velocity", defaults.q_velocity);
  o.weights.q_euler = cfg.get_vec3("mpc.q_euler", defaults.q_euler);
  o.weights.q_angular_velocity =
      cfg.get_vec3("mpc.q_angular_velocity", defaults.q_angular_velocity);
  o.weights.r_force = cfg.get_vec3("mpc.r_force", defaults.r_force);

  o.gait = GaitSchedule::trot(cfg.get_double("gait.period", 0.3));
  o.gait.duty = cfg.get_double("gait.duty", 0.5);
  o.gait.period_initial = cfg.get_double("gait.period_initial", -1.0);
  o.gait.ramp_time = cfg.get_double("gait.ramp_time", 0.0);
  o.stand_time = cfg.get_double("gait.stand_time", o.stand_time);

  o.swing.kp = cfg.get_double("swing.kp", o.swing.kp);
  o.swing.kd = cfg.get_double("swing.kd", o.swing.kd);
  o.swing.apex_height = cfg.get_double("swing.apex_height", o.swing.apex_height);
  o.swing.raibert_gain = cfg.get_double("swing.raibert_gain", o.swing.raibert_gain);
  o.swing.centroid_shift_gain =
      cfg.get_double("swing.centroid_shift_gain", o.swing.centroid_shift_gain);
  o.swing.joint_damping = cfg.get_double("swing.joint_damping", o.swing.joint_damping);
  o.swing.torque_limit = cfg.get_double("swing.torque_limit", o.swing.torque_limit);
  return o;
}

namespace {

bool weights_unset(const MpcWeights& w) {
  return w.q_position.isZero() && w.q_velocity.isZero() && w.q_euler.isZero() &&
         w.q_angular_velocity.isZero() && w.r_force.isZero();
}

// Failure criterion: centroid below half the nominal height, or pitch past
// one radian.
bool row_fall_check(double height, double nominal, double pitch) {
  return height < 0.5 * nominal || std::abs(pitch) > 1.0;
}

}  // namespace

RunLog run_experiment(const RobotDescription& desc, const ExperimentOptions& opts) {
  QuadrupedModel model = build_sim_model(desc, opts.compliant_spine);
  Simulator simulator(model, desc);
  GaitSchedule gait = opts.gait;
  gait.start_time = opts.stand_time;
  DeformableTree tree = build_control_tree(desc);
  LegController legs(desc, opts.swing);

  const MpcWeights weights = weights_unset(opts.weights)
                                 ? ExperimentOptions::default_weights()
                                 : opts.weights;
  const double total_mass = desc.total_mass();
  const double g = -desc.gravity_z;
  const double f_max =
      opts.mpc_f_max > 0.0 ? opts.mpc_f_max : 3.0 * 4.0 * total_mass * g / kNumLegs;

  SimState state = simulator.initial_state();

  // Seeded initial attitude perturbation so distinct seeds explore distinct
  // transients while a fixed seed reproduces byte-identical logs.
  {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> tilt(-1e-3, 1e-3);
    const double roll = tilt(rng), pitch = tilt(rng);
    state.engine.base_pose.rotation = from_euler_zyx({roll, pitch, 0.0});
  }

  RunLog log;
  log.dt_mpc = opts.mpc_dt;
  log.horizon = opts.mpc_horizon;
  log.duration = opts.duration;
  log.spine_rest_in_bounds = desc.rest_length_in_bounds();

  // Nominal centroid height of the starting pose is the tracking reference.
  log.nominal_height = model.engine.com_world(state.engine).z();
  const Vec3 com0 = model.engine.com_world(state.engine);

  const int steps_per_tick = std::max(1, static_cast<int>(std::round(opts.mpc_dt / simulator.dt())));
  const long total_steps = static_cast<long>(std::llround(opts.duration / simulator.dt()));

  std::array<LegCommand, kNumLegs> commands{};
  const Vec3 v_cmd = Vec3::Zero();  // trot stepping in place
  Vec3 com_vel_est = Vec3::Zero();
  Vec3 com_pos_est = com0;

  for (long step = 0; step <= total_steps; ++step) {
    const double t = state.time;

    if (step % steps_per_tick == 0) {
      // --- control tick: schedule, MPC, logging ---
      update_control_tree(tree, model, state.engine);
      const CcpdiSchedule schedule = compute_ccpdi(tree, opts.mpc_dt, opts.mpc_horizon);

      const Mat3 r_wb = state.engine.base_pose.rotation;
      CentroidalState cs;
      cs.euler_zyx = euler_zyx(r_wb);
      cs.position = state.engine.base_pose.translation + r_wb * schedule.centroid[0];
      cs.angular_velocity = r_wb * schedule.center_twist.head<3>();
      cs.linear_velocity = r_wb * schedule.center_twist.tail<3>();
      cs.gravity_z = desc.gravity_z;
      com_vel_est = cs.linear_velocity;
      com_pos_est = cs.position;

      const Kinematics kin = model.engine.forward_kinematics(state.engine);

      MpcProblem problem;
      problem.horizon = opts.mpc_horizon;
      problem.dt = opts.mpc_dt;
      problem.mass = schedule.total_mass;
      problem.friction = opts.mpc_mu;
      problem.f_max = f_max;
      problem.state = cs;
      problem.weights = weights;
      problem.inertia = inject_ccpdi(schedule, cs.euler_zyx.z(), opts.ccpdi_enabled,
                                     opts.mpc_horizon);

      problem.plan.num_feet = kNumLegs;
      problem.plan.horizon = opts.mpc_horizon;
      problem.plan.contact = gait.contact_table(t, opts.mpc_dt, opts.mpc_horizon);
      problem.plan.foothold.resize(static_cast<size_t>(opts.mpc_horizon) * kNumLegs);
      for (int leg = 0; leg < kNumLegs; ++leg) {
        // Stance feet hold their current position; legs in swing land on the
        // controller's own foothold target.
        Vec3 foot = model.engine.point_position(kin, model.shank_body[leg], model.foot_local);
        if (!gait.in_stance(leg, t)) {
          bool clamped = false;
          foot = legs.foothold_target(model, kin, leg, gait, t, cs.position,
                                      cs.linear_velocity, v_cmd, clamped);
        }
        foot.z() = 0.0;
        // World-frame centroid prediction: internal deformation does not move
        // the composite centroid, so a constant-velocity extrapolation is the
        // right model for both schedule modes; the deformation enters the
        // controller through the inertia schedule alone.
        for (int k = 0; k < opts.mpc_horizon; ++k) {
          const Vec3 centroid_k = cs.position + cs.linear_velocity * (k * opts.mpc_dt);
          problem.plan.foothold[k * kNumLegs + leg] = foot - centroid_k;
        }
      }

      problem.reference.assign(opts.mpc_horizon, Eigen::Matrix<double, kNumStates, 1>::Zero());
      for (auto& ref : problem.reference) {
        ref.segment<3>(3) = Vec3(com0.x(), com0.y(), log.nominal_height);
        ref[12] = desc.gravity_z;
      }

      const MpcSolution sol = solve_grf_qp(problem);
      if (std::getenv("CCPDI_DEBUG_MPC") && log.rows.empty()) {
        std::fprintf(stderr,
                     "[dbg] mass=%.3f fmax=%.1f cs.p=(%.4f %.4f %.4f) cs.v=(%.3f %.3f %.3f) "
                     "ref_z=%.4f iters=%d status=%d\n",
                     problem.mass, problem.f_max, cs.position.x(), cs.position.y(),
                     cs.position.z(), cs.linear_velocity.x(), cs.linear_velocity.y(),
                     cs.linear_velocity.z(), problem.reference[0][5], sol.iterations,
                     static_cast<int>(sol.status));
        std::fprintf(stderr, "[dbg] r00=(%.3f %.3f %.3f) contact0=%d%d%d%d Iyy=%.4f\n",
                     problem.plan.r(0, 0).x(), problem.plan.r(0, 0).y(),
                     problem.plan.r(0, 0).z(), problem.plan.in_contact(0, 0),
                     problem.plan.in_contact(0, 1), problem.plan.in_contact(0, 2),
                     problem.plan.in_contact(0, 3), problem.inertia[0](1, 1));
        std::ostringstream dbg;
        dbg << "[dbg] q=" << problem.weights.state_diag().transpose()
            << " r=" << problem.weights.r_force.transpose() << "\n[dbg] contact table: ";
        for (int k = 0; k < problem.horizon; ++k) {
          for (int i = 0; i < 4; ++i) dbg << (problem.plan.in_contact(k, i) ? 1 : 0);
          dbg << ' ';
        }
        dbg << "\n[dbg] ref0=" << problem.reference[0].transpose() << "\n";
        std::fputs(dbg.str().c_str(), stderr);
      }

      for (int leg = 0; leg < kNumLegs; ++leg) {
        commands[leg].stance = problem.plan.in_contact(0, leg);
        commands[leg].grf = sol.first_step[leg];
      }

      LogRow row;
      row.time = t;
      row.height = cs.position.z();
      row.roll = cs.euler_zyx.x();
      row.pitch = cs.euler_zyx.y();
      row.yaw = cs.euler_zyx.z();
      row.com = cs.position;
      row.com_velocity = cs.linear_velocity;
      row.spine_length = model.compliant ? model.spine_length(state.engine) : desc.spine_nominal;
      row.spine_rate = model.spine_rate(state.engine);
      row.root_iyy.resize(opts.mpc_horizon);
      for (int k = 0; k < opts.mpc_horizon; ++k) {
        const int src = opts.ccpdi_enabled ? k : 0;
        row.root_iyy[k] = schedule.root_inertia[src](1, 1);
      }
      row.inertia_diag_k0 = problem.inertia[0].diagonal();
      row.qp_iterations = sol.iterations;
      for (int leg = 0; leg < kNumLegs; ++leg) {
        row.contact[leg] = commands[leg].stance ? 1 : 0;
        row.planned_force[leg] = commands[leg].grf;
      }
      log.rows.push_back(std::move(row));

      log.max_abs_pitch = std::max(log.max_abs_pitch, std::abs(cs.euler_zyx.y()));
      log.max_abs_roll = std::max(log.max_abs_roll, std::abs(cs.euler_zyx.x()));

      // Fall detection on the logged quantities.
      if (row_fall_check(cs.position.z(), log.nominal_height, cs.euler_zyx.y())) {
        log.status = "failed";
        log.fall_time = t;
        break;
      }
    }

    if (step == total_steps) break;

    const Kinematics kin = model.engine.forward_kinematics(state.engine);
    const Eigen::VectorXd tau = legs.compute(model, state.engine, kin, gait, t, commands,
                                             com_pos_est, com_vel_est, v_cmd);
    state = simulator.step(state, tau);

    if (state.diverged) {
      log.status = "diverged";
      log.fall_time = state.time;
      break;
    }
  }

  log.reach_clamped = legs.reach_clamped();
  return log;
}

std::vector<double> prediction_error_metric(const RunLog& log) {
  std::vector<double> eps;
  const int n = static_cast<int>(log.rows.size());
  const int np = log.horizon;
  for (int i = 0; i + np - 1 < n; ++i) {
    double worst = 0.0;
    for (int k = 1; k < np; ++k) {
      const double actual = log.rows[i + k].root_iyy[0];
      if (!(std::abs(actual) > 0.0)) continue;  // yy inertia is strictly positive by construction
      worst = std::max(worst, std::abs((log.rows[i].root_iyy[k] - actual) / actual));
    }
    eps.push_back(worst);
  }
  return eps;
}

RunMetrics compute_metrics(const RunLog& log, double window_end) {
  RunMetrics m;
  double h2 = 0, r2 = 0, p2 = 0, y2 = 0;
  int n = 0;
  std::array<double, kNumLegs> norm_sum{};
  std::array<int, kNumLegs> norm_count{};
  for (const auto& row : log.rows) {
    if (window_end >= 0.0 && row.time >= window_end) break;
    h2 += (row.height - log.nominal_height) * (row.height - log.nominal_height);
    r2 += row.roll * row.roll;
    p2 += row.pitch * row.pitch;
    y2 += row.yaw * row.yaw;
    ++n;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      if (row.contact[leg]) {
        norm_sum[leg] += row.planned_force[leg].norm();
        ++norm_count[leg];
      }
    }
  }
  if (n > 0) {
    m.height_rmse = std::sqrt(h2 / n);
    m.tracking_rmse_roll = std::sqrt(r2 / n);
    m.tracking_rmse_pitch = std::sqrt(p2 / n);
    m.tracking_rmse_yaw = std::sqrt(y2 / n);
  }
  double all = 0.0;
  int legs_with_data = 0;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    m.mean_grf_norm[leg] = norm_count[leg] > 0 ? norm_sum[leg] / norm_count[leg] : 0.0;
    if (norm_count[leg] > 0) {
      all += m.mean_grf_norm[leg];
      ++legs_with_data;
    }
  }
  if (legs_with_data > 0) {
    all /= legs_with_data;
    for (int leg = 0; leg < kNumLegs; ++leg)
      if (norm_count[leg] > 0)
        m.grf_spread = std::max(m.grf_spread, std::abs(m.mean_grf_norm[leg] - all));
  }

  const auto eps = prediction_error_metric(log);
  int used = 0;
  for (size_t i = 0; i < eps.size(); ++i) {
    const double t = log.rows[i].time;
    if (window_end >= 0.0 && t >= window_end) break;
    m.eps_yy_mean += eps[i];
    m.eps_yy_max = std::max(m.eps_yy_max, eps[i]);
    ++used;
  }
  if (used > 0) m.eps_yy_mean /= used;
  return m;
}

namespace {

void print_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace

void write_run_csvs(const RunLog& log, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::string states = "# ccpdi-states-v1\n";
  states +=
      "time,height,roll,pitch,yaw,com_x,com_y,com_vx,com_vy,com_vz,spine_length,spine_rate\n";
  for (const auto& r : log.rows) {
    const double cols[] = {r.time,           r.height,          r.roll,
                           r.pitch,          r.yaw,             r.com.x(),
                           r.com.y(),        r.com_velocity.x(), r.com_velocity.y(),
                           r.com_velocity.z(), r.spine_length,  r.spine_rate};
    for (size_t c = 0; c < std::size(cols); ++c) {
      if (c) states += ',';
      print_double(states, cols[c]);
    }
    states += '\n';
  }
  write_file(dir + "/states.csv", states);

  std::string grf = "# ccpdi-grf-v1\ntime";
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const std::string l = std::to_string(leg);
    grf += ",leg" + l + "_contact,leg" + l + "_fx,leg" + l + "_fy,leg" + l + "_fz";
  }
  grf += '\n';
  for (const auto& r : log.rows) {
    print_double(grf, r.time);
    for (int leg = 0; leg < kNumLegs; ++leg) {
      grf += ',';
      grf += std::to_string(r.contact[leg]);
      for (int c = 0; c < 3; ++c) {
        grf += ',';
        print_double(grf, r.planned_force[leg][c]);
      }
    }
    grf += '\n';
  }
  write_file(dir + "/grf.csv", grf);

  std::string inertia = "# ccpdi-inertia-v1\ntime";
  for (int k = 0; k < log.horizon; ++k) inertia += ",root_iyy_k" + std::to_string(k);
  inertia += ",ihat_xx,ihat_yy,ihat_zz\n";
  for (const auto& r : log.rows) {
    print_double(inertia, r.time);
    for (int k = 0; k < log.horizon; ++k) {
      inertia += ',';
      print_double(inertia, r.root_iyy[k]);
    }
    for (int c = 0; c < 3; ++c) {
      inertia += ',';
      print_double(inertia, r.inertia_diag_k0[c]);
    }
    inertia += '\n';
  }
  write_file(dir + "/inertia.csv", inertia);
}

void write_summary(const RunLog& log, const RunMetrics& metrics, const Config& resolved,
                   const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json j;
  j["schema"] = "ccpdi-summary-v1";
  j["status"] = log.status;
  j["fall_time"] = log.fall_time;
  j["duration"] = log.duration;
  j["nominal_height"] = log.nominal_height;
  j["mpc_dt"] = log.dt_mpc;
  j["horizon"] = log.horizon;
  j["max_abs_pitch"] = log.max_abs_pitch;
  j["max_abs_roll"] = log.max_abs_roll;
  j["reach_clamped"] = log.reach_clamped;
  j["spine_rest_in_bounds"] = log.spine_rest_in_bounds;
  j["metrics"] = {{"height_rmse", metrics.height_rmse},
                  {"tracking_rmse_roll", metrics.tracking_rmse_roll},
                  {"tracking_rmse_pitch", metrics.tracking_rmse_pitch},
                  {"tracking_rmse_yaw", metrics.tracking_rmse_yaw},
                  {"eps_yy_mean", metrics.eps_yy_mean},
                  {"eps_yy_max", metrics.eps_yy_max},
                  {"grf_spread", metrics.grf_spread},
                  {"mean_grf_norm", metrics.mean_grf_norm}};
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(resolved.hash()));
  j["config_hash"] = hash;
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : resolved.entries()) cfg[k] = v;
  j["config"] = cfg;
  write_file(dir + "/summary.json", j.dump(2) + "\n");
}

RunLog read_run_csvs(const std::string& dir) {
  const auto read_table = [](const std::string& path, std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing log file: " + path);
    std::string line;
    std::getline(in, line);  // schema comment
    if (line.rfind("# ccpdi-", 0) != 0) throw std::runtime_error("bad schema line in " + path);
    std::getline(in, line);
    header.clear();
    std::stringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, ',')) header.push_back(tok);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<double> row;
      std::stringstream ls(line);
      while (std::getline(ls, tok, ',')) row.push_back(std::stod(tok));
      if (row.size() != header.size()) throw std::runtime_error("ragged row in " + path);
      rows.push_back(std::move(row));
    }
    return rows;
  };

  std::vector<std::string> sh, gh, ih;
  const auto srows = read_table(dir + "/states.csv", sh);
  const auto grows = read_table(dir + "/grf.csv", gh);
  const auto irows = read_table(dir + "/inertia.csv", ih);
  if (srows.size() != grows.size() || srows.size() != irows.size())
    throw std::runtime_error("log files disagree on row count in " + dir);

  RunLog log;
  log.horizon = 0;
  for (const auto& h : ih)
    if (h.rfind("root_iyy_k", 0) == 0) ++log.horizon;

  std::ifstream sj(dir + "/summary.json");
  if (sj) {
    nlohmann::json j;
    sj >> j;
    log.status = j.value("status", "stable");
    log.fall_time = j.value("fall_time", -1.0);
    log.duration = j.value("duration", 0.0);
    log.nominal_height = j.value("nominal_height", 0.0);
    log.dt_mpc = j.value("mpc_dt", 0.0);
    log.max_abs_pitch = j.value("max_abs_pitch", 0.0);
    log.max_abs_roll = j.value("max_abs_roll", 0.0);
  }

  for (size_t i = 0; i < srows.size(); ++i) {
    LogRow r;
    const auto& s = srows[i];
    r.time = s[0];
    r.height = s[1];
    r.roll = s[2];
    r.pitch = s[3];
    r.yaw = s[4];
    r.com = {s[5], s[6], s[1]};
    r.com_velocity = {s[7], s[8], s[9]};
    r.spine_length = s[10];
    r.spine_rate = s[11];
    const auto& g = grows[i];
    for (int leg = 0; leg < kNumLegs; ++leg) {
      r.contact[leg] = static_cast<int>(g[1 + leg * 4]);
      r.planned_force[leg] = {g[2 + leg * 4], g[3 + leg * 4], g[4 + leg * 4]};
    }
    const auto& q = irows[i];
    r.root_iyy.assign(q.begin() + 1, q.begin() + 1 + log.horizon);
    r.inertia_diag_k0 = {q[1 + log.horizon], q[2 + log.horizon], q[3 + log.horizon]};
    log.rows.push_back(std::move(r));
  }
  return log;
}

}  // namespace ccpdi::sim
