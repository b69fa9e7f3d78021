#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ccpdi/sim/experiment.hpp"

namespace py = pybind11;
using namespace ccpdi;

namespace {

DeformableBody make_body(const std::vector<SubBodyParams>& params,
                         const std::vector<SubBodyState>& states) {
  DeformableBody b;
  b.params = params;
  b.states = states;
  b.validate();
  return b;
}

py::dict schedule_to_dict(const CcpdiSchedule& s) {
  py::dict d;
  py::list root, center, centroid;
  for (int k = 0; k < s.horizon; ++k) {
    root.append(Mat6(s.root_inertia[k]));
    center.append(Mat6(s.center_inertia[k]));
    centroid.append(Vec3(s.centroid[k]));
  }
  d["root_inertia"] = root;
  d["center_inertia"] = center;
  d["centroid"] = centroid;
  d["center_twist"] = Vec6(s.center_twist);
  d["total_mass"] = s.total_mass;
  d["dt"] = s.dt;
  return d;
}

py::dict run_experiment_py(const std::string& robot_config, py::kwargs kwargs) {
  Config cfg = Config::parse_file(robot_config);
  for (auto item : kwargs) {
    const std::string key = py::str(item.first);
    // python identifiers use '_' where the config uses '.', first '_' splits
    const auto dot = key.find('_');
    const std::string cfg_key =
        dot == std::string::npos ? key : key.substr(0, dot) + "." + key.substr(dot + 1);
    cfg.set(cfg_key, py::str(item.second));
  }
  const sim::RobotDescription desc = sim::RobotDescription::from_config(cfg);
  const sim::ExperimentOptions opts = sim::ExperimentOptions::from_config(cfg);
  const sim::RunLog log = sim::run_experiment(desc, opts);
  const sim::RunMetrics metrics = sim::compute_metrics(log);

  py::dict out;
  out["status"] = log.status;
  out["fall_time"] = log.fall_time;
  out["nominal_height"] = log.nominal_height;
  out["max_abs_pitch"] = log.max_abs_pitch;
  out["max_abs_roll"] = log.max_abs_roll;
  out["height_rmse"] = metrics.height_rmse;
  out["eps_yy_mean"] = metrics.eps_yy_mean;
  out["eps_yy_max"] = metrics.eps_yy_max;
  out["grf_spread"] = metrics.grf_spread;
  out["ticks"] = log.rows.size();
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Deformable multibody inertia prediction and convex force MPC";

  // --- spatial algebra ---
  m.def("skew", &skew, py::arg("v"));
  m.def(
      "adjoint_of",
      [](const Mat3& r, const Vec3& p) { return Adjoint(adjoint_of(Transform{r, p})); },
      py::arg("rotation"), py::arg("translation"));
  m.def(
      "exp_se3",
      [](const Vec6& axis, double travel) {
        const Transform t = exp_se3(ScrewDecomposition{axis, travel});
        return py::make_tuple(Mat3(t.rotation), Vec3(t.translation));
      },
      py::arg("axis"), py::arg("travel"));
  m.def(
      "twist_to_screw",
      [](const Vec6& v, double dt) {
        const ScrewDecomposition s = twist_to_screw(v, dt);
        return py::make_tuple(Vec6(s.axis), s.travel);
      },
      py::arg("twist"), py::arg("dt"));

  // --- deformable body ---
  py::class_<SubBodyParams>(m, "SubBodyParams")
      .def(py::init([](double mass, const Vec3& com, const Mat3& rot_inertia) {
             return SubBodyParams{mass, com, rot_inertia};
           }),
           py::arg("mass"), py::arg("com"), py::arg("rot_inertia"))
      .def_readwrite("mass", &SubBodyParams::mass)
      .def_readwrite("com", &SubBodyParams::com)
      .def_readwrite("rot_inertia", &SubBodyParams::rot_inertia);

  py::class_<SubBodyState>(m, "SubBodyState")
      .def(py::init([](const Mat3& r, const Vec3& p, const Vec6& twist) {
             SubBodyState s;
             s.pose = Transform{r, p};
             s.twist = twist;
             return s;
           }),
           py::arg("rotation") = Mat3(Mat3::Identity()), py::arg("translation") = Vec3(Vec3::Zero()),
           py::arg("twist") = Vec6(Vec6::Zero()));

  py::class_<DeformableBody>(m, "DeformableBody")
      .def(py::init(&make_body), py::arg("params"), py::arg("states"));

  m.def("sub_body_inertia", &sub_body_inertia, py::arg("params"));
  m.def("instantaneous_body_inertia", &instantaneous_body_inertia, py::arg("body"));
  m.def(
      "compute_pdi",
      [](const DeformableBody& b, double dt, int horizon) {
        const PdiSchedule s = compute_pdi(b, dt, horizon);
        py::list inertias;
        for (const auto& i : s.inertia) inertias.append(Mat6(i));
        py::dict d;
        d["inertia"] = inertias;
        d["total_mass"] = s.total_mass;
        return d;
      },
      py::arg("body"), py::arg("dt"), py::arg("horizon"));

  // --- mpc building blocks ---
  m.def(
      "discretize",
      [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double dt) {
        const DiscreteDynamics d = discretize(a, b, dt);
        return py::make_tuple(Eigen::MatrixXd(d.a), d.b);
      },
      py::arg("a_c"), py::arg("b_c"), py::arg("dt"));
  m.def(
      "solve_qp",
      [](const Eigen::MatrixXd& h, const Eigen::VectorXd& g, const Eigen::MatrixXd& a,
         const Eigen::VectorXd& b) {
        const QpResult r = solve_qp(QpProblem{h, g, a, b});
        py::dict d;
        d["x"] = r.x;
        d["status"] = r.status == QpStatus::Solved ? "solved" : "max_iterations";
        d["iterations"] = r.iterations;
        return d;
      },
      py::arg("hessian"), py::arg("gradient"), py::arg("constraints"), py::arg("bounds"));

  // --- whole-robot pipeline ---
  m.def(
      "control_tree_schedule",
      [](const std::string& robot_config, bool compliant, double spine_length, double spine_rate,
         double dt, int horizon) {
        const Config cfg = Config::parse_file(robot_config);
        const sim::RobotDescription desc = sim::RobotDescription::from_config(cfg);
        const sim::QuadrupedModel model = sim::build_sim_model(desc, compliant);
        DeformableTree tree = sim::build_control_tree(desc);
        sim::EngineState s = sim::nominal_state(model, desc);
        if (compliant) {
          s.q[model.spine_dof] = spine_length;
          s.qd[model.spine_dof] = spine_rate;
        }
        sim::update_control_tree(tree, model, s);
        return schedule_to_dict(compute_ccpdi(tree, dt, horizon));
      },
      py::arg("robot_config"), py::arg("compliant") = true, py::arg("spine_length") = 0.18,
      py::arg("spine_rate") = 0.0, py::arg("dt") = 0.03, py::arg("horizon") = 10);

  m.def("run_experiment", &run_experiment_py, py::arg("robot_config"),
        "Closed-loop trot run; config keys may be overridden as keyword "
        "arguments (e.g. experiment_duration='5', mpc_ccpdi='false').");
}
