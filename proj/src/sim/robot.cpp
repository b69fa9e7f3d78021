#include "ccpdi/sim/robot.hpp"

#include <cmath>
#include <stdexcept>

namespace ccpdi::sim {

namespace {

Mat3 rod_inertia_z(double mass, double length) {
  const double i = mass * length * length / 12.0;
  return Vec3(i, i, 1e-5 * mass).asDiagonal();
}

SpatialInertia link_inertia(double mass, const Vec3& com, const Mat3& rot) {
  SubBodyParams p;
  p.mass = mass;
  p.com = com;
  p.rot_inertia = rot;
  return sub_body_inertia(p);
}

}  // namespace

RobotDescription RobotDescription::from_config(const Config& cfg) {
  RobotDescription d;
  d.name = cfg.get_string("robot.name", d.name);

  d.front_mass = cfg.get_double("trunk.front_mass", d.front_mass);
  d.rear_mass = cfg.get_double("trunk.rear_mass", d.rear_mass);
  d.front_com = cfg.get_vec3("trunk.front_com", d.front_com);
  d.rear_com = cfg.get_vec3("trunk.rear_com", d.rear_com);
  d.front_inertia = cfg.get_vec3("trunk.front_inertia", {0.0125, 0.027, 0.0345}).asDiagonal();
  d.rear_inertia = cfg.get_vec3("trunk.rear_inertia", {0.0125, 0.027, 0.0345}).asDiagonal();

  d.spine_stiffness = cfg.get_double("spine.ks", d.spine_stiffness);
  d.spine_damping = cfg.get_double("spine.damping", d.spine_damping);
  d.spine_rest = cfg.get_double("spine.l_rest", d.spine_rest);
  d.spine_min = cfg.get_double("spine.l_min", d.spine_min);
  d.spine_max = cfg.get_double("spine.l_max", d.spine_max);
  d.spine_nominal = cfg.get_double("spine.l_nominal", d.spine_nominal);

  d.hip_y = cfg.get_double("legs.hip_y", d.hip_y);
  d.abd_offset = cfg.get_double("legs.abd_offset", d.abd_offset);
  d.thigh_length = cfg.get_double("legs.thigh_length", d.thigh_length);
  d.shank_length = cfg.get_double("legs.shank_length", d.shank_length);
  d.hip_mass = cfg.get_double("legs.hip_mass", d.hip_mass);
  d.thigh_mass = cfg.get_double("legs.thigh_mass", d.thigh_mass);
  d.shank_mass = cfg.get_double("legs.shank_mass", d.shank_mass);

  d.stand_height = cfg.get_double("stance.height", d.stand_height);

  d.contact_stiffness = cfg.get_double("contact.stiffness", d.contact_stiffness);
  d.contact_damping = cfg.get_double("contact.damping", d.contact_damping);
  d.contact_mu = cfg.get_double("contact.mu", d.contact_mu);
  d.contact_vreg = cfg.get_double("contact.v_reg", d.contact_vreg);
  d.gravity_z = cfg.get_double("sim.gravity_z", d.gravity_z);

  d.validate();
  return d;
}

double RobotDescription::effective_spine_damping() const {
  if (spine_damping >= 0.0) return spine_damping;
  const double reduced = front_mass * rear_mass / (front_mass + rear_mass);
  return 0.1 * 2.0 * std::sqrt(spine_stiffness * reduced);
}

double RobotDescription::total_mass() const {
  return front_mass + rear_mass + kNumLegs * (hip_mass + thigh_mass + shank_mass);
}

void RobotDescription::validate() const {
  if (front_mass <= 0 || rear_mass <= 0 || hip_mass <= 0 || thigh_mass <= 0 || shank_mass <= 0)
    throw std::runtime_error("robot: masses must be positive");
  if (spine_min >= spine_max) throw std::runtime_error("robot: spine.l_min must be < spine.l_max");
  if (spine_nominal < spine_min || spine_nominal > spine_max)
    throw std::runtime_error("robot: spine.l_nominal outside travel bounds");
  if (spine_stiffness <= 0) throw std::runtime_error("robot: spine.ks must be positive");
  if (thigh_length <= 0 || shank_length <= 0)
    throw std::runtime_error("robot: leg link lengths must be positive");
  if (stand_height >= 0.98 * (thigh_length + shank_length))
    throw std::runtime_error("robot: stance.height beyond leg reach");
  if (gravity_z >= 0) throw std::runtime_error("robot: sim.gravity_z must be negative");
}

namespace {

// Per-leg hip attachment: FL, FR on the front segment, RL, RR on the rear.
bool leg_is_front(int leg) { return leg < 2; }
double leg_side(int leg) { return (leg % 2 == 0) ? 1.0 : -1.0; }  // +y for FL, RL

}  // namespace

QuadrupedModel build_sim_model(const RobotDescription& d, bool compliant) {
  QuadrupedModel m;
  m.compliant = compliant;
  m.foot_local = Vec3(0.0, 0.0, -d.shank_length);

  const SpatialInertia front = link_inertia(d.front_mass, d.front_com, d.front_inertia);
  SpatialInertia rear = link_inertia(d.rear_mass, d.rear_com, d.rear_inertia);

  int rear_body = -1;
  if (compliant) {
    m.engine.add_base("trunk_front", front);
    EngineJoint spine;
    spine.kind = JointKind::Prismatic;
    spine.axis << 0, 0, 0, -1, 0, 0;  // q is the spine length, rear frame at (-q, 0, 0)
    rear_body = m.engine.add_body("trunk_rear", 0, spine, rear);
    m.spine_dof = rear_body - 1;
  } else {
    // Weld the two halves at the nominal length.
    const SpatialInertia welded =
        front + transform_inertia(rear, Transform::translate({-d.spine_nominal, 0.0, 0.0}));
    m.engine.add_base("trunk", welded);
  }

  for (int leg = 0; leg < kNumLegs; ++leg) {
    const double side = leg_side(leg);
    const bool front_leg = leg_is_front(leg);
    const int trunk = front_leg ? 0 : (compliant ? rear_body : 0);
    Vec3 hip_point(0.0, side * d.hip_y, 0.0);
    if (!front_leg && !compliant) hip_point.x() -= d.spine_nominal;

    EngineJoint roll;
    roll.kind = JointKind::Revolute;
    roll.axis << 1, 0, 0, 0, 0, 0;
    roll.parent_mount = Transform::translate(hip_point);
    const SpatialInertia hip = link_inertia(
        d.hip_mass, Vec3(0.0, side * d.abd_offset / 2.0, 0.0),
        Vec3(2e-4, 2e-4, 2e-4).asDiagonal());
    m.hip_body[leg] = m.engine.add_body("hip_" + std::to_string(leg), trunk, roll, hip);

    EngineJoint pitch;
    pitch.kind = JointKind::Revolute;
    pitch.axis << 0, 1, 0, 0, 0, 0;
    pitch.parent_mount = Transform::translate({0.0, side * d.abd_offset, 0.0});
    const SpatialInertia thigh = link_inertia(d.thigh_mass, Vec3(0.0, 0.0, -d.thigh_length / 2.0),
                                              rod_inertia_z(d.thigh_mass, d.thigh_length));
    m.thigh_body[leg] =
        m.engine.add_body("thigh_" + std::to_string(leg), m.hip_body[leg], pitch, thigh);

    EngineJoint knee;
    knee.kind = JointKind::Revolute;
    knee.axis << 0, 1, 0, 0, 0, 0;
    knee.parent_mount = Transform::translate({0.0, 0.0, -d.thigh_length});
    const SpatialInertia shank = link_inertia(d.shank_mass, Vec3(0.0, 0.0, -d.shank_length / 2.0),
                                              rod_inertia_z(d.shank_mass, d.shank_length));
    m.shank_body[leg] =
        m.engine.add_body("shank_" + std::to_string(leg), m.thigh_body[leg], knee, shank);

    m.leg_dof[leg] = {m.hip_body[leg] - 1, m.thigh_body[leg] - 1, m.shank_body[leg] - 1};
  }
  return m;
}

double QuadrupedModel::spine_length(const EngineState& s) const {
  return compliant ? s.q[spine_dof] : 0.0;
}

double QuadrupedModel::spine_rate(const EngineState& s) const {
  return compliant ? s.qd[spine_dof] : 0.0;
}

void leg_ik_sagittal(const RobotDescription& d, double dx, double dz, double& hip_pitch,
                     double& knee) {
  const double lt = d.thigh_length, ls = d.shank_length;
  const double r2 = dx * dx + dz * dz;
  const double r = std::sqrt(r2);
  const double reach = 0.995 * (lt + ls);
  const double rr = std::min(r, reach);
  // Interior angle at the knee from the law of cosines; knee folds backward.
  const double cos_knee = std::clamp((lt * lt + ls * ls - rr * rr) / (2.0 * lt * ls), -1.0, 1.0);
  const double interior = std::acos(cos_knee);
  knee = -(M_PI - interior);
  const double alpha = std::atan2(-dx, -dz);  // direction of the hip->foot ray
  const double beta =
      std::acos(std::clamp((lt * lt + rr * rr - ls * ls) / (2.0 * lt * rr), -1.0, 1.0));
  hip_pitch = alpha + beta;
}

EngineState nominal_state(const QuadrupedModel& model, const RobotDescription& d) {
  EngineState s = model.engine.make_state();
  const double l0 = model.compliant
                        ? std::clamp(d.spine_rest, d.spine_min, d.spine_max)
                        : d.spine_nominal;
  if (model.compliant) s.q[model.spine_dof] = l0;

  double hip_pitch, knee;
  leg_ik_sagittal(d, 0.0, -d.stand_height, hip_pitch, knee);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    s.q[model.leg_dof[leg][0]] = 0.0;
    s.q[model.leg_dof[leg][1]] = hip_pitch;
    s.q[model.leg_dof[leg][2]] = knee;
  }
  s.base_pose = Transform::translate({0.0, 0.0, d.stand_height});
  return s;
}

DeformableTree build_control_tree(const RobotDescription& d) {
  DeformableTree tree;

  DeformableBody trunk;
  trunk.params.resize(2);
  trunk.params[0] = {d.front_mass, d.front_com, d.front_inertia};
  trunk.params[1] = {d.rear_mass, d.rear_com, d.rear_inertia};
  trunk.states.resize(2);
  trunk.states[1].pose = Transform::translate({-d.spine_nominal, 0.0, 0.0});
  trunk.successors = {{}, {}};
  tree.bodies.push_back(trunk);
  tree.parent.push_back(-1);
  tree.parent_sub.push_back(0);
  tree.joints.push_back(JointModel::floating());
  tree.joint_states.push_back(JointState::zero(6));

  for (int leg = 0; leg < kNumLegs; ++leg) {
    const double side = leg_side(leg);
    const bool front_leg = leg_is_front(leg);
    const int trunk_sub = front_leg ? 0 : 1;
    const Vec3 hip_point(0.0, side * d.hip_y, 0.0);  // in the owning sub-body frame

    SubBodyParams hip{d.hip_mass, Vec3(0.0, side * d.abd_offset / 2.0, 0.0),
                      Vec3(2e-4, 2e-4, 2e-4).asDiagonal()};
    SubBodyParams thigh{d.thigh_mass, Vec3(0.0, 0.0, -d.thigh_length / 2.0),
                        rod_inertia_z(d.thigh_mass, d.thigh_length)};
    SubBodyParams shank{d.shank_mass, Vec3(0.0, 0.0, -d.shank_length / 2.0),
                        rod_inertia_z(d.shank_mass, d.shank_length)};

    const int hip_id = static_cast<int>(tree.bodies.size());
    tree.bodies.push_back(DeformableBody::rigid(hip));
    tree.parent.push_back(0);
    tree.parent_sub.push_back(trunk_sub);
    tree.joints.push_back(
        JointModel::revolute({1, 0, 0}, Transform::translate(hip_point)));
    tree.joint_states.push_back(JointState::zero(1));
    tree.bodies[0].successors[trunk_sub].push_back(hip_id);

    tree.bodies.push_back(DeformableBody::rigid(thigh));
    tree.parent.push_back(hip_id);
    tree.parent_sub.push_back(0);
    tree.joints.push_back(JointModel::revolute(
        {0, 1, 0}, Transform::translate({0.0, side * d.abd_offset, 0.0})));
    tree.joint_states.push_back(JointState::zero(1));

    tree.bodies.push_back(DeformableBody::rigid(shank));
    tree.parent.push_back(hip_id + 1);
    tree.parent_sub.push_back(0);
    tree.joints.push_back(JointModel::revolute(
        {0, 1, 0}, Transform::translate({0.0, 0.0, -d.thigh_length})));
    tree.joint_states.push_back(JointState::zero(1));
  }
  tree.validate();
  return tree;
}

void update_control_tree(DeformableTree& tree, const QuadrupedModel& model,
                         const EngineState& s) {
  auto& rear = tree.bodies[0].states[1];
  if (model.compliant) {
    const double l = s.q[model.spine_dof];
    const double ld = s.qd[model.spine_dof];
    rear.pose = Transform::translate({-l, 0.0, 0.0});
    rear.twist = Twist::Zero();
    rear.twist[3] = -ld;  // rear frame slides along -x as the spine extends
  } else {
    rear.twist = Twist::Zero();
  }

  for (int leg = 0; leg < kNumLegs; ++leg) {
    for (int j = 0; j < 3; ++j) {
      const int body = 1 + leg * 3 + j;
      tree.joint_states[body].q[0] = s.q[model.leg_dof[leg][j]];
      tree.joint_states[body].qd[0] = s.qd[model.leg_dof[leg][j]];
    }
  }
  tree.root_twist = s.base_twist;
}

}  // namespace ccpdi::sim
