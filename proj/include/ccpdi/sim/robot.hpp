#pragma once

#include <array>
#include <string>

#include "ccpdi/config.hpp"
#include "ccpdi/sim/dynamics.hpp"

// Desk-scale point-foot quadruped with a two-segment trunk. The trunk halves
// are joined by a compliant prismatic spine (spring k_s, rest length l_rest,
// travel bounds) or welded at the nominal length in rigid mode. Legs are
// 3-dof (hip roll, hip pitch, knee), all pitch joints about +y.

namespace ccpdi::sim {

// Leg indexing used everywhere: FL, FR, RL, RR.
inline constexpr int kNumLegs = 4;

struct RobotDescription {
  std::string name = "deskquad";

  double front_mass = 4.7;
  double rear_mass = 4.7;
  Vec3 front_com{0.03, 0.0, 0.0};
  Vec3 rear_com{-0.03, 0.0, 0.0};
  Mat3 front_inertia = Vec3(0.0125, 0.027, 0.0345).asDiagonal();
  Mat3 rear_inertia = Vec3(0.0125, 0.027, 0.0345).asDiagonal();

  double spine_stiffness = 36.0;  // N/m
  double spine_damping = -1.0;    // N s/m; negative selects 10% critical
  double spine_rest = 0.18;       // m
  double spine_min = 0.15;
  double spine_max = 0.22;
  double spine_nominal = 0.18;

  double hip_y = 0.09;
  double abd_offset = 0.035;
  double thigh_length = 0.14;
  double shank_length = 0.14;
  double hip_mass = 0.06;
  double thigh_mass = 0.06;
  double shank_mass = 0.03;

  double stand_height = 0.25;

  double contact_stiffness = 2.5e4;
  double contact_damping = 400.0;
  double contact_mu = 0.7;
  double contact_vreg = 0.01;
  double gravity_z = -9.81;

  static RobotDescription from_config(const Config& cfg);

  double effective_spine_damping() const;
  double total_mass() const;
  /// Rest length inside the travel bounds is the softly-sprung regime; outside
  /// it the spine rides a bound (always-tensioned). Allowed, but worth a flag.
  bool rest_length_in_bounds() const { return spine_rest >= spine_min && spine_rest <= spine_max; }

  /// Throws std::runtime_error on physically inconsistent values.
  void validate() const;
};

/// Built simulation model plus the index bookkeeping the controllers need.
struct QuadrupedModel {
  RigidBodyEngine engine;
  bool compliant = false;
  int spine_dof = -1;  // index into q (compliant only)
  std::array<int, kNumLegs> hip_body{};
  std::array<int, kNumLegs> thigh_body{};
  std::array<int, kNumLegs> shank_body{};
  std::array<std::array<int, 3>, kNumLegs> leg_dof{};  // q indices: roll, pitch, knee
  Vec3 foot_local = Vec3::Zero();  // foot point in the shank frame

  double spine_length(const EngineState& s) const;
  double spine_rate(const EngineState& s) const;
};

QuadrupedModel build_sim_model(const RobotDescription& d, bool compliant);

/// Nominal standing configuration: spine at its equilibrium length, feet under
/// the hip pitch axes, base at stand height.
EngineState nominal_state(const QuadrupedModel& model, const RobotDescription& d);

/// Planar two-link IK for one leg: hip-frame foot target (x, z below hip
/// pitch) to (hip pitch, knee) angles, knee folded backward.
void leg_ik_sagittal(const RobotDescription& d, double dx, double dz, double& hip_pitch,
                     double& knee);

/// Control-side tree template: body 0 is the two-sub-body trunk, then four
/// legs of three rigid links each. Rear hips hang off trunk sub-body 1.
DeformableTree build_control_tree(const RobotDescription& d);

/// Pushes the simulator state into the tree: spine length/rate into the rear
/// sub-body pose/twist (zeroed in rigid mode), joint states, root twist.
void update_control_tree(DeformableTree& tree, const QuadrupedModel& model,
                         const EngineState& s);

}  // namespace ccpdi::sim
