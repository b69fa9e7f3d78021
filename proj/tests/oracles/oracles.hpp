#pragma once

#include <random>
#include <vector>

#include "ccpdi/centroidal_mpc.hpp"
#include "ccpdi/multibody_tree.hpp"

// Brute-force reference implementations for tests only. None of these call
// the inertia-composition or prediction code they are used to check; they
// stick to plain transforms and direct summation.

namespace ccpdi::oracles {

using Rng = std::mt19937_64;

struct Particle {
  double mass;
  Vec3 position;
};
using ParticleCloud = std::vector<Particle>;

/// Direct moment summation into the standard spatial-inertia block pattern.
SpatialInertia cloud_inertia(const ParticleCloud& cloud);

/// Random cloud whose mass, CoM and rotational inertia match the sub-body
/// parameters exactly (moment-corrected sampling; weights renormalized).
ParticleCloud sample_sub_body_cloud(const SubBodyParams& p, int count, Rng& rng);

/// The 6x6 sub-body inertia assembled from scratch (independent of the
/// library's assembly).
SpatialInertia assemble_inertia(const SubBodyParams& p);

/// Congruence into the parent frame through a plain transform.
SpatialInertia reexpress_inertia(const SpatialInertia& inertia, const Transform& child_in_parent);

/// Body inertia after rolling every sub-body pose forward k constant-twist
/// steps of dt, summed in the (fixed) body frame.
SpatialInertia rollout_body_inertia(const DeformableBody& b, double dt, int k);

/// Whole-tree rollout: every sub-body pose advanced k steps, joints frozen,
/// then a flat sum of all sub-body inertias re-expressed in the root frame.
SpatialInertia rollout_tree_inertia(const DeformableTree& tree, double dt, int k);

/// Instantaneous composite inertia in the root frame (k = 0 rollout).
SpatialInertia flat_sum_composite(const DeformableTree& tree);

/// Frame integration of Tdot = T [V] with fixed-step RK4.
Eigen::Matrix4d integrate_frame(const Twist& v, double duration, int substeps);

/// Dense matrix exponential of the 4x4 twist matrix (scaling-and-squaring).
Eigen::Matrix4d dense_exp_se3(const Vec6& axis, double travel);

/// RK4 rollout of xdot = A x + B u with constant input.
Eigen::VectorXd integrate_linear(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                 const Eigen::VectorXd& x0, const Eigen::VectorXd& u,
                                 double duration, int substeps);

/// Minimum-norm static force allocation: sum f = -m g, sum r x f = 0.
std::vector<Vec3> static_allocation(const std::vector<Vec3>& footholds, double mass, double g);

// --- random model generators (seeded, deterministic) ---

Mat3 random_rotation(Rng& rng);
Transform random_transform(Rng& rng, double translation_scale = 0.3);
/// Physically valid random sub-body (box-derived rotational inertia).
SubBodyParams random_sub_body(Rng& rng);
Twist random_twist(Rng& rng, double angular_scale, double linear_scale);
DeformableBody random_body(Rng& rng, int max_sub_bodies, double angular_scale,
                           double linear_scale);
/// Random topology of 2-5 bodies with revolute/prismatic joints; sub-body
/// twists bounded by the given scales (zero scales give a rigid tree).
DeformableTree random_tree(Rng& rng, double angular_scale, double linear_scale);

}  // namespace ccpdi::oracles
