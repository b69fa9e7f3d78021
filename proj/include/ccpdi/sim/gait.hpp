#pragma once

#include <array>
#include <vector>

#include "ccpdi/sim/robot.hpp"

namespace ccpdi::sim {

/// Periodic phase clock per leg. Trot: diagonal pairs in anti-phase, duty 0.5.
/// Before start_time every leg reads as stance (initial settling). The period
/// can ramp linearly from period_initial to period over ramp_time so the gait
/// eases in; the phase integral stays continuous.
struct GaitSchedule {
  double period = 0.5;
  double duty = 0.5;
  std::array<double, kNumLegs> offset{0.0, 0.5, 0.5, 0.0};  // FL, FR, RL, RR
  double start_time = 0.0;
  double period_initial = -1.0;  // <= 0: no ramp
  double ramp_time = 0.0;

  static GaitSchedule trot(double period) {
    GaitSchedule g;
    g.period = period;
    return g;
  }

  double period_at(double t) const {
    const double u = t - start_time;
    if (period_initial <= 0.0 || ramp_time <= 0.0 || u >= ramp_time)
      return period;
    if (u <= 0.0) return period_initial;
    return period_initial + (period - period_initial) * (u / ramp_time);
  }

  /// Elapsed gait cycles since start_time (integral of 1/period).
  double cycles(double t) const {
    const double u = t - start_time;
    if (u <= 0.0) return 0.0;
    if (period_initial <= 0.0 || ramp_time <= 0.0 || period_initial == period)
      return u / period;
    const double slope = (period - period_initial) / ramp_time;
    const double r = std::min(u, ramp_time);
    double c = std::log1p(slope * r / period_initial) / slope;
    if (u > ramp_time) c += (u - ramp_time) / period;
    return c;
  }

  double phase(int leg, double t) const {
    double p = std::fmod(cycles(t) + offset[leg], 1.0);
    return p < 0.0 ? p + 1.0 : p;
  }
  bool in_stance(int leg, double t) const { return t < start_time || phase(leg, t) < duty; }
  /// Progress through the swing interval, in [0, 1).
  double swing_phase(int leg, double t) const {
    return (phase(leg, t) - duty) / (1.0 - duty);
  }
  double stance_duration(double t) const { return duty * period_at(t); }
  double swing_duration(double t) const { return (1.0 - duty) * period_at(t); }

  /// Contact flags over an MPC horizon sampled every dt from time t.
  std::vector<uint8_t> contact_table(double t, double dt, int horizon) const {
    std::vector<uint8_t> table(static_cast<size_t>(horizon) * kNumLegs);
    for (int k = 0; k < horizon; ++k)
      for (int leg = 0; leg < kNumLegs; ++leg)
        table[k * kNumLegs + leg] = in_stance(leg, t + k * dt) ? 1 : 0;
    return table;
  }
};

}  // namespace ccpdi::sim
