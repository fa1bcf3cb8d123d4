#pragma once

#include <algorithm>
#include <cmath>

namespace cpstest::test_oracles {

// Independent step-by-step arithmetic for the single static obstacle case,
// written straight from the dynamics definition (move with current speed,
// decide against the post-move distance, then update speed). Used to
// freeze expected braking onsets and stop positions.
struct StoppingProfile {
  int first_brake_state = -1;   // first state with braking commanded
  double brake_distance = 0.0;  // obstacle distance at that state
  double stop_position = 0.0;   // position once speed reaches zero
  double min_gap = 1e9;         // smallest obstacle distance seen
};

inline StoppingProfile stopping_profile(double speed, double obstacle,
                                        double decel = 4.0, double dt = 0.1,
                                        double stop_zone = 2.0,
                                        int max_steps = 3000) {
  StoppingProfile p;
  double x = 0.0, v = speed;
  for (int k = 0; k < max_steps; ++k) {
    double xn = x + v * dt;
    double dist = obstacle - xn;
    bool brake = dist >= 0 && dist <= v * v / (2.0 * decel) + stop_zone;
    if (brake && p.first_brake_state < 0) {
      p.first_brake_state = k + 1;
      p.brake_distance = dist;
    }
    x = xn;
    p.min_gap = std::min(p.min_gap, obstacle - x);
    v = brake ? std::max(0.0, v - decel * dt) : v;
    if (v == 0.0) break;
  }
  p.stop_position = x;
  return p;
}

// Closed-form feasibility threshold for the no-collision verdict against
// a static obstacle: pass iff gap > v^2/(2*decel) + collision_gap.
inline double collision_threshold(double speed, double decel = 4.0,
                                  double collision_gap = 0.5) {
  return speed * speed / (2.0 * decel) + collision_gap;
}

}  // namespace cpstest::test_oracles
