#pragma once

#include <deque>
#include <optional>

#include "glovelink/geometry.hpp"
#include "glovelink/teleop.hpp"

namespace glovelink {

struct SimConfig {
  double v_max = 0.15;     // m/s
  double w_max = 2.0;      // rad/s
  double jaw_rate = 4.0;   // rad/s
  double tick_rate = 500;  // Hz
  double latency = 0.0;    // s, added between goal submission and pursuit
  double jaw_min = -0.35;
  double jaw_max = 1.0;

  double tick_period() const { return 1.0 / tick_rate; }
  void validate() const;
};

struct PendingGoal {
  double release_time = 0.0;
  TipCommand command;
};

struct SimPsmState {
  double time = 0.0;
  Pose tip;
  double jaw = 0.0;
  std::optional<TipCommand> active;
  std::deque<PendingGoal> pending;
  bool at_goal = true;
};

/// Pose-controlled patient-side arm stand-in: straight-line position
/// moves and geodesic rotations under rate limits, with a latency line.
class SimPsm {
 public:
  SimPsm(SimConfig cfg, Pose initial_tip, double initial_jaw = 0.0, double start_time = 0.0);

  /// Enqueues a goal released at `now + latency`; the newest released goal wins.
  void submit_goal(const TipCommand& cmd, double now);
  /// Advances the simulation clock by `dt` (> 0).
  void tick(double dt);
  /// Ticks at the configured period until the clock reaches `t`.
  void advance_to(double t);

  const SimPsmState& state() const { return state_; }
  const SimConfig& config() const { return cfg_; }
  void set_latency(double latency);

 private:
  void release_due();

  SimConfig cfg_;
  SimPsmState state_;
};

}  // namespace glovelink
