#include "glovelink/simpsm.hpp"

#include <algorithm>
#include <cmath>

#include "glovelink/error.hpp"

namespace glovelink {

void SimConfig::validate() const {
  const bool ok = v_max > 0.0 && w_max > 0.0 && jaw_rate > 0.0 && tick_rate > 0.0 &&
                  latency >= 0.0 && std::isfinite(latency) && jaw_min < jaw_max;
  if (!ok) throw Error(ErrorCode::InvalidArgument, "invalid simulator configuration");
}

SimPsm::SimPsm(SimConfig cfg, Pose initial_tip, double initial_jaw, double start_time)
    : cfg_(cfg) {
  cfg_.validate();
  state_.time = start_time;
  state_.tip = initial_tip;
  state_.jaw = std::clamp(initial_jaw, cfg_.jaw_min, cfg_.jaw_max);
}

void SimPsm::set_latency(double latency) {
  SimConfig next = cfg_;
  next.latency = latency;
  next.validate();
  cfg_ = next;
}

void SimPsm::submit_goal(const TipCommand& cmd, double now) {
  const double release = now + cfg_.latency;
  // Release times stay monotone even if the latency was lowered mid-stream.
  const double floor = state_.pending.empty() ? release : state_.pending.back().release_time;
  state_.pending.push_back({std::max(release, floor), cmd});
  release_due();
}

void SimPsm::release_due() {
  while (!state_.pending.empty() && state_.pending.front().release_time <= state_.time) {
    state_.active = state_.pending.front().command;
    state_.pending.pop_front();
    state_.at_goal = false;
  }
}

void SimPsm::tick(double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "tick requires dt > 0");
  release_due();
  if (state_.active) {
    const TipCommand& goal = *state_.active;

    const Vec3 err = goal.goal.position - state_.tip.position;
    const double dist = err.norm();
    const double max_step = cfg_.v_max * dt;
    if (dist <= max_step) {
      state_.tip.position = goal.goal.position;
    } else {
      state_.tip.position += err * (max_step / dist);
    }

    state_.tip.orientation = rotate_towards(state_.tip.orientation, goal.goal.orientation, cfg_.w_max * dt);

    const double jaw_goal = std::clamp(goal.jaw, cfg_.jaw_min, cfg_.jaw_max);
    const double jaw_step = cfg_.jaw_rate * dt;
    state_.jaw = std::abs(jaw_goal - state_.jaw) <= jaw_step
                     ? jaw_goal
                     : state_.jaw + std::copysign(jaw_step, jaw_goal - state_.jaw);

    state_.at_goal = state_.tip.position == goal.goal.position &&
                     state_.tip.orientation == goal.goal.orientation;
  } else {
    state_.at_goal = true;
  }
  state_.time += dt;
}

void SimPsm::advance_to(double t) {
  const double period = cfg_.tick_period();
  while (state_.time + period <= t + 1e-9) tick(period);
}

}  // namespace glovelink
