#include "glovelink/teleop.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "glovelink/error.hpp"

namespace glovelink {

namespace {

constexpr std::array<std::string_view, 8> kEventNames{
    "HapticOn", "HapticOff", "TrackingOn", "TrackingOff",
    "EnergyOn", "EnergyOff", "ClutchEngaged", "ClutchReleased",
};

}  // namespace

void ControlConfig::validate() const {
  const bool ok = std::isfinite(hand_cube) && std::isfinite(tip_cube) && hand_cube > tip_cube &&
                  tip_cube > 0.0 && jaw_min < 0.0 && jaw_max > 0.0 &&
                  finger_open > finger_closed && ring_hold >= 0.0 && pinky_debounce >= 0.0;
  if (!ok) throw Error(ErrorCode::InvalidArgument, "invalid control configuration");
}

std::string_view to_string(TeleopEvent e) { return kEventNames[static_cast<std::size_t>(e)]; }

std::optional<TeleopEvent> parse_event(std::string_view name) {
  for (std::size_t i = 0; i < kEventNames.size(); ++i) {
    if (kEventNames[i] == name) return static_cast<TeleopEvent>(i);
  }
  return std::nullopt;
}

Vec3 clamp_to_cube(const Vec3& d, double side) {
  const double h = 0.5 * side;
  return {std::clamp(d.x, -h, h), std::clamp(d.y, -h, h), std::clamp(d.z, -h, h)};
}

Vec3 scale(const Vec3& dp_hand, const ControlConfig& cfg) {
  return clamp_to_cube(dp_hand, cfg.hand_cube) * cfg.eta();
}

Vec3 unscale(const Vec3& dp_tip, const ControlConfig& cfg) { return dp_tip / cfg.eta(); }

double map_jaw(double finger_dist, const ControlConfig& cfg) {
  const double d = std::clamp(finger_dist, cfg.finger_closed, cfg.finger_open);
  const double u = (d - cfg.finger_closed) / (cfg.finger_open - cfg.finger_closed);
  return cfg.jaw_min + u * (cfg.jaw_max - cfg.jaw_min);
}

HandSample to_sample(const HandFrame& h) {
  return {h.timestamp, h.hand_pose, finger_distance(h)};
}

Teleop::Teleop(ControlConfig cfg, Pose tip_home) : cfg_(cfg) {
  cfg_.validate();
  state_.tip_home = tip_home;
  state_.tip_ref = tip_home;
  state_.tracking = cfg_.start_tracking;
}

void Teleop::set_config(const ControlConfig& cfg) {
  cfg.validate();
  cfg_ = cfg;
}

void Teleop::align(const Pose& hand) {
  state_.glove_ref = hand;
  state_.aligned = true;
}

Pose Teleop::goal_for(const Pose& hand) const {
  const Vec3 dp = clamp_to_cube(hand.position - state_.glove_ref.position, cfg_.hand_cube);
  const Vec3 candidate = state_.tip_ref.position + dp * cfg_.eta();
  const double h = 0.5 * cfg_.tip_cube;
  const Vec3& home = state_.tip_home.position;
  const Vec3 position{std::clamp(candidate.x, home.x - h, home.x + h),
                      std::clamp(candidate.y, home.y - h, home.y + h),
                      std::clamp(candidate.z, home.z - h, home.z + h)};
  // An unmoved hand maps to the reference orientation bit for bit.
  const UnitQuat rel = hand.orientation == state_.glove_ref.orientation
                           ? UnitQuat::identity()
                           : state_.glove_ref.orientation.conjugate() * hand.orientation;
  return {position, state_.tip_ref.orientation * rel};
}

StepResult Teleop::step(const HandSample& sample, GestureLabel g) {
  if (state_.last_time && sample.t < *state_.last_time) {
    throw Error(ErrorCode::NonMonotoneTime,
                "hand sample at t=" + std::to_string(sample.t) + " precedes t=" +
                    std::to_string(*state_.last_time));
  }
  StepResult out;
  const double now = sample.t;
  const GestureLabel prev = state_.last_gesture;
  if (!state_.aligned) align(sample.hand_pose);

  if (state_.energy_on && g != GestureLabel::Pinky) {
    state_.energy_on = false;
    out.events.push_back(TeleopEvent::EnergyOff);
  }
  if (g != GestureLabel::Pinky) state_.pinky_since.reset();

  if (state_.clutch == ClutchPhase::Engaged && g != GestureLabel::Fist) {
    state_.clutch = ClutchPhase::Disengaged;
    state_.haptic_on = false;
    out.events.push_back(TeleopEvent::ClutchReleased);
    out.events.push_back(TeleopEvent::HapticOff);
    align(sample.hand_pose);
  } else if (state_.clutch == ClutchPhase::Disengaged && g == GestureLabel::Fist &&
             prev != GestureLabel::Fist) {
    state_.clutch = ClutchPhase::Engaged;
    state_.haptic_on = true;
    if (state_.last_goal) state_.tip_ref = *state_.last_goal;
    out.events.push_back(TeleopEvent::ClutchEngaged);
    out.events.push_back(TeleopEvent::HapticOn);
  }

  if (g == GestureLabel::Ring) {
    if (!state_.ring_since) state_.ring_since = now;
    if (!state_.ring_fired && now - *state_.ring_since >= cfg_.ring_hold) {
      state_.ring_fired = true;
      state_.tracking = !state_.tracking;
      if (state_.tracking) {
        if (state_.last_goal) state_.tip_ref = *state_.last_goal;
        align(sample.hand_pose);
        out.events.push_back(TeleopEvent::TrackingOn);
      } else {
        out.events.push_back(TeleopEvent::TrackingOff);
      }
    }
  } else {
    state_.ring_since.reset();
    state_.ring_fired = false;
  }

  if (g == GestureLabel::Pinky) {
    if (!state_.pinky_since) state_.pinky_since = now;
    if (!state_.energy_on && now - *state_.pinky_since >= cfg_.pinky_debounce) {
      state_.energy_on = true;
      out.events.push_back(TeleopEvent::EnergyOn);
    }
  }

  if (state_.tracking) {
    TipCommand cmd;
    cmd.goal = state_.clutch == ClutchPhase::Engaged ? state_.tip_ref : goal_for(sample.hand_pose);
    cmd.jaw = map_jaw(sample.finger_distance, cfg_);
    state_.last_goal = cmd.goal;
    out.command = cmd;
  }

  state_.last_gesture = g;
  state_.last_time = now;
  return out;
}

}  // namespace glovelink
