#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "glovelink/geometry.hpp"
#include "glovelink/handmodel.hpp"

namespace glovelink {

struct ControlConfig {
  double hand_cube = 0.40;      // L_h, meters
  double tip_cube = 0.08;       // L_t, meters
  double ring_hold = 2.0;       // seconds of Ring to toggle tracking
  double pinky_debounce = 0.1;  // seconds of Pinky before energy
  double finger_open = 0.08;    // meters
  double finger_closed = 0.0;   // meters
  double jaw_min = -0.35;       // radians, fully closed
  double jaw_max = 1.0;         // radians
  bool start_tracking = false;

  /// Motion scaling factor L_t / L_h.
  double eta() const { return tip_cube / hand_cube; }
  /// Adjusts the scaling by resizing the tip cube.
  void set_eta(double eta) { tip_cube = eta * hand_cube; }
  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;
};

enum class TeleopEvent {
  HapticOn,
  HapticOff,
  TrackingOn,
  TrackingOff,
  EnergyOn,
  EnergyOff,
  ClutchEngaged,
  ClutchReleased,
};

std::string_view to_string(TeleopEvent e);
std::optional<TeleopEvent> parse_event(std::string_view name);

enum class ClutchPhase { Disengaged, Engaged };

/// Nearest point of the axis-aligned cube of side `side` centered at the origin.
Vec3 clamp_to_cube(const Vec3& d, double side);
/// Hand displacement to tip displacement: eta * clamp(d, L_h).
Vec3 scale(const Vec3& dp_hand, const ControlConfig& cfg);
Vec3 unscale(const Vec3& dp_tip, const ControlConfig& cfg);
/// Thumb-index distance to jaw angle, affine and saturated.
double map_jaw(double finger_dist, const ControlConfig& cfg);

/// One hand-tracker sample as consumed by the controller.
struct HandSample {
  double t = 0.0;
  Pose hand_pose;
  double finger_distance = 0.0;
};

HandSample to_sample(const HandFrame& h);

struct TipCommand {
  Pose goal;  // tip T in PSM base R
  double jaw = 0.0;
};

struct TeleopState {
  bool tracking = false;
  ClutchPhase clutch = ClutchPhase::Disengaged;
  bool haptic_on = false;
  bool energy_on = false;
  bool aligned = false;
  Pose glove_ref;  // hand pose at the last alignment
  Pose tip_ref;    // tip configuration held through the last alignment
  Pose tip_home;   // center of the tip workspace
  std::optional<Pose> last_goal;
  std::optional<double> ring_since;
  bool ring_fired = false;
  std::optional<double> pinky_since;
  GestureLabel last_gesture = GestureLabel::None;
  std::optional<double> last_time;
};

struct StepResult {
  std::optional<TipCommand> command;
  std::vector<TeleopEvent> events;
};

/// Gesture-driven teleoperation state machine: clutch (translation and
/// orientation), tracking toggle, energy, scaled and clamped tip goals.
class Teleop {
 public:
  Teleop(ControlConfig cfg, Pose tip_home);

  /// Advances on one hand sample with the stabilized gesture.
  /// Throws NonMonotoneTime if `sample.t` goes backwards.
  StepResult step(const HandSample& sample, GestureLabel gesture);
  StepResult step(const HandFrame& frame, GestureLabel gesture) { return step(to_sample(frame), gesture); }

  const TeleopState& state() const { return state_; }
  const ControlConfig& config() const { return cfg_; }
  /// Takes effect from the next step; the current alignment is kept.
  void set_config(const ControlConfig& cfg);

  /// Goal for a hand pose given the current alignment (no state change).
  Pose goal_for(const Pose& hand) const;

 private:
  void align(const Pose& hand);

  ControlConfig cfg_;
  TeleopState state_;
};

}  // namespace glovelink
