#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "glovelink/analytics.hpp"
#include "glovelink/config.hpp"
#include "glovelink/gesture.hpp"
#include "glovelink/sessionio.hpp"
#include "glovelink/simpsm.hpp"
#include "glovelink/teleop.hpp"

namespace glovelink {

/// One hand-stream sample entering the control loop.
struct HandInput {
  double t = 0.0;
  Pose pose;
  double finger_dist = 0.0;
  std::optional<Landmarks> landmarks;
  /// Raw per-frame gesture (keyboard override); fed through the stabilizer.
  std::optional<GestureLabel> raw_gesture;
  /// Already-stabilized gesture (recorded trace); bypasses the stabilizer.
  std::optional<GestureLabel> stabilized_gesture;
  /// Under load the classifier may skip a sample; the window keeps its state.
  bool skip_classifier = false;
};

struct LoopOutput {
  GestureLabel gesture = GestureLabel::None;  // stabilized
  bool gesture_changed = false;
  std::optional<TipCommand> command;
  std::vector<TeleopEvent> events;
};

/// classify -> stabilize -> teleop step -> simulated arm.
///
/// Single owner: every call must come from one logical control thread.
class ControlLoop {
 public:
  ControlLoop(Settings settings, std::shared_ptr<const MlpModel> model, Pose tip_home = {},
              double start_time = 0.0);

  /// Processes one hand sample; goals go to the simulator stamped `t`.
  LoopOutput on_hand(const HandInput& in);

  /// Ticks the simulator at its configured period up to time `t`;
  /// `on_tick` sees the state after each tick.
  void advance_to(double t, const std::function<void(const SimPsmState&)>& on_tick = {});

  const Teleop& teleop() const { return teleop_; }
  const SimPsm& sim() const { return sim_; }
  const Settings& settings() const { return settings_; }
  GestureLabel gesture() const { return gesture_; }
  bool has_model() const { return static_cast<bool>(model_); }

  void set_eta(double eta);
  void set_hand_cube(double side);
  void set_tip_cube(double side);
  void set_latency(double latency);

 private:
  GestureLabel resolve_gesture(const HandInput& in);

  Settings settings_;
  std::shared_ptr<const MlpModel> model_;
  PredictionWindow window_;
  Teleop teleop_;
  SimPsm sim_;
  GestureLabel gesture_ = GestureLabel::None;
  bool first_ = true;
};

struct SimulateOptions {
  std::optional<double> latency;  // overrides the settings' sim latency
  double tail = 1.0;              // s of extra simulation after the last hand sample
  bool record_sim_states = true;
};

/// Batch replay of the hand stream of `input` through the full stack.
/// Gesture source per sample: the trace's gesture records when present
/// (latest at or before the sample), else the model on the sample's
/// landmarks, else None.
TraceFile simulate(const TraceFile& input, const Settings& settings,
                   std::shared_ptr<const MlpModel> model, const SimulateOptions& opts = {});

/// Tracking intervals (tracking on, clutch released) reconstructed from a trace.
struct TrackingSegment {
  double start = 0.0;
  double end = 0.0;  // exclusive; +inf for the final open segment
};

std::vector<TrackingSegment> tracking_segments(const TraceFile& trial, const ControlConfig& control);

/// Trial summary from a simulate/serve output trace: per tracking segment
/// the tip is unscaled against that segment's alignment; the delay is
/// estimated on the longest segment and applied to all.
/// `delay` skips estimation when given.
TrialSummary summarize_trace(const TraceFile& trial, const DelayOptions& opts = {},
                             std::optional<double> delay = std::nullopt);

}  // namespace glovelink
