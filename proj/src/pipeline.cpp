#include "glovelink/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glovelink/error.hpp"

namespace glovelink {

ControlLoop::ControlLoop(Settings settings, std::shared_ptr<const MlpModel> model, Pose tip_home,
                         double start_time)
    : settings_(std::move(settings)),
      model_(std::move(model)),
      teleop_(settings_.control, tip_home),
      sim_(settings_.sim, tip_home, 0.0, start_time) {}

GestureLabel ControlLoop::resolve_gesture(const HandInput& in) {
  if (in.stabilized_gesture) return *in.stabilized_gesture;
  if (in.raw_gesture) return window_.push(*in.raw_gesture);
  if (in.skip_classifier) return window_.current();
  if (in.landmarks && model_) return window_.push(predict(*model_, feature_vector(*in.landmarks)));
  return window_.push(GestureLabel::None);
}

LoopOutput ControlLoop::on_hand(const HandInput& in) {
  LoopOutput out;
  out.gesture = resolve_gesture(in);
  out.gesture_changed = first_ || out.gesture != gesture_;
  first_ = false;
  gesture_ = out.gesture;

  StepResult step = teleop_.step(HandSample{in.t, in.pose, in.finger_dist}, out.gesture);
  if (step.command) sim_.submit_goal(*step.command, in.t);
  out.command = step.command;
  out.events = std::move(step.events);
  return out;
}

void ControlLoop::advance_to(double t, const std::function<void(const SimPsmState&)>& on_tick) {
  const double period = sim_.config().tick_period();
  while (sim_.state().time + period <= t + 1e-9) {
    sim_.tick(period);
    if (on_tick) on_tick(sim_.state());
  }
}

void ControlLoop::set_eta(double eta) {
  ControlConfig c = teleop_.config();
  c.set_eta(eta);
  teleop_.set_config(c);
  settings_.control = c;
}

void ControlLoop::set_hand_cube(double side) {
  ControlConfig c = teleop_.config();
  c.hand_cube = side;
  teleop_.set_config(c);
  settings_.control = c;
}

void ControlLoop::set_tip_cube(double side) {
  ControlConfig c = teleop_.config();
  c.tip_cube = side;
  teleop_.set_config(c);
  settings_.control = c;
}

void ControlLoop::set_latency(double latency) {
  sim_.set_latency(latency);
  settings_.sim.latency = latency;
}

TraceFile simulate(const TraceFile& input, const Settings& base, std::shared_ptr<const MlpModel> model,
                   const SimulateOptions& opts) {
  Settings settings = base;
  if (opts.latency) settings.sim.latency = *opts.latency;
  settings.sim.validate();

  std::vector<const HandRecord*> hands;
  std::vector<const GestureRecord*> gestures;
  for (const auto& r : input.records) {
    if (const auto* h = std::get_if<HandRecord>(&r)) hands.push_back(h);
    if (const auto* g = std::get_if<GestureRecord>(&r)) gestures.push_back(g);
  }

  TraceFile out;
  out.config = settings;
  if (hands.empty()) return out;

  ControlLoop loop(settings, std::move(model), {}, hands.front()->t);
  auto record_tick = [&](const SimPsmState& s) {
    if (opts.record_sim_states) out.records.emplace_back(SimStateRecord{s.time, s.tip, s.jaw, s.at_goal});
  };

  std::size_t next_gesture = 0;
  std::optional<GestureLabel> recorded;
  for (const HandRecord* h : hands) {
    loop.advance_to(h->t, record_tick);

    HandInput in{h->t, h->pose, h->finger_dist, h->landmarks, std::nullopt, std::nullopt};
    if (!gestures.empty()) {
      while (next_gesture < gestures.size() && gestures[next_gesture]->t <= h->t) {
        recorded = gestures[next_gesture++]->label;
      }
      in.stabilized_gesture = recorded.value_or(GestureLabel::None);
    }
    const LoopOutput o = loop.on_hand(in);

    out.records.emplace_back(*h);
    if (o.gesture_changed) out.records.emplace_back(GestureRecord{h->t, o.gesture});
    for (TeleopEvent e : o.events) out.records.emplace_back(EventRecord{h->t, e});
    if (o.command) out.records.emplace_back(GoalRecord{h->t, o.command->goal, o.command->jaw});
  }
  loop.advance_to(hands.back()->t + settings.sim.latency + opts.tail, record_tick);
  return out;
}

std::vector<TrackingSegment> tracking_segments(const TraceFile& trial, const ControlConfig& control) {
  std::vector<TrackingSegment> segments;
  std::optional<double> first_hand;
  for (const auto& r : trial.records) {
    if (const auto* h = std::get_if<HandRecord>(&r)) {
      first_hand = h->t;
      break;
    }
  }
  if (!first_hand) return segments;

  bool tracking = control.start_tracking;
  bool clutched = false;
  std::optional<double> since;
  if (tracking) since = *first_hand;
  for (const auto& r : trial.records) {
    const auto* e = std::get_if<EventRecord>(&r);
    if (!e) continue;
    switch (e->event) {
      case TeleopEvent::TrackingOn: tracking = true; break;
      case TeleopEvent::TrackingOff: tracking = false; break;
      case TeleopEvent::ClutchEngaged: clutched = true; break;
      case TeleopEvent::ClutchReleased: clutched = false; break;
      default: continue;
    }
    const bool active = tracking && !clutched;
    if (active && !since) {
      since = e->t;
    } else if (!active && since) {
      segments.push_back({*since, e->t});
      since.reset();
    }
  }
  if (since) segments.push_back({*since, std::numeric_limits<double>::infinity()});
  return segments;
}

TrialSummary summarize_trace(const TraceFile& trial, const DelayOptions& opts,
                             std::optional<double> delay) {
  Settings settings;
  from_json(trial.config, settings);
  const double eta = settings.control.eta();

  Trajectory hand;
  Trajectory tip;
  std::vector<const GoalRecord*> goals;
  for (const auto& r : trial.records) {
    if (const auto* h = std::get_if<HandRecord>(&r)) {
      if (hand.empty() || h->t > hand.t.back()) hand.push_back(h->t, h->pose);
    } else if (const auto* s = std::get_if<SimStateRecord>(&r)) {
      if (tip.empty() || s->t > tip.t.back()) tip.push_back(s->t, s->pose);
    } else if (const auto* g = std::get_if<GoalRecord>(&r)) {
      goals.push_back(g);
    }
  }

  TrialSummary summary;
  if (hand.empty()) return summary;
  summary.duration = hand.t.back() - hand.t.front();

  struct Piece {
    Trajectory hand;
    Trajectory tip;  // unscaled into the hand workspace
  };
  std::vector<Piece> pieces;
  const auto segments = tracking_segments(trial, settings.control);
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const TrackingSegment& seg = segments[k];
    const double tip_end =
        k + 1 < segments.size() ? segments[k + 1].start : std::numeric_limits<double>::infinity();
    const auto goal = std::find_if(goals.begin(), goals.end(),
                                   [&](const GoalRecord* g) { return g->t >= seg.start; });
    if (goal == goals.end()) continue;
    Piece piece;
    std::optional<Pose> hand_ref;
    for (std::size_t i = 0; i < hand.size(); ++i) {
      if (hand.t[i] < seg.start || hand.t[i] >= seg.end) continue;
      if (!hand_ref) hand_ref = hand.poses[i];
      piece.hand.push_back(hand.t[i], hand.poses[i]);
    }
    Trajectory raw_tip;
    for (std::size_t i = 0; i < tip.size(); ++i) {
      if (tip.t[i] >= seg.start && tip.t[i] < tip_end) raw_tip.push_back(tip.t[i], tip.poses[i]);
    }
    if (piece.hand.size() < 3 || raw_tip.size() < 3 || !hand_ref) continue;
    piece.tip = unscale(raw_tip, eta, Alignment{(*goal)->pose, *hand_ref});
    pieces.push_back(std::move(piece));
  }
  if (pieces.empty()) return summary;

  const auto longest = std::max_element(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) {
    return a.hand.size() < b.hand.size();
  });
  summary.delay = delay ? *delay : estimate_delay(longest->hand, longest->tip, opts);

  std::vector<double> trans;
  std::vector<double> rot;
  for (const Piece& p : pieces) {
    const auto [in, out] = align(p.hand, p.tip, summary.delay);
    const ErrorSeries e = error_series(in, out);
    trans.insert(trans.end(), e.trans.begin(), e.trans.end());
    rot.insert(rot.end(), e.rot.begin(), e.rot.end());
  }
  const MeanStd tr = mean_std(trans);
  const MeanStd ro = mean_std(rot);
  summary.trans_mean = tr.mean;
  summary.trans_std = tr.std;
  summary.rot_mean = ro.mean;
  summary.rot_std = ro.std;
  summary.samples = trans.size();
  return summary;
}

}  // namespace glovelink
