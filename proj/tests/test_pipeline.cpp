#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "glovelink/pipeline.hpp"
#include "glovelink/scenario.hpp"

using namespace glovelink;

namespace {

std::string text_of(const TraceFile& tf) {
  std::stringstream ss;
  write_trace(ss, tf);
  return ss.str();
}

template <class T>
std::vector<T> all_of_type(const TraceFile& tf) {
  std::vector<T> out;
  for (const auto& r : tf.records) {
    if (const auto* x = std::get_if<T>(&r)) out.push_back(*x);
  }
  return out;
}

std::vector<double> event_times(const TraceFile& tf, TeleopEvent e) {
  std::vector<double> out;
  for (const auto& ev : all_of_type<EventRecord>(tf)) {
    if (ev.event == e) out.push_back(ev.t);
  }
  return out;
}

// Scripted session with a Fist (clutch) held from `from` to `to`.
TraceFile clutched_script(double from, double to) {
  ScriptOptions o;
  o.duration = 12.0;
  TraceFile tf = scripted_trace(o);
  tf.records.emplace_back(GestureRecord{from, GestureLabel::Fist});
  tf.records.emplace_back(GestureRecord{to, GestureLabel::None});
  return tf;
}

}  // namespace

TEST_CASE("simulate is deterministic") {
  const TraceFile in = scripted_trace();
  const Settings s;
  const std::string a = text_of(simulate(in, s, nullptr, {0.1}));
  const std::string b = text_of(simulate(in, s, nullptr, {0.1}));
  CHECK(a == b);
  CHECK(a.size() > 1000);
}

TEST_CASE("ring hold starts tracking and goals follow") {
  const TraceFile out = simulate(scripted_trace(), Settings{}, nullptr);
  const auto on = event_times(out, TeleopEvent::TrackingOn);
  REQUIRE(on.size() == 1);
  CHECK(on[0] >= Settings{}.control.ring_hold);
  CHECK(on[0] < Settings{}.control.ring_hold + 0.02);

  const auto goals = all_of_type<GoalRecord>(out);
  REQUIRE_FALSE(goals.empty());
  CHECK(goals.front().t >= on[0]);

  const auto segs = tracking_segments(out, Settings{}.control);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].start == on[0]);
  CHECK(std::isinf(segs[0].end));

  // Ticks cover the whole run at the sim period.
  const auto states = all_of_type<SimStateRecord>(out);
  const auto hands = all_of_type<HandRecord>(out);
  REQUIRE(states.size() > 2);
  CHECK(states[1].t - states[0].t == doctest::Approx(Settings{}.sim.tick_period()));
  CHECK(states.back().t >= hands.back().t + Settings{}.sim.latency + 1.0 - 1e-9);
}

TEST_CASE("start_tracking opens a segment at the first sample") {
  Settings s;
  s.control.start_tracking = true;
  ScriptOptions o;
  o.hold = 0.5;
  o.duration = 2.0;
  const TraceFile out = simulate(scripted_trace(o), s, nullptr);
  const auto segs = tracking_segments(out, s.control);
  REQUIRE_FALSE(segs.empty());
  CHECK(segs[0].start == 0.0);
}

TEST_CASE("summarize_trace recovers latency and small errors") {
  for (double latency : {0.1, 0.25}) {
    const TraceFile out = simulate(scripted_trace(), Settings{}, nullptr, {latency});
    const TrialSummary s = summarize_trace(out);
    CHECK(std::abs(s.delay - latency) <= 0.010);
    CHECK(s.trans_mean <= 0.005);
    CHECK(s.rot_mean <= 0.04);
    CHECK(s.samples > 100);
    CHECK(s.duration > 9.0);
  }

  const TrialSummary empty = summarize_trace({});
  CHECK(empty.duration == 0.0);
  CHECK(empty.samples == 0);
}

TEST_CASE("clutch splits tracking and freezes the tip") {
  const TraceFile out = simulate(clutched_script(6.0, 7.5), Settings{}, nullptr, {0.1});
  const auto engaged = event_times(out, TeleopEvent::ClutchEngaged);
  const auto released = event_times(out, TeleopEvent::ClutchReleased);
  REQUIRE(engaged.size() == 1);
  REQUIRE(released.size() == 1);
  CHECK(event_times(out, TeleopEvent::HapticOn) == engaged);
  CHECK(event_times(out, TeleopEvent::HapticOff) == released);

  const auto segs = tracking_segments(out, Settings{}.control);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].end == engaged[0]);
  CHECK(segs[1].start == released[0]);

  // Goals issued while clutched repeat the last pre-clutch goal.
  const auto goals = all_of_type<GoalRecord>(out);
  std::optional<Pose> frozen;
  for (const auto& g : goals) {
    if (g.t < engaged[0]) frozen = g.pose;
    if (g.t >= engaged[0] && g.t < released[0]) {
      REQUIRE(frozen);
      CHECK(g.pose == *frozen);
    }
  }

  const TrialSummary s = summarize_trace(out);
  CHECK(std::abs(s.delay - 0.1) <= 0.010);
  CHECK(s.trans_mean <= 0.005);
  CHECK(s.rot_mean <= 0.04);
}

TEST_CASE("control loop: stabilizer, classifier skip and ticking") {
  Settings s;
  ControlLoop loop(s, nullptr);
  HandInput in;
  in.raw_gesture = GestureLabel::Fist;
  GestureLabel g = GestureLabel::None;
  for (int i = 0; i < 4; ++i) {
    in.t = i / 120.0;
    g = loop.on_hand(in).gesture;
  }
  CHECK(g == GestureLabel::Fist);

  // Skipped samples keep the window's verdict.
  HandInput skipped;
  skipped.skip_classifier = true;
  for (int i = 4; i < 20; ++i) {
    skipped.t = i / 120.0;
    CHECK(loop.on_hand(skipped).gesture == GestureLabel::Fist);
  }

  // Without a model or any override the window fills with None.
  HandInput plain;
  for (int i = 20; i < 27; ++i) {
    plain.t = i / 120.0;
    g = loop.on_hand(plain).gesture;
  }
  CHECK(g == GestureLabel::None);

  int ticks = 0;
  ControlLoop fresh(s, nullptr);
  fresh.advance_to(1.0, [&](const SimPsmState&) { ++ticks; });
  CHECK(ticks == static_cast<int>(std::lround(s.sim.tick_rate)));
}
