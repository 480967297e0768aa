#include "glovelink/scenario.hpp"

#include <cmath>
#include <numbers>

#include "glovelink/error.hpp"

namespace glovelink {

namespace {
constexpr Vec3 kBase{0.05, -0.02, 0.10};
}

Pose scripted_pose(const ScriptOptions& o, double s) {
  const double w = 2.0 * std::numbers::pi / o.period;
  const Vec3 p = kBase + Vec3{o.amplitude * std::sin(w * s), 0.5 * o.amplitude * std::sin(w * s / 1.7),
                              0.25 * o.amplitude * std::sin(w * s / 2.3)};
  const UnitQuat q = UnitQuat::rot_z(o.rot_amplitude * std::sin(w * s / 1.3)) *
                     UnitQuat::rot_x(0.5 * o.rot_amplitude * std::sin(w * s / 1.9));
  return {p, q};
}

TraceFile scripted_trace(const ScriptOptions& o) {
  if (!(o.rate > 0.0) || !(o.period > 0.0) || o.hold < 0.0 || o.duration < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "invalid script options");
  }
  TraceFile trace;
  const auto n_hold = static_cast<std::size_t>(std::llround(o.hold * o.rate));
  const auto n_move = static_cast<std::size_t>(std::llround(o.duration * o.rate));
  const Pose start = scripted_pose(o, 0.0);

  trace.records.emplace_back(GestureRecord{0.0, GestureLabel::Ring});
  for (std::size_t i = 0; i <= n_hold + n_move; ++i) {
    const double t = static_cast<double>(i) / o.rate;
    const bool holding = i < n_hold;
    if (i == n_hold) trace.records.emplace_back(GestureRecord{t, GestureLabel::None});
    const double s = t - static_cast<double>(n_hold) / o.rate;
    HandRecord h{t, holding ? start : scripted_pose(o, s), std::nullopt, o.finger_dist};
    if (o.landmarks) {
      h.landmarks = synth_frame(holding ? GestureLabel::Ring : GestureLabel::None, o.seed + i).landmarks;
    }
    trace.records.emplace_back(std::move(h));
  }
  return trace;
}

}  // namespace glovelink
