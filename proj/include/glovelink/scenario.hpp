#pragma once

#include <cstdint>

#include "glovelink/sessionio.hpp"

namespace glovelink {

/// Scripted operator session: a still Ring hold that switches tracking on,
/// then smooth periodic hand motion with open fingers.
struct ScriptOptions {
  double rate = 120.0;       // Hz
  double hold = 2.2;         // s of Ring at the start
  double duration = 10.0;    // s of motion after the hold
  double amplitude = 0.10;   // m, x sweep; y and z use fractions of it
  double period = 2.0;       // s, x sweep period
  double rot_amplitude = 0.3;  // rad
  double finger_dist = 0.04;   // m
  bool landmarks = false;      // attach synthetic landmarks of the scripted gesture
  std::uint64_t seed = 0;      // landmark noise
};

TraceFile scripted_trace(const ScriptOptions& opts = {});

/// Hand pose of the motion phase at `s` seconds after it starts.
Pose scripted_pose(const ScriptOptions& opts, double s);

}  // namespace glovelink
