#pragma once

#include <cstddef>
#include <deque>
#include <memory>
#include <optional>
#include <string>

#include "glovelink/config.hpp"
#include "glovelink/mlp.hpp"

namespace glovelink {

/// Per-client outbound frames. Robot states are latest-value (a slow
/// client loses intermediate ones); everything else is lossless up to
/// kMaxQueued, past which the client is to be disconnected.
class OutboundQueue {
 public:
  static constexpr std::size_t kMaxQueued = 10000;

  void set_state(std::string frame);
  /// False on overflow (the frame is not queued).
  bool push(std::string frame);
  /// Lossless frames first, then the pending state.
  std::optional<std::string> pop();

  std::size_t queued() const { return frames_.size(); }
  std::size_t dropped_states() const { return dropped_; }

 private:
  std::deque<std::string> frames_;
  std::optional<std::string> state_;
  std::size_t dropped_ = 0;
};

struct GatewayOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 0;  // 0 picks a free port
  Settings settings;
  std::shared_ptr<const MlpModel> model;
  Pose tip_home;
};

/// hand_input receipt to goal submission, measured on the control thread.
struct LatencyStats {
  std::size_t count = 0;
  double mean_ms = 0.0;
  double max_ms = 0.0;
};

/// WebSocket service around one ControlLoop. The first client to say hello
/// is the operator; later ones observe. Network threads only parse frames
/// and hand them to the control thread.
class Gateway {
 public:
  explicit Gateway(GatewayOptions opts);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Binds and starts serving. Throws BindFailure.
  void start();
  /// Idempotent.
  void stop();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();

  unsigned short port() const;
  LatencyStats latency() const;
  std::size_t clients() const;
  std::size_t robot_states_broadcast() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace glovelink
