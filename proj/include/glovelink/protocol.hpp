#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "glovelink/geometry.hpp"
#include "glovelink/handmodel.hpp"
#include "glovelink/teleop.hpp"

namespace glovelink::wire {

inline constexpr int kVersion = 1;

// Every frame is a JSON object {"v": 1, "type": <name>, ...}.

struct Hello {
  std::optional<std::string> client;  // free-form client name
  bool operator==(const Hello&) const = default;
};

struct HandInput {
  double t = 0.0;
  Vec3 pos;
  UnitQuat quat;
  double finger_dist = 0.0;
  std::optional<Landmarks> landmarks;
  bool operator==(const HandInput&) const = default;
};

/// Sustained raw gesture from the operator's keys; null clears it.
struct GestureOverride {
  std::optional<GestureLabel> label;
  bool operator==(const GestureOverride&) const = default;
};

struct RobotState {
  double t = 0.0;
  Vec3 pos;
  UnitQuat quat;
  double jaw = 0.0;
  bool clutch = false;
  bool tracking = false;
  bool haptic = false;
  bool energy = false;
  bool at_goal = false;
  GestureLabel gesture = GestureLabel::None;
  bool operator==(const RobotState&) const = default;
};

struct Event {
  TeleopEvent event = TeleopEvent::HapticOn;
  double t = 0.0;
  bool operator==(const Event&) const = default;
};

/// Any subset of fields; `record` starts (true) or stops (false) a session recording.
struct SetConfig {
  std::optional<double> eta;
  std::optional<double> hand_cube;  // "L_h"
  std::optional<double> tip_cube;   // "L_t"
  std::optional<double> latency;
  std::optional<bool> record;
  bool operator==(const SetConfig&) const = default;
};

struct Ack {
  std::string of;  // type of the acknowledged message
  std::optional<std::string> role;  // "operator" | "observer", for hello
  std::optional<nlohmann::json> session;  // settings snapshot
  std::optional<nlohmann::json> summary;  // trial summary when a recording stops
  std::optional<std::string> trace;       // NDJSON trace when a recording stops
  bool operator==(const Ack&) const = default;
};

struct ErrorMsg {
  std::string code;  // e.g. "malformed", "unknown_type", "operator_taken"
  std::string message;
  bool operator==(const ErrorMsg&) const = default;
};

using Message = std::variant<Hello, HandInput, GestureOverride, RobotState, Event, SetConfig, Ack, ErrorMsg>;

std::string_view type_name(const Message& m);

/// Rejected frame; `code()` goes into the error reply.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

nlohmann::json to_json(const Message& m);
/// Throws ProtocolError: "bad_version", "unknown_type", "invalid_field".
Message from_json(const nlohmann::json& j);

std::string serialize(const Message& m);
/// Also throws ProtocolError "malformed" on text that is not a JSON object.
Message parse(std::string_view text);

}  // namespace glovelink::wire
