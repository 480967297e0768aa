#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "glovelink/simpsm.hpp"
#include "glovelink/teleop.hpp"

namespace glovelink {

struct SessionConfig {
  double input_rate = 120.0;      // Hz, hand tracker
  double broadcast_rate = 60.0;   // Hz, robot_state frames
  double classifier_rate = 120.0; // Hz, attempted per input sample

  void validate() const;
};

struct Settings {
  ControlConfig control;
  SimConfig sim;
  SessionConfig session;
};

void to_json(nlohmann::json& j, const ControlConfig& c);
void from_json(const nlohmann::json& j, ControlConfig& c);
void to_json(nlohmann::json& j, const SimConfig& c);
void from_json(const nlohmann::json& j, SimConfig& c);
void to_json(nlohmann::json& j, const SessionConfig& c);
void from_json(const nlohmann::json& j, SessionConfig& c);
void to_json(nlohmann::json& j, const Settings& s);
void from_json(const nlohmann::json& j, Settings& s);

/// Reads a JSON settings file ({"control": {...}, "sim": {...}, "session": {...}});
/// missing keys keep their defaults.
Settings load_settings(const std::string& path);

/// `explicit_path` if given, else $GLOVELINK_CONFIG if set, else defaults.
Settings resolve_settings(const std::optional<std::string>& explicit_path);

}  // namespace glovelink
