#include "glovelink/config.hpp"

#include <cstdlib>
#include <fstream>

#include "glovelink/error.hpp"

namespace glovelink {

namespace {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

void SessionConfig::validate() const {
  if (!(input_rate > 0.0 && broadcast_rate > 0.0 && broadcast_rate <= input_rate &&
        classifier_rate > 0.0 && classifier_rate <= input_rate)) {
    throw Error(ErrorCode::InvalidArgument, "invalid session rates");
  }
}

void to_json(nlohmann::json& j, const ControlConfig& c) {
  j = {{"L_h", c.hand_cube},         {"L_t", c.tip_cube},
       {"ring_hold", c.ring_hold},   {"pinky_debounce", c.pinky_debounce},
       {"finger_open", c.finger_open}, {"finger_closed", c.finger_closed},
       {"jaw_min", c.jaw_min},       {"jaw_max", c.jaw_max},
       {"start_tracking", c.start_tracking}};
}

void from_json(const nlohmann::json& j, ControlConfig& c) {
  read_opt(j, "L_h", c.hand_cube);
  read_opt(j, "L_t", c.tip_cube);
  read_opt(j, "ring_hold", c.ring_hold);
  read_opt(j, "pinky_debounce", c.pinky_debounce);
  read_opt(j, "finger_open", c.finger_open);
  read_opt(j, "finger_closed", c.finger_closed);
  read_opt(j, "jaw_min", c.jaw_min);
  read_opt(j, "jaw_max", c.jaw_max);
  read_opt(j, "start_tracking", c.start_tracking);
  if (j.contains("eta")) c.set_eta(j.at("eta").get<double>());
}

void to_json(nlohmann::json& j, const SimConfig& c) {
  j = {{"v_max", c.v_max},       {"w_max", c.w_max},     {"jaw_rate", c.jaw_rate},
       {"tick_rate", c.tick_rate}, {"latency", c.latency}, {"jaw_min", c.jaw_min},
       {"jaw_max", c.jaw_max}};
}

void from_json(const nlohmann::json& j, SimConfig& c) {
  read_opt(j, "v_max", c.v_max);
  read_opt(j, "w_max", c.w_max);
  read_opt(j, "jaw_rate", c.jaw_rate);
  read_opt(j, "tick_rate", c.tick_rate);
  read_opt(j, "latency", c.latency);
  read_opt(j, "jaw_min", c.jaw_min);
  read_opt(j, "jaw_max", c.jaw_max);
}

void to_json(nlohmann::json& j, const SessionConfig& c) {
  j = {{"input_rate", c.input_rate},
       {"broadcast_rate", c.broadcast_rate},
       {"classifier_rate", c.classifier_rate}};
}

void from_json(const nlohmann::json& j, SessionConfig& c) {
  read_opt(j, "input_rate", c.input_rate);
  read_opt(j, "broadcast_rate", c.broadcast_rate);
  read_opt(j, "classifier_rate", c.classifier_rate);
}

void to_json(nlohmann::json& j, const Settings& s) {
  j = {{"control", s.control}, {"sim", s.sim}, {"session", s.session}};
}

void from_json(const nlohmann::json& j, Settings& s) {
  read_opt(j, "control", s.control);
  read_opt(j, "sim", s.sim);
  read_opt(j, "session", s.session);
}

Settings load_settings(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot open config " + path);
  Settings s;
  try {
    from_json(nlohmann::json::parse(is), s);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "bad config " + path + ": " + e.what());
  }
  s.control.validate();
  s.sim.validate();
  s.session.validate();
  return s;
}

Settings resolve_settings(const std::optional<std::string>& explicit_path) {
  if (explicit_path) return load_settings(*explicit_path);
  if (const char* env = std::getenv("GLOVELINK_CONFIG"); env && *env) return load_settings(env);
  return {};
}

}  // namespace glovelink
