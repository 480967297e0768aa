#include "glovelink/protocol.hpp"

#include <cmath>

namespace glovelink::wire {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw ProtocolError("invalid_field", what); }

const json& field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) invalid(std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) invalid(std::string("'") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) invalid(std::string("'") + key + "' must be finite");
  return d;
}

std::optional<double> opt_number(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return number(j, key);
}

bool boolean(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_boolean()) invalid(std::string("'") + key + "' must be a boolean");
  return v.get<bool>();
}

std::string string(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) invalid(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, std::size_t n, const std::string& what) {
  if (!v.is_array() || v.size() != n) invalid(what + " must have " + std::to_string(n) + " numbers");
  std::vector<double> out;
  out.reserve(n);
  for (const json& x : v) {
    if (!x.is_number()) invalid(what + " must have " + std::to_string(n) + " numbers");
    const double d = x.get<double>();
    if (!std::isfinite(d)) invalid(what + " must be finite");
    out.push_back(d);
  }
  return out;
}

Vec3 vec3(const json& j, const char* key) {
  const auto p = numbers(field(j, key), 3, key);
  return {p[0], p[1], p[2]};
}

UnitQuat quat(const json& j, const char* key) {
  const auto q = numbers(field(j, key), 4, key);
  if (q[0] == 0.0 && q[1] == 0.0 && q[2] == 0.0 && q[3] == 0.0) invalid("quat must be nonzero");
  return {q[0], q[1], q[2], q[3]};
}

json vec3_json(const Vec3& p) { return json::array({p.x, p.y, p.z}); }
json quat_json(const UnitQuat& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

GestureLabel gesture(const json& v) {
  if (!v.is_string()) invalid("gesture label must be a string");
  const auto g = parse_gesture(v.get<std::string>());
  if (!g) invalid("unknown gesture label '" + v.get<std::string>() + "'");
  return *g;
}

}  // namespace

std::string_view type_name(const Message& m) {
  static constexpr std::string_view names[] = {"hello", "hand_input", "gesture_override", "robot_state",
                                               "event", "set_config", "ack",              "error"};
  return names[m.index()];
}

json to_json(const Message& m) {
  json j{{"v", kVersion}, {"type", type_name(m)}};
  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, Hello>) {
          if (msg.client) j["client"] = *msg.client;
        } else if constexpr (std::is_same_v<T, HandInput>) {
          j["t"] = msg.t;
          j["pos"] = vec3_json(msg.pos);
          j["quat"] = quat_json(msg.quat);
          j["finger_dist"] = msg.finger_dist;
          if (msg.landmarks) {
            json lm = json::array();
            for (const Pose& p : *msg.landmarks) {
              lm.push_back({p.position.x, p.position.y, p.position.z, p.orientation.w(), p.orientation.x(),
                            p.orientation.y(), p.orientation.z()});
            }
            j["landmarks"] = std::move(lm);
          }
        } else if constexpr (std::is_same_v<T, GestureOverride>) {
          j["label"] = msg.label ? json(std::string(to_string(*msg.label))) : json(nullptr);
        } else if constexpr (std::is_same_v<T, RobotState>) {
          j["t"] = msg.t;
          j["pos"] = vec3_json(msg.pos);
          j["quat"] = quat_json(msg.quat);
          j["jaw"] = msg.jaw;
          j["clutch"] = msg.clutch;
          j["tracking"] = msg.tracking;
          j["haptic"] = msg.haptic;
          j["energy"] = msg.energy;
          j["at_goal"] = msg.at_goal;
          j["gesture"] = std::string(to_string(msg.gesture));
        } else if constexpr (std::is_same_v<T, Event>) {
          j["event"] = std::string(to_string(msg.event));
          j["t"] = msg.t;
        } else if constexpr (std::is_same_v<T, SetConfig>) {
          if (msg.eta) j["eta"] = *msg.eta;
          if (msg.hand_cube) j["L_h"] = *msg.hand_cube;
          if (msg.tip_cube) j["L_t"] = *msg.tip_cube;
          if (msg.latency) j["latency"] = *msg.latency;
          if (msg.record) j["record"] = *msg.record;
        } else if constexpr (std::is_same_v<T, Ack>) {
          j["of"] = msg.of;
          if (msg.role) j["role"] = *msg.role;
          if (msg.session) j["session"] = *msg.session;
          if (msg.summary) j["summary"] = *msg.summary;
          if (msg.trace) j["trace"] = *msg.trace;
        } else {
          j["code"] = msg.code;
          j["message"] = msg.message;
        }
      },
      m);
  return j;
}

Message from_json(const json& j) {
  if (!j.is_object()) throw ProtocolError("malformed", "frame must be a JSON object");
  const auto v = j.find("v");
  if (v == j.end() || !v->is_number_integer() || v->get<int>() != kVersion) {
    throw ProtocolError("bad_version", "expected \"v\": 1");
  }
  const auto t = j.find("type");
  if (t == j.end() || !t->is_string()) throw ProtocolError("unknown_type", "missing \"type\"");
  const std::string type = t->get<std::string>();

  if (type == "hello") {
    Hello h;
    if (j.contains("client") && !j["client"].is_null()) h.client = string(j, "client");
    return h;
  }
  if (type == "hand_input") {
    HandInput h{number(j, "t"), vec3(j, "pos"), quat(j, "quat"), number(j, "finger_dist"), std::nullopt};
    if (j.contains("landmarks") && !j["landmarks"].is_null()) {
      const json& lm = j["landmarks"];
      if (!lm.is_array() || lm.size() != kNumLandmarks) invalid("landmarks must have 21 rows");
      Landmarks out{};
      for (int k = 0; k < kNumLandmarks; ++k) {
        const auto r = numbers(lm[k], 7, "landmark row");
        out[k].position = {r[0], r[1], r[2]};
        out[k].orientation = {r[3], r[4], r[5], r[6]};
      }
      h.landmarks = out;
    }
    return h;
  }
  if (type == "gesture_override") {
    GestureOverride g;
    const json& label = field(j, "label");
    if (!label.is_null()) g.label = gesture(label);
    return g;
  }
  if (type == "robot_state") {
    RobotState s;
    s.t = number(j, "t");
    s.pos = vec3(j, "pos");
    s.quat = quat(j, "quat");
    s.jaw = number(j, "jaw");
    s.clutch = boolean(j, "clutch");
    s.tracking = boolean(j, "tracking");
    s.haptic = boolean(j, "haptic");
    s.energy = j.contains("energy") ? boolean(j, "energy") : false;
    s.at_goal = boolean(j, "at_goal");
    s.gesture = j.contains("gesture") ? gesture(j["gesture"]) : GestureLabel::None;
    return s;
  }
  if (type == "event") {
    const std::string name = string(j, "event");
    const auto e = parse_event(name);
    if (!e) invalid("unknown event '" + name + "'");
    return Event{*e, number(j, "t")};
  }
  if (type == "set_config") {
    SetConfig c;
    c.eta = opt_number(j, "eta");
    c.hand_cube = opt_number(j, "L_h");
    c.tip_cube = opt_number(j, "L_t");
    c.latency = opt_number(j, "latency");
    if (j.contains("record") && !j["record"].is_null()) c.record = boolean(j, "record");
    return c;
  }
  if (type == "ack") {
    Ack a;
    a.of = string(j, "of");
    if (j.contains("role")) a.role = string(j, "role");
    if (j.contains("session")) a.session = j["session"];
    if (j.contains("summary")) a.summary = j["summary"];
    if (j.contains("trace")) a.trace = string(j, "trace");
    return a;
  }
  if (type == "error") return ErrorMsg{string(j, "code"), string(j, "message")};
  throw ProtocolError("unknown_type", "unknown message type '" + type + "'");
}

std::string serialize(const Message& m) { return to_json(m).dump(); }

Message parse(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ProtocolError("malformed", e.what());
  }
  return from_json(j);
}

}  // namespace glovelink::wire
