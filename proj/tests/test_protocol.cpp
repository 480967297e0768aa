#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "glovelink/protocol.hpp"

using namespace glovelink;
using namespace glovelink::wire;
namespace fs = std::filesystem;

namespace {

const fs::path kCorpus = fs::path(GLOVELINK_TEST_DATA) / "protocol";

std::string read_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

std::string code_of(std::string_view text) {
  try {
    parse(text);
  } catch (const ProtocolError& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("golden corpus: serialize(parse(x)) == x for every type") {
  std::set<std::string> types;
  int files = 0;
  for (const auto& entry : fs::directory_iterator(kCorpus)) {
    if (entry.path().filename() == "invalid.json") continue;
    const std::string text = read_line(entry.path());
    CAPTURE(entry.path().filename().string());
    const Message m = parse(text);
    CHECK(serialize(m) == text);
    CHECK(parse(serialize(m)) == m);
    types.insert(std::string(type_name(m)));
    ++files;
  }
  CHECK(files >= 8);
  CHECK(types == std::set<std::string>{"hello", "hand_input", "gesture_override", "robot_state", "event",
                                       "set_config", "ack", "error"});
}

TEST_CASE("golden corpus: decoded field values") {
  const auto hi = std::get<HandInput>(parse(read_line(kCorpus / "hand_input.json")));
  CHECK(hi.t == 12.5);
  CHECK(hi.pos == Vec3{0.05, -0.02, 0.1});
  CHECK(rotation_distance(hi.quat, UnitQuat::rot_z(std::numbers::pi / 2)) < 1e-12);
  CHECK(hi.finger_dist == 0.04);
  CHECK_FALSE(hi.landmarks);

  const auto lm = std::get<HandInput>(parse(read_line(kCorpus / "hand_input_landmarks.json")));
  REQUIRE(lm.landmarks);
  CHECK((*lm.landmarks)[20].position.x == doctest::Approx(0.2));

  CHECK(std::get<GestureOverride>(parse(read_line(kCorpus / "gesture_override.json"))).label == GestureLabel::Fist);
  CHECK_FALSE(std::get<GestureOverride>(parse(read_line(kCorpus / "gesture_override_clear.json"))).label);

  const auto rs = std::get<RobotState>(parse(read_line(kCorpus / "robot_state.json")));
  CHECK(rs.tracking);
  CHECK(rs.energy);
  CHECK_FALSE(rs.clutch);
  CHECK(rs.gesture == GestureLabel::Pinky);

  const auto ev = std::get<Event>(parse(read_line(kCorpus / "event.json")));
  CHECK(ev.event == TeleopEvent::ClutchEngaged);
  CHECK(ev.t == 7.125);

  const auto sc = std::get<SetConfig>(parse(read_line(kCorpus / "set_config.json")));
  CHECK(sc.eta == 0.25);
  CHECK(sc.hand_cube == 0.4);
  CHECK(sc.tip_cube == 0.1);
  CHECK(sc.latency == 0.2);
  CHECK_FALSE(sc.record);
  CHECK(std::get<SetConfig>(parse(read_line(kCorpus / "set_config_record.json"))).record == true);

  const auto ack = std::get<Ack>(parse(read_line(kCorpus / "ack_record.json")));
  CHECK(ack.of == "set_config");
  REQUIRE(ack.summary);
  CHECK(ack.summary->at("samples") == 1200);
  REQUIRE(ack.trace);
  CHECK(ack.trace->back() == '\n');
}

TEST_CASE("invalid frames map to error codes") {
  std::ifstream in(kCorpus / "invalid.json");
  const auto cases = nlohmann::json::parse(in);
  REQUIRE(cases.size() >= 10);
  for (const auto& c : cases) {
    const std::string frame = c.at("frame");
    CAPTURE(frame);
    CHECK(code_of(frame) == c.at("code").get<std::string>());
  }
}

TEST_CASE("robot_state from older peers defaults the optional fields") {
  const auto rs = std::get<RobotState>(parse(
      R"({"v":1,"type":"robot_state","t":1.0,"pos":[0.0,0.0,0.0],"quat":[1.0,0.0,0.0,0.0],)"
      R"("jaw":0.0,"clutch":true,"tracking":false,"haptic":true,"at_goal":true})"));
  CHECK(rs.clutch);
  CHECK_FALSE(rs.energy);
  CHECK(rs.gesture == GestureLabel::None);
}

TEST_CASE("unknown fields are ignored and quaternions are canonicalized") {
  const auto h = std::get<Hello>(parse(R"({"v":1,"type":"hello","client":"x","extra":[1,2]})"));
  CHECK(h.client == "x");

  const auto hi = std::get<HandInput>(parse(
      R"({"v":1,"type":"hand_input","t":0.0,"pos":[0.0,0.0,0.0],"quat":[-2.0,0.0,0.0,0.0],"finger_dist":0.0})"));
  CHECK(hi.quat == UnitQuat{});
  CHECK(serialize(hi).find("[1.0,0.0,0.0,0.0]") != std::string::npos);
}

TEST_CASE("non-finite numbers never reach the wire") {
  HandInput bad;
  bad.t = std::numeric_limits<double>::quiet_NaN();
  // json dumps NaN as null, which the parser rejects.
  CHECK(code_of(serialize(bad)) == "invalid_field");
}
