#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "glovelink/config.hpp"
#include "glovelink/error.hpp"
#include "glovelink/sessionio.hpp"

using namespace glovelink;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

std::string joined(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + "\n";
  return s;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Io;
}

TraceFile mixed_trace(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> kind(0, 4), label(0, 4), event(0, 7);
  std::uniform_real_distribution<double> step(0.0, 0.01);
  TraceFile tf;
  tf.config = {{"eta", 0.25}, {"note", "mixed"}};
  double t = 0.0;
  for (int i = 0; i < n; ++i) {
    t += step(rng);
    const Pose pose{{g(rng), g(rng), g(rng)}, {g(rng), g(rng), g(rng), g(rng)}};
    switch (kind(rng)) {
      case 0: {
        HandRecord h{t, pose, std::nullopt, std::abs(g(rng))};
        if (i % 3 == 0) {
          Landmarks lm;
          for (Pose& joint : lm) joint = {{g(rng), g(rng), g(rng)}, {g(rng), g(rng), g(rng), g(rng)}};
          h.landmarks = lm;
        }
        tf.records.emplace_back(h);
        break;
      }
      case 1:
        tf.records.emplace_back(GestureRecord{t, gesture_from_index(label(rng))});
        break;
      case 2:
        tf.records.emplace_back(GoalRecord{t, pose, g(rng)});
        break;
      case 3:
        tf.records.emplace_back(SimStateRecord{t, pose, g(rng), g(rng) > 0});
        break;
      default:
        tf.records.emplace_back(EventRecord{t, static_cast<TeleopEvent>(event(rng))});
        break;
    }
  }
  return tf;
}

}  // namespace

TEST_CASE("trace round trip: 1000 mixed records") {
  const TraceFile tf = mixed_trace(1000, 1);
  std::stringstream ss;
  write_trace(ss, tf);
  const TraceFile back = read_trace(ss);
  CHECK(back.config == tf.config);
  REQUIRE(back.records.size() == tf.records.size());
  for (std::size_t i = 0; i < tf.records.size(); ++i) CHECK(back.records[i] == tf.records[i]);

  std::stringstream again;
  write_trace(again, back);
  std::stringstream first;
  write_trace(first, tf);
  CHECK(again.str() == first.str());
}

TEST_CASE("empty trace is a header line only") {
  std::stringstream ss;
  write_trace(ss, {});
  CHECK(lines_of(ss.str()).size() == 1);
  CHECK(read_trace(ss).records.empty());
}

TEST_CASE("trace reader errors") {
  std::stringstream ss;
  write_trace(ss, mixed_trace(20, 2));
  auto lines = lines_of(ss.str());
  auto corrupt = lines;
  corrupt[6] = "{\"type\": \"hand\", \"t\": ";
  std::stringstream bad(joined(corrupt));
  try {
    read_trace(bad);
    FAIL("expected MalformedLine");
  } catch (const MalformedLine& e) {
    CHECK(e.line() == 7);
    CHECK(e.code() == ErrorCode::MalformedLine);
  }

  auto v2 = lines;
  v2[0] = R"({"format":"glovelink-trace","version":2})";
  std::stringstream newer(joined(v2));
  CHECK(code_of([&] { read_trace(newer); }) == ErrorCode::SchemaVersionMismatch);

  std::stringstream foreign("{\"format\":\"something-else\",\"version\":1}\n");
  CHECK(code_of([&] { read_trace(foreign); }) == ErrorCode::SchemaVersionMismatch);

  TraceFile backwards;
  backwards.records.emplace_back(GoalRecord{1.0, {}, 0.0});
  backwards.records.emplace_back(EventRecord{0.5, TeleopEvent::HapticOn});  // other stream: fine
  backwards.records.emplace_back(GoalRecord{0.9, {}, 0.0});
  std::stringstream bw;
  write_trace(bw, backwards);
  try {
    read_trace(bw);
    FAIL("expected MalformedLine");
  } catch (const MalformedLine& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("replay orders records and paces them") {
  std::vector<TraceRecord> recs{GoalRecord{0.20, {}, 0.0}, EventRecord{0.05, TeleopEvent::HapticOn},
                                GestureRecord{0.10, GestureLabel::Fist}, GoalRecord{0.0, {}, 0.0}};
  std::vector<double> seen;
  replay(recs, [&](const TraceRecord& r) { seen.push_back(record_time(r)); });
  CHECK(seen == std::vector<double>{0.0, 0.05, 0.10, 0.20});

  using clock = std::chrono::steady_clock;
  std::vector<double> wall;
  const auto start = clock::now();
  replay(recs, [&](const TraceRecord&) { wall.push_back(std::chrono::duration<double>(clock::now() - start).count()); },
         1.0);
  REQUIRE(wall.size() == 4);
  const std::vector<double> due{0.0, 0.05, 0.10, 0.20};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(wall[i] >= due[i] - 1e-4);
    CHECK(wall[i] <= due[i] + 0.005);
  }

  int calls = 0;
  replay({}, [&](const TraceRecord&) { ++calls; }, 1.0);
  CHECK(calls == 0);
}

TEST_CASE("dataset CSV round trip is exact") {
  const auto data = synth_dataset({7, 6, 5, 4, 3}, 12);
  std::stringstream ss;
  write_dataset(ss, data);
  const auto back = read_dataset(ss);
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back[i].label == data[i].label);
    CHECK(back[i].features == data[i].features);
  }
}

TEST_CASE("dataset reader rejects bad labels") {
  const auto data = synth_dataset({1, 1, 0, 0, 0}, 13);
  std::stringstream ss;
  write_dataset(ss, data);
  auto lines = lines_of(ss.str());
  auto two_hot = lines;
  two_hot[2] = two_hot[2].substr(0, two_hot[2].size() - 9) + "1,1,0,0,0";
  std::stringstream bad(joined(two_hot));
  try {
    read_dataset(bad);
    FAIL("expected MalformedLine");
  } catch (const MalformedLine& e) {
    CHECK(e.line() == 3);
  }
  auto none = lines;
  none[1] = none[1].substr(0, none[1].size() - 9) + "0,0,0,0,0";
  std::stringstream empty_label(joined(none));
  CHECK_THROWS_AS(read_dataset(empty_label), MalformedLine);
}

TEST_CASE("settings JSON round trip and environment lookup") {
  Settings s;
  s.control.hand_cube = 0.3;
  s.control.set_eta(0.35);
  s.sim.latency = 0.123;
  s.session.broadcast_rate = 50.0;
  nlohmann::json j = s;
  const Settings back = j.get<Settings>();
  CHECK(nlohmann::json(back) == j);
  CHECK(back.control.eta() == doctest::Approx(0.35).epsilon(1e-12));
  CHECK(back.sim.latency == 0.123);

  const auto path = std::filesystem::temp_directory_path() / "glovelink_test_settings.json";
  {
    std::ofstream os(path);
    os << R"({"control": {"eta": 0.5}, "sim": {"latency": 0.05}})";
  }
  const Settings partial = load_settings(path.string());
  CHECK(partial.control.eta() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(partial.sim.latency == 0.05);
  CHECK(partial.session.broadcast_rate == SessionConfig{}.broadcast_rate);

  ::setenv("GLOVELINK_CONFIG", path.c_str(), 1);
  CHECK(resolve_settings(std::nullopt).control.eta() == doctest::Approx(0.5).epsilon(1e-12));
  ::unsetenv("GLOVELINK_CONFIG");
  CHECK(resolve_settings(std::nullopt).control.eta() == ControlConfig{}.eta());
  std::filesystem::remove(path);

  CHECK(code_of([] { load_settings("/nonexistent/glovelink.json"); }) == ErrorCode::Io);
}

TEST_CASE("summary JSON and table row") {
  TrialSummary s;
  s.duration = 41.25;
  s.trans_mean = 0.0041;
  s.trans_std = 0.0012;
  s.rot_mean = 0.031;
  s.rot_std = 0.011;
  s.delay = 0.2;
  s.samples = 9;
  const auto j = to_json(s);
  CHECK(j.at("trans_mean") == 0.0041);
  CHECK(j.at("samples") == 9);
  CHECK(table_csv_header() == "user,avg_duration_s,trans_avg_m,trans_std_m,rot_avg_rad,rot_std_rad");
  CHECK(table_csv_row("u1", s) == "u1,41.250,0.004,0.001,0.031,0.011");
}
