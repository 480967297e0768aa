#pragma once

#include <chrono>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "glovelink/analytics.hpp"
#include "glovelink/gesture.hpp"
#include "glovelink/handmodel.hpp"
#include "glovelink/teleop.hpp"

namespace glovelink {

// Trace records. Each stream (record type) is time-ordered within a file.
struct HandRecord {
  double t = 0.0;
  Pose pose;
  std::optional<Landmarks> landmarks;
  double finger_dist = 0.0;
  bool operator==(const HandRecord&) const = default;
};

struct GestureRecord {
  double t = 0.0;
  GestureLabel label = GestureLabel::None;
  bool operator==(const GestureRecord&) const = default;
};

struct GoalRecord {
  double t = 0.0;
  Pose pose;
  double jaw = 0.0;
  bool operator==(const GoalRecord&) const = default;
};

struct SimStateRecord {
  double t = 0.0;
  Pose pose;
  double jaw = 0.0;
  bool at_goal = false;
  bool operator==(const SimStateRecord&) const = default;
};

struct EventRecord {
  double t = 0.0;
  TeleopEvent event = TeleopEvent::HapticOn;
  bool operator==(const EventRecord&) const = default;
};

using TraceRecord = std::variant<HandRecord, GestureRecord, GoalRecord, SimStateRecord, EventRecord>;

double record_time(const TraceRecord& r);

inline constexpr const char* kTraceFormat = "glovelink-trace";
inline constexpr int kTraceVersion = 1;

struct TraceFile {
  nlohmann::json config = nlohmann::json::object();
  std::vector<TraceRecord> records;
};

nlohmann::json record_to_json(const TraceRecord& r);
/// Throws std::invalid_argument on unknown types or missing fields.
TraceRecord record_from_json(const nlohmann::json& j);

void write_trace(std::ostream& os, const TraceFile& trace);
/// Throws SchemaVersionMismatch for foreign or newer files, MalformedLine(n)
/// for a bad line n (1-based, header is line 1).
TraceFile read_trace(std::istream& is);
void save_trace(const std::string& path, const TraceFile& trace);
TraceFile load_trace(const std::string& path);

/// Delivers records in timestamp order. `speed` 0 replays as fast as
/// possible; otherwise record at time t is delivered at
/// start + (t - t0) / speed of wall-clock time.
void replay(const std::vector<TraceRecord>& records, const std::function<void(const TraceRecord&)>& sink,
            double speed = 0.0);

// Dataset CSV: f000..f146 then one-hot g0..g4.
void write_dataset(std::ostream& os, const std::vector<LabeledSample>& data);
std::vector<LabeledSample> read_dataset(std::istream& is);
void save_dataset(const std::string& path, const std::vector<LabeledSample>& data);
std::vector<LabeledSample> load_dataset(const std::string& path);

nlohmann::json to_json(const EvalReport& r);
nlohmann::json to_json(const TrialSummary& s);

/// Per-user results row: avg duration, translational avg/std, rotational avg/std.
std::string table_csv_header();
std::string table_csv_row(const std::string& user, const TrialSummary& s);

}  // namespace glovelink
