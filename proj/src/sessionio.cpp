#include "glovelink/sessionio.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "glovelink/error.hpp"

namespace glovelink {

using nlohmann::json;

namespace {

json pos_json(const Vec3& p) { return json::array({p.x, p.y, p.z}); }
json quat_json(const UnitQuat& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

Vec3 pos_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("pos must have 3 entries");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

UnitQuat quat_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument("quat must have 4 entries");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

void put_pose(json& j, const Pose& p) {
  j["pos"] = pos_json(p.position);
  j["quat"] = quat_json(p.orientation);
}

Pose pose_from(const json& j) { return {pos_from(j.at("pos")), quat_from(j.at("quat"))}; }

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double record_time(const TraceRecord& r) {
  return std::visit([](const auto& rec) { return rec.t; }, r);
}

json record_to_json(const TraceRecord& r) {
  json j;
  std::visit(
      [&](const auto& rec) {
        using T = std::decay_t<decltype(rec)>;
        if constexpr (std::is_same_v<T, HandRecord>) {
          j["type"] = "hand";
          j["t"] = rec.t;
          put_pose(j, rec.pose);
          j["finger_dist"] = rec.finger_dist;
          if (rec.landmarks) {
            json lm = json::array();
            for (const Pose& p : *rec.landmarks) {
              lm.push_back({p.position.x, p.position.y, p.position.z, p.orientation.w(),
                            p.orientation.x(), p.orientation.y(), p.orientation.z()});
            }
            j["landmarks"] = std::move(lm);
          }
        } else if constexpr (std::is_same_v<T, GestureRecord>) {
          j["type"] = "gesture";
          j["t"] = rec.t;
          j["label"] = std::string(to_string(rec.label));
        } else if constexpr (std::is_same_v<T, GoalRecord>) {
          j["type"] = "goal";
          j["t"] = rec.t;
          put_pose(j, rec.pose);
          j["jaw"] = rec.jaw;
        } else if constexpr (std::is_same_v<T, SimStateRecord>) {
          j["type"] = "sim";
          j["t"] = rec.t;
          put_pose(j, rec.pose);
          j["jaw"] = rec.jaw;
          j["at_goal"] = rec.at_goal;
        } else {
          j["type"] = "event";
          j["t"] = rec.t;
          j["event"] = std::string(to_string(rec.event));
        }
      },
      r);
  return j;
}

TraceRecord record_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  const double t = j.at("t").get<double>();
  if (type == "hand") {
    HandRecord h{t, pose_from(j), std::nullopt, j.at("finger_dist").get<double>()};
    if (j.contains("landmarks")) {
      const json& lm = j.at("landmarks");
      if (!lm.is_array() || lm.size() != kNumLandmarks) throw std::invalid_argument("landmarks must have 21 entries");
      Landmarks out{};
      for (int k = 0; k < kNumLandmarks; ++k) {
        const json& row = lm[k];
        if (!row.is_array() || row.size() != 7) throw std::invalid_argument("landmark must have 7 entries");
        out[k].position = {row[0].get<double>(), row[1].get<double>(), row[2].get<double>()};
        out[k].orientation = {row[3].get<double>(), row[4].get<double>(), row[5].get<double>(),
                              row[6].get<double>()};
      }
      h.landmarks = out;
    }
    return h;
  }
  if (type == "gesture") {
    const auto g = parse_gesture(j.at("label").get<std::string>());
    if (!g) throw std::invalid_argument("unknown gesture label");
    return GestureRecord{t, *g};
  }
  if (type == "goal") return GoalRecord{t, pose_from(j), j.at("jaw").get<double>()};
  if (type == "sim") {
    return SimStateRecord{t, pose_from(j), j.at("jaw").get<double>(), j.at("at_goal").get<bool>()};
  }
  if (type == "event") {
    const auto e = parse_event(j.at("event").get<std::string>());
    if (!e) throw std::invalid_argument("unknown event");
    return EventRecord{t, *e};
  }
  throw std::invalid_argument("unknown record type '" + type + "'");
}

void write_trace(std::ostream& os, const TraceFile& trace) {
  json header{{"format", kTraceFormat}, {"version", kTraceVersion}, {"config", trace.config}};
  os << header.dump() << '\n';
  for (const auto& r : trace.records) os << record_to_json(r).dump() << '\n';
}

TraceFile read_trace(std::istream& is) {
  TraceFile trace;
  std::string line;
  if (!std::getline(is, line)) throw MalformedLine(1, "missing trace header");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw MalformedLine(1, e.what());
  }
  if (!header.is_object() || header.value("format", "") != kTraceFormat ||
      !header.contains("version") || !header["version"].is_number_integer()) {
    throw Error(ErrorCode::SchemaVersionMismatch, "not a glovelink-trace file");
  }
  if (header["version"].get<int>() != kTraceVersion) {
    throw Error(ErrorCode::SchemaVersionMismatch,
                "unsupported trace version " + header["version"].dump());
  }
  trace.config = header.value("config", json::object());

  std::array<double, std::variant_size_v<TraceRecord>> last;
  last.fill(-std::numeric_limits<double>::infinity());
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    TraceRecord rec;
    try {
      rec = record_from_json(json::parse(line));
    } catch (const std::exception& e) {
      throw MalformedLine(lineno, e.what());
    }
    const double t = record_time(rec);
    double& prev = last[rec.index()];
    if (!(t >= prev)) throw MalformedLine(lineno, "timestamp goes backwards within its stream");
    prev = t;
    trace.records.push_back(std::move(rec));
  }
  return trace;
}

void save_trace(const std::string& path, const TraceFile& trace) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  write_trace(os, trace);
}

TraceFile load_trace(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path);
  return read_trace(is);
}

void replay(const std::vector<TraceRecord>& records,
            const std::function<void(const TraceRecord&)>& sink, double speed) {
  if (records.empty()) return;
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return record_time(records[a]) < record_time(records[b]);
  });
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const double t0 = record_time(records[order.front()]);
  for (std::size_t i : order) {
    if (speed > 0.0) {
      const auto due = start + std::chrono::duration_cast<clock::duration>(
                                   std::chrono::duration<double>((record_time(records[i]) - t0) / speed));
      std::this_thread::sleep_until(due);
    }
    sink(records[i]);
  }
}

void write_dataset(std::ostream& os, const std::vector<LabeledSample>& data) {
  char name[8];
  for (int k = 0; k < kNumFeatures; ++k) {
    std::snprintf(name, sizeof name, "f%03d", k);
    os << name << ',';
  }
  for (int c = 0; c < kNumGestures; ++c) os << 'g' << c << (c + 1 < kNumGestures ? "," : "\n");
  std::string row;
  for (const auto& s : data) {
    row.clear();
    for (double v : s.features) {
      row += format_double(v);
      row += ',';
    }
    for (int c = 0; c < kNumGestures; ++c) {
      row += c == index_of(s.label) ? '1' : '0';
      row += c + 1 < kNumGestures ? ',' : '\n';
    }
    os << row;
  }
}

std::vector<LabeledSample> read_dataset(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw MalformedLine(1, "missing dataset header");
  if (line.rfind("f000,", 0) != 0) throw MalformedLine(1, "unexpected dataset header");
  std::vector<LabeledSample> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    LabeledSample s;
    const char* p = line.c_str();
    int onehot_at = -1;
    for (int col = 0; col < kNumFeatures + kNumGestures; ++col) {
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p) throw MalformedLine(lineno, "expected a number in column " + std::to_string(col));
      const char expected = col + 1 < kNumFeatures + kNumGestures ? ',' : '\0';
      if (*end != expected) throw MalformedLine(lineno, "bad separator after column " + std::to_string(col));
      if (col < kNumFeatures) {
        s.features[col] = v;
      } else if (v == 1.0) {
        if (onehot_at >= 0) throw MalformedLine(lineno, "label is not one-hot");
        onehot_at = col - kNumFeatures;
      } else if (v != 0.0) {
        throw MalformedLine(lineno, "label is not one-hot");
      }
      p = end + (expected ? 1 : 0);
    }
    if (onehot_at < 0) throw MalformedLine(lineno, "label is not one-hot");
    s.label = gesture_from_index(onehot_at);
    out.push_back(s);
  }
  return out;
}

void save_dataset(const std::string& path, const std::vector<LabeledSample>& data) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  write_dataset(os, data);
}

std::vector<LabeledSample> load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path);
  return read_dataset(is);
}

json to_json(const EvalReport& r) {
  json confusion = json::array();
  for (const auto& row : r.confusion) confusion.push_back(row);
  return {{"accuracy", r.accuracy},
          {"f1_weighted", r.f1_weighted},
          {"recall_weighted", r.recall_weighted},
          {"confusion", confusion},
          {"labels", {"None", "Pinky", "Ring", "Fist", "ThumbsUp"}},
          {"latency_mean_ms", r.latency_mean_ms},
          {"latency_std_ms", r.latency_std_ms},
          {"samples", r.samples}};
}

json to_json(const TrialSummary& s) {
  return {{"duration", s.duration},   {"trans_mean", s.trans_mean}, {"trans_std", s.trans_std},
          {"rot_mean", s.rot_mean},   {"rot_std", s.rot_std},       {"delay", s.delay},
          {"samples", s.samples}};
}

std::string table_csv_header() {
  return "user,avg_duration_s,trans_avg_m,trans_std_m,rot_avg_rad,rot_std_rad";
}

std::string table_csv_row(const std::string& user, const TrialSummary& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%.3f,%.3f,%.3f,%.3f,%.3f", user.c_str(), s.duration,
                s.trans_mean, s.trans_std, s.rot_mean, s.rot_std);
  return buf;
}

}  // namespace glovelink
