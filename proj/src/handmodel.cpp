#include "glovelink/handmodel.hpp"

#include <algorithm>
#include <numbers>
#include <random>
#include <stdexcept>

namespace glovelink {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct FingerGeometry {
  int mcp;          // first landmark index of the chain
  Vec3 base;        // MCP position in the wrist frame
  double spread;    // yaw about +z, degrees
  std::array<double, 3> bones;
};

// x: towards the fingers, y: towards the thumb, z: back of the hand.
constexpr std::array<FingerGeometry, 4> kFingers{{
    {landmark::kIndexMcp, {0.090, 0.025, 0.0}, 8.0, {0.040, 0.025, 0.020}},
    {landmark::kMiddleMcp, {0.092, 0.005, 0.0}, 0.0, {0.045, 0.028, 0.021}},
    {landmark::kRingMcp, {0.088, -0.015, 0.0}, -6.0, {0.042, 0.026, 0.020}},
    {landmark::kPinkyMcp, {0.080, -0.033, 0.0}, -12.0, {0.032, 0.020, 0.018}},
}};

constexpr Vec3 kThumbCmc{0.025, 0.020, -0.010};
constexpr Vec3 kThumbBow{0.0, 0.020, -0.015};
constexpr std::array<double, 4> kThumbKnots{0.0, 0.40, 0.72, 1.0};
// Thumb pad sits just palm-side of the fingertip it touches.
constexpr Vec3 kContactOffset{0.0, 0.0, -0.006};

using Flexion = std::array<double, 3>;  // MCP, PIP, DIP in degrees

constexpr Flexion kRelaxed{10.0, 12.0, 6.0};
constexpr Flexion kCurled{85.0, 100.0, 70.0};
constexpr Flexion kHalf{45.0, 50.0, 25.0};
constexpr Flexion kSlight{20.0, 20.0, 10.0};

std::array<Flexion, 4> finger_flexion(GestureLabel g) {
  switch (g) {
    case GestureLabel::None:
      return {kRelaxed, kRelaxed, kRelaxed, kRelaxed};
    case GestureLabel::Pinky:
      return {kRelaxed, kRelaxed, kSlight, kHalf};
    case GestureLabel::Ring:
      return {kRelaxed, kRelaxed, kHalf, kSlight};
    case GestureLabel::Fist:
    case GestureLabel::ThumbsUp:
      return {kCurled, kCurled, kCurled, kCurled};
  }
  throw std::invalid_argument("unknown gesture");
}

/// Truncated-normal jitter source; a null sigma yields zeros.
class Jitter {
 public:
  Jitter(std::uint64_t seed, double clip) : rng_(seed), clip_(clip) {}

  double operator()(double sigma) {
    if (sigma <= 0.0) return 0.0;
    const double v = normal_(rng_);
    return sigma * std::clamp(v, -clip_, clip_);
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  double clip_;
};

UnitQuat align_x_to(const Vec3& dir) {
  const Vec3 d = dir / dir.norm();
  const Vec3 x{1.0, 0.0, 0.0};
  const Vec3 axis = x.cross(d);
  return {1.0 + x.dot(d), axis.x, axis.y, axis.z};
}

Vec3 bezier(const Vec3& p0, const Vec3& p1, const Vec3& p2, double u) {
  const double a = (1.0 - u) * (1.0 - u);
  const double b = 2.0 * (1.0 - u) * u;
  const double c = u * u;
  return p0 * a + p1 * b + p2 * c;
}

Vec3 bezier_tangent(const Vec3& p0, const Vec3& p1, const Vec3& p2, double u) {
  return (p1 - p0) * (2.0 * (1.0 - u)) + (p2 - p1) * (2.0 * u);
}

Landmarks build_hand(GestureLabel g, Jitter* jitter, const SynthParams& params) {
  auto angle = [&](double deg) {
    return (deg + (jitter ? (*jitter)(params.joint_sigma_deg) : 0.0)) * kDeg;
  };
  auto joint_noise = [&]() {
    if (!jitter) return UnitQuat::identity();
    const double abd = (*jitter)(params.joint_sigma_deg) * kDeg;
    const double roll = (*jitter)(params.joint_sigma_deg) * kDeg;
    return UnitQuat::rot_z(abd) * UnitQuat::rot_x(roll);
  };

  Landmarks out{};
  const auto flex = finger_flexion(g);
  for (std::size_t f = 0; f < kFingers.size(); ++f) {
    const FingerGeometry& geo = kFingers[f];
    UnitQuat orient = UnitQuat::rot_z(geo.spread * kDeg);
    Vec3 pos = geo.base;
    for (int j = 0; j < 3; ++j) {
      // Flexion about the joint-local +y bends the bone towards the palm.
      const UnitQuat bend = UnitQuat::rot_y(angle(flex[f][j]));
      const UnitQuat noise = joint_noise();
      orient = orient * bend * noise;
      out[geo.mcp + j] = {pos, orient};
      pos = pos + orient.rotate({geo.bones[j], 0.0, 0.0});
    }
    out[geo.mcp + 3] = {pos, orient};
  }

  Vec3 target;
  switch (g) {
    case GestureLabel::None:
      target = kThumbCmc + Vec3{0.055, 0.060, -0.005};
      break;
    case GestureLabel::ThumbsUp:
      target = kThumbCmc + Vec3{0.025, 0.070, 0.020};
      break;
    case GestureLabel::Fist:
      target = out[landmark::kIndexTip].position + kContactOffset;
      break;
    case GestureLabel::Ring:
      target = out[landmark::kRingTip].position + kContactOffset;
      break;
    case GestureLabel::Pinky:
      target = out[landmark::kPinkyTip].position + kContactOffset;
      break;
  }
  const Vec3 control = kThumbCmc + (target - kThumbCmc) * 0.5 + kThumbBow;
  for (int j = 0; j < 4; ++j) {
    const double u = kThumbKnots[j];
    const Vec3 tangent = bezier_tangent(kThumbCmc, control, target, u);
    out[1 + j] = {bezier(kThumbCmc, control, target, u), align_x_to(tangent) * joint_noise()};
  }

  if (jitter) {
    for (int k = 1; k < kNumLandmarks; ++k) {
      Vec3& p = out[k].position;
      p.x += (*jitter)(params.position_sigma);
      p.y += (*jitter)(params.position_sigma);
      p.z += (*jitter)(params.position_sigma);
    }
  }
  return out;
}

double tip_to_mcp(const Landmarks& lm, int mcp) {
  return distance(lm[mcp + 3].position, lm[mcp].position);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string_view to_string(GestureLabel g) {
  switch (g) {
    case GestureLabel::None: return "None";
    case GestureLabel::Pinky: return "Pinky";
    case GestureLabel::Ring: return "Ring";
    case GestureLabel::Fist: return "Fist";
    case GestureLabel::ThumbsUp: return "ThumbsUp";
  }
  return "None";
}

std::optional<GestureLabel> parse_gesture(std::string_view name) {
  for (int i = 0; i < kNumGestures; ++i) {
    if (to_string(gesture_from_index(i)) == name) return gesture_from_index(i);
  }
  return std::nullopt;
}

GestureLabel gesture_from_index(int i) {
  if (i < 0 || i >= kNumGestures) throw std::out_of_range("gesture index out of range");
  return static_cast<GestureLabel>(i);
}

FeatureVector feature_vector(const Landmarks& landmarks) {
  FeatureVector f{};
  for (int k = 0; k < kNumLandmarks; ++k) {
    const Pose& p = landmarks[k];
    double* slot = f.data() + 7 * k;
    slot[0] = p.position.x;
    slot[1] = p.position.y;
    slot[2] = p.position.z;
    slot[3] = p.orientation.w();
    slot[4] = p.orientation.x();
    slot[5] = p.orientation.y();
    slot[6] = p.orientation.z();
  }
  return f;
}

FeatureVector feature_vector(const HandFrame& h) { return feature_vector(h.landmarks); }

double finger_distance(const Landmarks& landmarks) {
  return distance(landmarks[landmark::kThumbTip].position,
                  landmarks[landmark::kIndexTip].position);
}

double finger_distance(const HandFrame& h) { return finger_distance(h.landmarks); }

Landmarks gesture_template(GestureLabel g) { return build_hand(g, nullptr, {}); }

HandFrame synth_frame(GestureLabel g, std::uint64_t seed, const SynthParams& params) {
  Jitter jitter(seed, params.clip_sigmas);
  HandFrame frame;
  frame.landmarks = build_hand(g, &jitter, params);
  return frame;
}

bool satisfies_gesture_predicate(GestureLabel g, const Landmarks& lm) {
  const double thumb_index = finger_distance(lm);
  const Vec3 thumb = lm[landmark::kThumbTip].position;
  auto all_curled = [&] {
    return std::all_of(kFingers.begin(), kFingers.end(),
                       [&](const FingerGeometry& f) { return tip_to_mcp(lm, f.mcp) < 0.055; });
  };
  switch (g) {
    case GestureLabel::None:
      return thumb_index >= 0.07 &&
             std::all_of(kFingers.begin(), kFingers.end(),
                         [&](const FingerGeometry& f) { return tip_to_mcp(lm, f.mcp) > 0.06; });
    case GestureLabel::Fist:
      return all_curled() && thumb_index < 0.02;
    case GestureLabel::ThumbsUp:
      return all_curled() && thumb_index > 0.05;
    case GestureLabel::Ring:
      return distance(thumb, lm[landmark::kRingTip].position) < 0.02 &&
             tip_to_mcp(lm, landmark::kIndexMcp) > 0.06;
    case GestureLabel::Pinky:
      return distance(thumb, lm[landmark::kPinkyTip].position) < 0.02 &&
             tip_to_mcp(lm, landmark::kIndexMcp) > 0.06;
  }
  return false;
}

std::vector<LabeledSample> synth_dataset(const ClassCounts& counts, std::uint64_t seed,
                                         const SynthParams& params, Exec exec) {
  std::vector<GestureLabel> labels;
  for (int c = 0; c < kNumGestures; ++c) {
    labels.insert(labels.end(), counts[c], gesture_from_index(c));
  }
  std::mt19937_64 shuffle_rng(seed);
  std::shuffle(labels.begin(), labels.end(), shuffle_rng);

  const auto n = static_cast<std::ptrdiff_t>(labels.size());
  std::vector<LabeledSample> out(labels.size());
  auto generate = [&](std::ptrdiff_t i) {
    const std::uint64_t sample_seed = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i)));
    out[i].label = labels[i];
    out[i].features = feature_vector(synth_frame(labels[i], sample_seed, params));
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) generate(i);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) generate(i);
  }
  return out;
}

ClassCounts class_histogram(const std::vector<LabeledSample>& data) {
  ClassCounts h{};
  for (const auto& s : data) ++h[index_of(s.label)];
  return h;
}

}  // namespace glovelink
