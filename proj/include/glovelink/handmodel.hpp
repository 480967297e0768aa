#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "glovelink/geometry.hpp"

namespace glovelink {

/// Selects the serial reference or the OpenMP kernel for data-parallel loops.
enum class Exec { Serial, Parallel };

inline constexpr int kNumLandmarks = 21;
inline constexpr int kNumFeatures = 7 * kNumLandmarks;  // 147
inline constexpr int kNumGestures = 5;

// 21-point hand skeleton: wrist=0, thumb 1-4, index 5-8, middle 9-12,
// ring 13-16, pinky 17-20. Tips are the last index of each chain.
namespace landmark {
inline constexpr int kWrist = 0;
inline constexpr int kThumbTip = 4;
inline constexpr int kIndexMcp = 5;
inline constexpr int kIndexTip = 8;
inline constexpr int kMiddleMcp = 9;
inline constexpr int kMiddleTip = 12;
inline constexpr int kRingMcp = 13;
inline constexpr int kRingTip = 16;
inline constexpr int kPinkyMcp = 17;
inline constexpr int kPinkyTip = 20;
}  // namespace landmark

enum class GestureLabel : int { None = 0, Pinky = 1, Ring = 2, Fist = 3, ThumbsUp = 4 };

std::string_view to_string(GestureLabel g);
std::optional<GestureLabel> parse_gesture(std::string_view name);
inline int index_of(GestureLabel g) { return static_cast<int>(g); }
GestureLabel gesture_from_index(int i);

using Landmarks = std::array<Pose, kNumLandmarks>;

struct HandFrame {
  double timestamp = 0.0;
  Pose hand_pose;       // tracker H in base S
  Landmarks landmarks;  // wrist-relative
};

/// Layout: landmark k occupies [7k, 7k+7) as (px, py, pz, qw, qx, qy, qz).
using FeatureVector = std::array<double, kNumFeatures>;

struct LabeledSample {
  FeatureVector features{};
  GestureLabel label = GestureLabel::None;
};

FeatureVector feature_vector(const HandFrame& h);
FeatureVector feature_vector(const Landmarks& landmarks);

/// Thumb tip to index tip distance (meters).
double finger_distance(const HandFrame& h);
double finger_distance(const Landmarks& landmarks);

struct SynthParams {
  double joint_sigma_deg = 4.0;
  double position_sigma = 0.002;  // meters
  // Both noise sources are truncated at this many standard deviations so
  // every sample keeps its gesture's geometric predicate.
  double clip_sigmas = 2.0;
};

/// Noise-free template hand for a gesture.
Landmarks gesture_template(GestureLabel g);

HandFrame synth_frame(GestureLabel g, std::uint64_t seed, const SynthParams& params = {});

/// The geometric predicate a generated hand must satisfy for its label.
bool satisfies_gesture_predicate(GestureLabel g, const Landmarks& landmarks);

using ClassCounts = std::array<std::size_t, kNumGestures>;

/// Default training-set shape: one tenth of the recorded set sizes.
inline constexpr ClassCounts kDefaultTrainCounts{2074, 1283, 2501, 1674, 1945};
inline constexpr ClassCounts kDefaultTestCounts{416, 249, 507, 344, 377};
inline constexpr ClassCounts kFullTrainCounts{20743, 12833, 25011, 16738, 19447};
inline constexpr ClassCounts kFullTestCounts{4167, 2493, 5075, 3445, 3775};

std::vector<LabeledSample> synth_dataset(const ClassCounts& counts, std::uint64_t seed,
                                         const SynthParams& params = {},
                                         Exec exec = Exec::Parallel);

ClassCounts class_histogram(const std::vector<LabeledSample>& data);

}  // namespace glovelink
