#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "glovelink/handmodel.hpp"

using namespace glovelink;

namespace {

constexpr GestureLabel kAll[] = {GestureLabel::None, GestureLabel::Pinky, GestureLabel::Ring, GestureLabel::Fist,
                                 GestureLabel::ThumbsUp};

double dist(const Landmarks& l, int a, int b) { return (l[a].position - l[b].position).norm(); }

}  // namespace

TEST_CASE("identity landmarks encode as repeated identity poses") {
  HandFrame h;
  const FeatureVector f = feature_vector(h);
  REQUIRE(f.size() == 147);
  for (int k = 0; k < kNumLandmarks; ++k) {
    const double expect[7] = {0, 0, 0, 1, 0, 0, 0};
    for (int j = 0; j < 7; ++j) CHECK(f[7 * k + j] == expect[j]);
  }
}

TEST_CASE("perturbing one landmark touches only its slice") {
  const HandFrame base = synth_frame(GestureLabel::None, 3);
  HandFrame moved = base;
  moved.landmarks[5].position += Vec3{0.01, -0.02, 0.003};
  moved.landmarks[5].orientation = moved.landmarks[5].orientation * UnitQuat::rot_x(0.2);
  const FeatureVector a = feature_vector(base), b = feature_vector(moved);
  for (int i = 0; i < kNumFeatures; ++i) {
    if (i >= 35 && i < 42) continue;
    CHECK(a[i] == b[i]);
  }
  int changed = 0;
  for (int i = 35; i < 42; ++i) changed += a[i] != b[i];
  CHECK(changed == 7);
}

TEST_CASE("finger distance") {
  HandFrame h;
  CHECK(finger_distance(h) == 0.0);
  h.landmarks[landmark::kThumbTip].position = {0.03, 0, 0};
  h.landmarks[landmark::kIndexTip].position = {0, 0.04, 0};
  CHECK(finger_distance(h) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(finger_distance(gesture_template(GestureLabel::None)) >= 0.07);
}

TEST_CASE("gesture names round trip") {
  for (GestureLabel g : kAll) {
    CHECK(parse_gesture(to_string(g)) == g);
    CHECK(gesture_from_index(index_of(g)) == g);
  }
  CHECK_FALSE(parse_gesture("Peace").has_value());
  CHECK_THROWS_AS(gesture_from_index(5), std::out_of_range);
  CHECK_THROWS_AS(gesture_from_index(-1), std::out_of_range);
}

TEST_CASE("synth_frame is deterministic in its seed") {
  for (GestureLabel g : kAll) {
    const HandFrame a = synth_frame(g, 42), b = synth_frame(g, 42), c = synth_frame(g, 43);
    CHECK(a.landmarks == b.landmarks);
    CHECK(feature_vector(a) == feature_vector(b));
    CHECK_FALSE(a.landmarks == c.landmarks);
  }
}

TEST_CASE("fist closes the pinch, thumbs-up thumb differs from fist") {
  CHECK(finger_distance(synth_frame(GestureLabel::Fist, 9)) < 0.02);
  const Landmarks fist = gesture_template(GestureLabel::Fist);
  const Landmarks up = gesture_template(GestureLabel::ThumbsUp);
  bool thumb_differs = false;
  for (int k = 1; k <= 4; ++k) thumb_differs |= !(fist[k] == up[k]);
  CHECK(thumb_differs);
}

TEST_CASE("every generated sample keeps its gesture predicate") {
  for (GestureLabel g : kAll) {
    CHECK(satisfies_gesture_predicate(g, gesture_template(g)));
    int failures = 0;
    for (std::uint64_t s = 0; s < 1000; ++s) failures += !satisfies_gesture_predicate(g, synth_frame(g, s).landmarks);
    CHECK_MESSAGE(failures == 0, to_string(g));
  }
}

TEST_CASE("predicates are checked independently here as well") {
  // Plain restatement of two predicates on raw landmark distances.
  for (std::uint64_t s = 0; s < 500; ++s) {
    const Landmarks pinky = synth_frame(GestureLabel::Pinky, s).landmarks;
    CHECK(dist(pinky, landmark::kThumbTip, landmark::kPinkyTip) < 0.02);
    const Landmarks fist = synth_frame(GestureLabel::Fist, s).landmarks;
    for (int tip : {landmark::kIndexTip, landmark::kMiddleTip, landmark::kRingTip, landmark::kPinkyTip}) {
      CHECK(dist(fist, tip, tip - 3) < 0.055);
    }
  }
}

TEST_CASE("dataset sizes follow the requested counts") {
  const auto data = synth_dataset(kDefaultTrainCounts, 1);
  CHECK(data.size() == 9477);
  CHECK(class_histogram(data) == kDefaultTrainCounts);
  CHECK(synth_dataset(ClassCounts{}, 1).empty());
  const ClassCounts odd{3, 0, 1, 0, 2};
  CHECK(class_histogram(synth_dataset(odd, 5)) == odd);
}

TEST_CASE("serial and parallel generation are identical") {
  const ClassCounts counts{200, 150, 100, 120, 90};
  const auto a = synth_dataset(counts, 77, {}, Exec::Serial);
  const auto b = synth_dataset(counts, 77, {}, Exec::Parallel);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].label == b[i].label);
    CHECK(a[i].features == b[i].features);
  }
}

TEST_CASE("nearest-centroid classifier separates the classes") {
  const ClassCounts counts{400, 400, 400, 400, 400};
  const auto train = synth_dataset(counts, 100);
  const auto test = synth_dataset(counts, 200);
  std::array<FeatureVector, kNumGestures> centroid{};
  for (const auto& s : train) {
    auto& c = centroid[index_of(s.label)];
    for (int i = 0; i < kNumFeatures; ++i) c[i] += s.features[i] / 400.0;
  }
  int correct = 0;
  for (const auto& s : test) {
    int best = 0;
    double best_d = INFINITY;
    for (int c = 0; c < kNumGestures; ++c) {
      double d = 0;
      for (int i = 0; i < kNumFeatures; ++i) d += std::pow(s.features[i] - centroid[c][i], 2);
      if (d < best_d) best_d = d, best = c;
    }
    correct += best == index_of(s.label);
  }
  CHECK(static_cast<double>(correct) / test.size() >= 0.90);
}
