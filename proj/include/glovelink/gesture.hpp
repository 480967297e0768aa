#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "glovelink/handmodel.hpp"
#include "glovelink/mlp.hpp"

namespace glovelink {

struct TrainConfig {
  int max_epochs = 100;
  int batch_size = 64;
  double learning_rate = 1e-2;
  std::uint64_t seed = 0;
  // Stop once the epoch loss has not improved by `tolerance` for `patience` epochs.
  double tolerance = 1e-4;
  int patience = 10;
  // Training normally refuses a dataset that lacks a class.
  bool allow_missing_classes = false;
  Exec exec = Exec::Parallel;
};

struct TrainStats {
  int epochs_run = 0;
  std::vector<double> epoch_loss;  // mean training cross-entropy after each epoch
};

/// Mini-batch gradient descent on cross-entropy for the 147-40-25-5 classifier.
/// Throws EmptyClass / NonFinite.
MlpModel train(const std::vector<LabeledSample>& data, const TrainConfig& cfg,
               TrainStats* stats = nullptr);

/// Same loop on an arbitrary architecture (used for reduced test networks).
MlpModel train(const std::vector<LabeledSample>& data, const TrainConfig& cfg,
               std::vector<int> sizes, TrainStats* stats);

struct EvalReport {
  double accuracy = 0.0;
  double f1_weighted = 0.0;
  double recall_weighted = 0.0;
  std::array<std::array<std::size_t, kNumGestures>, kNumGestures> confusion{};  // [true][pred]
  double latency_mean_ms = 0.0;
  double latency_std_ms = 0.0;
  std::size_t samples = 0;
};

/// Metrics derived from a confusion matrix (latency fields left zero).
EvalReport metrics_from_confusion(
    const std::array<std::array<std::size_t, kNumGestures>, kNumGestures>& confusion);

/// Classification metrics plus single-sample inference timing over
/// `timing_trials` calls. Throws EmptyTestSet.
EvalReport evaluate(const MlpModel& m, const std::vector<LabeledSample>& test,
                    std::size_t timing_trials = 1000);

/// Stabilizes per-frame predictions by majority over the last 7 frames.
class PredictionWindow {
 public:
  static constexpr int kLength = 7;

  PredictionWindow() { reset(); }

  /// Records the most probable gesture of `probs`, returns the stabilized label.
  GestureLabel push(const std::array<double, kNumGestures>& probs);
  /// Records a one-hot row for `g` directly.
  GestureLabel push(GestureLabel g);

  GestureLabel current() const;
  const std::array<int, kNumGestures>& column_sums() const { return sums_; }
  void reset();

 private:
  std::array<int, kLength> rows_{};  // label index per row, -1 while unfilled
  std::array<int, kNumGestures> sums_{};
  int next_ = 0;
};

}  // namespace glovelink
