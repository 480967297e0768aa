#include "glovelink/gesture.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <limits>
#include <random>
#include <string>

#include "glovelink/error.hpp"

namespace glovelink {

namespace {

struct FlatData {
  std::vector<double> inputs;
  std::vector<int> labels;
};

FlatData flatten(const std::vector<LabeledSample>& data) {
  FlatData flat;
  flat.inputs.reserve(data.size() * kNumFeatures);
  flat.labels.reserve(data.size());
  for (const auto& s : data) {
    flat.inputs.insert(flat.inputs.end(), s.features.begin(), s.features.end());
    flat.labels.push_back(index_of(s.label));
  }
  return flat;
}

}  // namespace

MlpModel train(const std::vector<LabeledSample>& data, const TrainConfig& cfg,
               TrainStats* stats) {
  return train(data, cfg, MlpModel::gesture_architecture(), stats);
}

MlpModel train(const std::vector<LabeledSample>& data, const TrainConfig& cfg,
               std::vector<int> sizes, TrainStats* stats) {
  if (cfg.max_epochs < 1 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid training configuration");
  }
  if (data.empty()) throw Error(ErrorCode::EmptyClass, "training set is empty");
  const ClassCounts hist = class_histogram(data);
  if (!cfg.allow_missing_classes) {
    for (int c = 0; c < kNumGestures; ++c) {
      if (hist[c] == 0) {
        throw Error(ErrorCode::EmptyClass,
                    "no training samples for gesture " + std::string(to_string(gesture_from_index(c))));
      }
    }
  }

  MlpModel model = MlpModel::initialized(std::move(sizes), cfg.seed);
  if (model.input_size() != kNumFeatures || model.output_size() != kNumGestures) {
    throw Error(ErrorCode::InvalidArgument, "architecture must map 147 features to 5 gestures");
  }
  const FlatData flat = flatten(data);
  const std::size_t n = data.size();

  std::mt19937_64 rng(cfg.seed ^ 0x5eedf00dULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> batch_in;
  std::vector<int> batch_labels;

  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  TrainStats local;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      batch_in.clear();
      batch_labels.clear();
      for (std::size_t i = start; i < end; ++i) {
        const double* row = flat.inputs.data() + order[i] * kNumFeatures;
        batch_in.insert(batch_in.end(), row, row + kNumFeatures);
        batch_labels.push_back(flat.labels[order[i]]);
      }
      const LossGradient lg = loss_and_gradient(model, batch_in, batch_labels, cfg.exec);
      for (std::size_t l = 0; l < model.layers().size(); ++l) {
        DenseLayer& layer = model.layers()[l];
        const DenseLayer& g = lg.grad[l];
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
          layer.weights[i] -= cfg.learning_rate * g.weights[i];
        }
        for (std::size_t i = 0; i < layer.bias.size(); ++i) {
          layer.bias[i] -= cfg.learning_rate * g.bias[i];
        }
      }
    }
    const double loss = mean_loss(model, flat.inputs, flat.labels, cfg.exec);
    if (!std::isfinite(loss) || !model.finite()) {
      throw Error(ErrorCode::NonFinite, "training loss diverged at epoch " + std::to_string(epoch + 1));
    }
    local.epoch_loss.push_back(loss);
    local.epochs_run = epoch + 1;
    if (loss < best - cfg.tolerance) {
      best = loss;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  if (stats) *stats = std::move(local);
  return model;
}

EvalReport metrics_from_confusion(
    const std::array<std::array<std::size_t, kNumGestures>, kNumGestures>& confusion) {
  EvalReport r;
  r.confusion = confusion;
  std::array<std::size_t, kNumGestures> support{};
  std::array<std::size_t, kNumGestures> predicted{};
  std::size_t correct = 0;
  for (int t = 0; t < kNumGestures; ++t) {
    for (int p = 0; p < kNumGestures; ++p) {
      support[t] += confusion[t][p];
      predicted[p] += confusion[t][p];
      r.samples += confusion[t][p];
    }
    correct += confusion[t][t];
  }
  if (r.samples == 0) return r;
  const double total = static_cast<double>(r.samples);
  r.accuracy = static_cast<double>(correct) / total;
  for (int c = 0; c < kNumGestures; ++c) {
    if (support[c] == 0) continue;
    const double tp = static_cast<double>(confusion[c][c]);
    const double recall = tp / static_cast<double>(support[c]);
    const double precision = predicted[c] ? tp / static_cast<double>(predicted[c]) : 0.0;
    const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    const double weight = static_cast<double>(support[c]) / total;
    r.recall_weighted += weight * recall;
    r.f1_weighted += weight * f1;
  }
  return r;
}

EvalReport evaluate(const MlpModel& m, const std::vector<LabeledSample>& test,
                    std::size_t timing_trials) {
  if (test.empty()) throw Error(ErrorCode::EmptyTestSet, "test set is empty");
  const FlatData flat = flatten(test);
  const std::vector<int> pred = predict_labels(m, flat.inputs);
  std::array<std::array<std::size_t, kNumGestures>, kNumGestures> confusion{};
  for (std::size_t i = 0; i < test.size(); ++i) ++confusion[flat.labels[i]][pred[i]];
  EvalReport r = metrics_from_confusion(confusion);

  if (timing_trials > 0) {
    using clock = std::chrono::steady_clock;
    std::vector<double> ms(timing_trials);
    volatile double sink = 0.0;
    for (std::size_t i = 0; i < timing_trials; ++i) {
      const FeatureVector& f = test[i % test.size()].features;
      const auto t0 = clock::now();
      const auto p = predict(m, f);
      const auto t1 = clock::now();
      sink = sink + p[0];
      ms[i] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    const double mean = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
    double var = 0.0;
    for (double v : ms) var += (v - mean) * (v - mean);
    r.latency_mean_ms = mean;
    r.latency_std_ms = std::sqrt(var / static_cast<double>(ms.size()));
  }
  return r;
}

GestureLabel PredictionWindow::push(const std::array<double, kNumGestures>& probs) {
  return push(gesture_from_index(argmax(probs)));
}

GestureLabel PredictionWindow::push(GestureLabel g) {
  const int evicted = rows_[next_];
  if (evicted >= 0) --sums_[evicted];
  rows_[next_] = index_of(g);
  ++sums_[index_of(g)];
  next_ = (next_ + 1) % kLength;
  return current();
}

GestureLabel PredictionWindow::current() const {
  int best = 0;
  for (int c = 1; c < kNumGestures; ++c) {
    if (sums_[c] > sums_[best]) best = c;
  }
  return gesture_from_index(best);
}

void PredictionWindow::reset() {
  rows_.fill(-1);
  sums_.fill(0);
  next_ = 0;
}

}  // namespace glovelink
