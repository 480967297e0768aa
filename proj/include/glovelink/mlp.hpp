#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "glovelink/handmodel.hpp"

namespace glovelink {

/// Fully connected layer, weights row-major (out x in).
struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double w(int row, int col) const { return weights[static_cast<std::size_t>(row) * in + col]; }
  bool operator==(const DenseLayer&) const = default;
};

/// Rectifier hidden layers, softmax output.
class MlpModel {
 public:
  MlpModel() = default;
  /// Zero-initialized network with the given layer sizes (>= 2 entries).
  explicit MlpModel(std::vector<int> sizes);

  /// 147 -> 40 -> 25 -> 5.
  static std::vector<int> gesture_architecture() { return {kNumFeatures, 40, 25, kNumGestures}; }

  /// Glorot-uniform initialization, deterministic in `seed`.
  static MlpModel initialized(std::vector<int> sizes, std::uint64_t seed);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  std::size_t parameter_count() const;
  bool finite() const;

  bool operator==(const MlpModel&) const = default;

 private:
  std::vector<int> sizes_;
  std::vector<DenseLayer> layers_;
};

/// Softmax class probabilities for one input row.
std::vector<double> predict(const MlpModel& m, std::span<const double> input);
std::array<double, kNumGestures> predict(const MlpModel& m, const FeatureVector& f);

int argmax(std::span<const double> v);

/// Argmax prediction for every row of `inputs` (n x input_size, row-major).
std::vector<int> predict_labels(const MlpModel& m, std::span<const double> inputs,
                                Exec exec = Exec::Parallel);

/// Same shapes as the model's layers; holds d(loss)/d(parameter).
using Gradients = std::vector<DenseLayer>;

struct LossGradient {
  double loss = 0.0;  // mean cross-entropy over the batch
  Gradients grad;
};

/// Mean cross-entropy and its gradient over a batch.
///
/// Serial is the reference: samples accumulated in order. Parallel splits
/// the batch into a fixed number of chunks, reduces each chunk on its own,
/// then sums the chunk partials in chunk order, so results are bitwise
/// reproducible for any thread count.
LossGradient loss_and_gradient(const MlpModel& m, std::span<const double> inputs,
                               std::span<const int> labels, Exec exec = Exec::Parallel);

/// Mean cross-entropy only.
double mean_loss(const MlpModel& m, std::span<const double> inputs,
                 std::span<const int> labels, Exec exec = Exec::Parallel);

void write_model(std::ostream& os, const MlpModel& m);
MlpModel read_model(std::istream& is);
void save_model(const std::string& path, const MlpModel& m);
MlpModel load_model(const std::string& path);

}  // namespace glovelink
