// Serial reference vs OpenMP kernels. Arg 0 = serial, 1 = parallel.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "glovelink/handmodel.hpp"
#include "glovelink/mlp.hpp"

namespace gl = glovelink;

namespace {

gl::Exec exec_of(const benchmark::State& s) { return s.range(0) ? gl::Exec::Parallel : gl::Exec::Serial; }

struct Batch {
  std::vector<double> x;
  std::vector<int> y;
};

const Batch& batch() {
  static const Batch b = [] {
    Batch out;
    for (const auto& s : gl::synth_dataset({400, 400, 400, 400, 400}, 1)) {
      out.x.insert(out.x.end(), s.features.begin(), s.features.end());
      out.y.push_back(gl::index_of(s.label));
    }
    return out;
  }();
  return b;
}

void BM_LossAndGradient(benchmark::State& state) {
  const auto m = gl::MlpModel::initialized(gl::MlpModel::gesture_architecture(), 1);
  const Batch& b = batch();
  for (auto _ : state) benchmark::DoNotOptimize(gl::loss_and_gradient(m, b.x, b.y, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.y.size()));
}

void BM_PredictLabels(benchmark::State& state) {
  const auto m = gl::MlpModel::initialized(gl::MlpModel::gesture_architecture(), 2);
  const Batch& b = batch();
  for (auto _ : state) benchmark::DoNotOptimize(gl::predict_labels(m, b.x, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.y.size()));
}

void BM_SynthDataset(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(gl::synth_dataset({200, 200, 200, 200, 200}, 3, {}, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * 1000);
}

void BM_PredictOne(benchmark::State& state) {
  const auto m = gl::MlpModel::initialized(gl::MlpModel::gesture_architecture(), 4);
  const gl::FeatureVector f = gl::synth_dataset({1, 0, 0, 0, 0}, 5)[0].features;
  for (auto _ : state) benchmark::DoNotOptimize(gl::predict(m, f));
}

}  // namespace

BENCHMARK(BM_LossAndGradient)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictLabels)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SynthDataset)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictOne)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
