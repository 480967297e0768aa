#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <omp.h>

#include "glovelink/error.hpp"
#include "glovelink/mlp.hpp"

using namespace glovelink;

namespace {

struct Batch {
  std::vector<double> x;
  std::vector<int> y;
};

Batch random_batch(int n, int in, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> c(0, classes - 1);
  Batch b;
  for (int i = 0; i < n * in; ++i) b.x.push_back(g(rng));
  for (int i = 0; i < n; ++i) b.y.push_back(c(rng));
  return b;
}

// Independent forward pass: plain loops, ReLU, log-sum-exp softmax.
double reference_loss(const MlpModel& m, const Batch& b) {
  const int in = m.input_size();
  const std::size_t n = b.y.size();
  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> a(b.x.begin() + s * in, b.x.begin() + (s + 1) * in);
    for (std::size_t l = 0; l < m.layers().size(); ++l) {
      const DenseLayer& L = m.layers()[l];
      std::vector<double> z(L.out);
      for (int r = 0; r < L.out; ++r) {
        z[r] = L.bias[r];
        for (int c = 0; c < L.in; ++c) z[r] += L.w(r, c) * a[c];
        if (l + 1 < m.layers().size()) z[r] = std::max(0.0, z[r]);
      }
      a = z;
    }
    const double mx = *std::max_element(a.begin(), a.end());
    double se = 0.0;
    for (double v : a) se += std::exp(v - mx);
    total += -(a[b.y[s]] - mx - std::log(se));
  }
  return total / static_cast<double>(n);
}

double max_rel_diff(const Gradients& a, const Gradients& b) {
  double worst = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    for (std::size_t i = 0; i < a[l].weights.size(); ++i) {
      const double d = std::abs(a[l].weights[i] - b[l].weights[i]);
      worst = std::max(worst, d / std::max(1e-300, std::max(std::abs(a[l].weights[i]), std::abs(b[l].weights[i]))));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("gesture architecture shapes") {
  const MlpModel m = MlpModel::initialized(MlpModel::gesture_architecture(), 1);
  REQUIRE(m.layers().size() == 3);
  CHECK(m.layers()[0].out == 40);
  CHECK(m.layers()[0].in == 147);
  CHECK(m.layers()[1].out == 25);
  CHECK(m.layers()[1].in == 40);
  CHECK(m.layers()[2].out == 5);
  CHECK(m.layers()[2].in == 25);
  CHECK(m.parameter_count() == 40 * 147 + 40 + 25 * 40 + 25 + 5 * 25 + 5);
}

TEST_CASE("glorot initialization is bounded and seeded") {
  const MlpModel a = MlpModel::initialized({147, 40, 25, 5}, 9);
  const MlpModel b = MlpModel::initialized({147, 40, 25, 5}, 9);
  const MlpModel c = MlpModel::initialized({147, 40, 25, 5}, 10);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  for (const auto& L : a.layers()) {
    const double bound = std::sqrt(6.0 / (L.in + L.out));
    for (double w : L.weights) CHECK(std::abs(w) <= bound);
  }
}

TEST_CASE("zero network predicts the uniform distribution") {
  const MlpModel m(MlpModel::gesture_architecture());
  FeatureVector f{};
  f[3] = 1.0;
  for (double p : predict(m, f)) CHECK(p == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("softmax outputs sum to one") {
  const MlpModel m = MlpModel::initialized(MlpModel::gesture_architecture(), 4);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    FeatureVector f;
    for (double& v : f) v = g(rng);
    const auto p = predict(m, f);
    worst = std::max(worst, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
    for (double v : p) CHECK(v >= 0.0);
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("loss matches an independent forward pass") {
  const MlpModel m = MlpModel::initialized({6, 4, 3, 5}, 2);
  const Batch b = random_batch(20, 6, 5, 3);
  CHECK(loss_and_gradient(m, b.x, b.y, Exec::Serial).loss == doctest::Approx(reference_loss(m, b)).epsilon(1e-12));
  CHECK(mean_loss(m, b.x, b.y) == doctest::Approx(reference_loss(m, b)).epsilon(1e-12));
}

TEST_CASE("analytic gradient agrees with central differences") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    MlpModel m = MlpModel::initialized({6, 4, 3, 5}, seed);
    const Batch b = random_batch(16, 6, 5, seed + 100);
    const LossGradient lg = loss_and_gradient(m, b.x, b.y, Exec::Serial);
    const double h = 1e-6;
    double worst = 0.0;
    for (std::size_t l = 0; l < m.layers().size(); ++l) {
      auto check = [&](std::vector<double>& params, const std::vector<double>& analytic) {
        for (std::size_t i = 0; i < params.size(); ++i) {
          const double saved = params[i];
          params[i] = saved + h;
          const double up = reference_loss(m, b);
          params[i] = saved - h;
          const double down = reference_loss(m, b);
          params[i] = saved;
          const double numeric = (up - down) / (2 * h);
          const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
          worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
        }
      };
      check(m.layers()[l].weights, lg.grad[l].weights);
      check(m.layers()[l].bias, lg.grad[l].bias);
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("parallel gradient matches the serial reference") {
  const MlpModel m = MlpModel::initialized(MlpModel::gesture_architecture(), 5);
  const Batch b = random_batch(300, 147, 5, 6);
  const LossGradient s = loss_and_gradient(m, b.x, b.y, Exec::Serial);
  const LossGradient p = loss_and_gradient(m, b.x, b.y, Exec::Parallel);
  CHECK(std::abs(s.loss - p.loss) <= 1e-12 * std::abs(s.loss));
  CHECK(max_rel_diff(s.grad, p.grad) < 1e-9);
}

TEST_CASE("parallel gradient is independent of the thread count") {
  const MlpModel m = MlpModel::initialized(MlpModel::gesture_architecture(), 7);
  const Batch b = random_batch(257, 147, 5, 8);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const LossGradient one = loss_and_gradient(m, b.x, b.y, Exec::Parallel);
  omp_set_num_threads(4);
  const LossGradient four = loss_and_gradient(m, b.x, b.y, Exec::Parallel);
  omp_set_num_threads(saved);
  CHECK(one.loss == four.loss);
  for (std::size_t l = 0; l < one.grad.size(); ++l) {
    CHECK(one.grad[l].weights == four.grad[l].weights);
    CHECK(one.grad[l].bias == four.grad[l].bias);
  }
}

TEST_CASE("batch prediction: serial and parallel agree") {
  const MlpModel m = MlpModel::initialized(MlpModel::gesture_architecture(), 11);
  const Batch b = random_batch(1000, 147, 5, 12);
  CHECK(predict_labels(m, b.x, Exec::Serial) == predict_labels(m, b.x, Exec::Parallel));
  const auto labels = predict_labels(m, b.x, Exec::Serial);
  for (int i = 0; i < 10; ++i) {
    CHECK(labels[i] == argmax(predict(m, std::span<const double>(b.x).subspan(i * 147, 147))));
  }
}

TEST_CASE("argmax ties go to the lowest index") {
  const std::vector<double> v{0.1, 0.4, 0.4, 0.1};
  CHECK(argmax(v) == 1);
}

TEST_CASE("model text round trip is exact") {
  const MlpModel m = MlpModel::initialized(MlpModel::gesture_architecture(), 13);
  std::stringstream ss;
  write_model(ss, m);
  CHECK(read_model(ss) == m);
}

TEST_CASE("model reader errors") {
  std::stringstream wrong("glovelink-mlp v2\n2 1\n0 0\n0\n");
  CHECK_THROWS_AS(read_model(wrong), Error);
  try {
    std::stringstream again("glovelink-mlp v2\n");
    read_model(again);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaVersionMismatch);
  }

  const MlpModel m = MlpModel::initialized({3, 2}, 1);
  std::stringstream ss;
  write_model(ss, m);
  std::string text = ss.str();
  // Corrupt the second weight row (line 4).
  std::vector<std::string> lines;
  std::stringstream split(text);
  for (std::string l; std::getline(split, l);) lines.push_back(l);
  lines[3] = "1.0 oops";
  std::string bad;
  for (const auto& l : lines) bad += l + "\n";
  std::stringstream in(bad);
  try {
    read_model(in);
    FAIL("expected MalformedLine");
  } catch (const MalformedLine& e) {
    CHECK(e.line() == 4);
  }
}
