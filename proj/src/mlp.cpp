#include "glovelink/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "glovelink/error.hpp"

namespace glovelink {

namespace {

constexpr int kChunks = 16;
constexpr const char* kModelHeader = "glovelink-mlp v1";

/// Per-sample activations; reused across samples by one worker.
struct Workspace {
  std::vector<std::vector<double>> act;    // act[0] unused, act[l+1] = output of layer l
  std::vector<std::vector<double>> delta;  // delta[l] = dLoss/dz for layer l

  explicit Workspace(const MlpModel& m) {
    act.resize(m.layers().size() + 1);
    delta.resize(m.layers().size());
    for (std::size_t l = 0; l < m.layers().size(); ++l) {
      act[l + 1].resize(m.layers()[l].out);
      delta[l].resize(m.layers()[l].out);
    }
  }
};

void softmax_inplace(std::vector<double>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

/// Forward pass; returns a view on the probabilities inside `ws`.
const std::vector<double>& forward(const MlpModel& m, const double* input, Workspace& ws) {
  const auto& layers = m.layers();
  const double* a = input;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    std::vector<double>& z = ws.act[l + 1];
    for (int r = 0; r < layer.out; ++r) {
      const double* wrow = layer.weights.data() + static_cast<std::size_t>(r) * layer.in;
      double acc = layer.bias[r];
      for (int c = 0; c < layer.in; ++c) acc += wrow[c] * a[c];
      z[r] = acc;
    }
    if (l + 1 < layers.size()) {
      for (double& v : z) v = std::max(v, 0.0);
    } else {
      softmax_inplace(z);
    }
    a = z.data();
  }
  return ws.act.back();
}

Gradients zero_like(const MlpModel& m) {
  Gradients g = m.layers();
  for (auto& layer : g) {
    std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
  return g;
}

/// Adds one sample's gradient into `g`; returns its cross-entropy.
double accumulate_sample(const MlpModel& m, const double* input, int label, Workspace& ws,
                         Gradients& g) {
  const auto& layers = m.layers();
  const std::vector<double>& probs = forward(m, input, ws);
  const double loss = -std::log(std::max(probs[label], std::numeric_limits<double>::min()));

  const std::size_t last = layers.size() - 1;
  for (int r = 0; r < layers[last].out; ++r) {
    ws.delta[last][r] = probs[r] - (r == label ? 1.0 : 0.0);
  }
  for (std::size_t l = last + 1; l-- > 0;) {
    const DenseLayer& layer = layers[l];
    const double* a_in = l == 0 ? input : ws.act[l].data();
    DenseLayer& gl = g[l];
    const std::vector<double>& d = ws.delta[l];
    for (int r = 0; r < layer.out; ++r) {
      if (d[r] == 0.0) continue;
      double* grow = gl.weights.data() + static_cast<std::size_t>(r) * layer.in;
      for (int c = 0; c < layer.in; ++c) grow[c] += d[r] * a_in[c];
      gl.bias[r] += d[r];
    }
    if (l == 0) break;
    std::vector<double>& prev = ws.delta[l - 1];
    const std::vector<double>& a_prev = ws.act[l];
    for (int c = 0; c < layer.in; ++c) {
      double acc = 0.0;
      for (int r = 0; r < layer.out; ++r) acc += layer.w(r, c) * d[r];
      prev[c] = a_prev[c] > 0.0 ? acc : 0.0;
    }
  }
  return loss;
}

void add_into(Gradients& dst, const Gradients& src) {
  for (std::size_t l = 0; l < dst.size(); ++l) {
    for (std::size_t i = 0; i < dst[l].weights.size(); ++i) dst[l].weights[i] += src[l].weights[i];
    for (std::size_t i = 0; i < dst[l].bias.size(); ++i) dst[l].bias[i] += src[l].bias[i];
  }
}

void scale(Gradients& g, double s) {
  for (auto& layer : g) {
    for (double& v : layer.weights) v *= s;
    for (double& v : layer.bias) v *= s;
  }
}

void check_batch(const MlpModel& m, std::span<const double> inputs, std::span<const int> labels) {
  if (inputs.size() != labels.size() * static_cast<std::size_t>(m.input_size())) {
    throw Error(ErrorCode::InvalidArgument, "batch shape does not match model input");
  }
}

}  // namespace

MlpModel::MlpModel(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw Error(ErrorCode::InvalidArgument, "MLP needs >= 2 layer sizes");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] <= 0 || sizes_[l + 1] <= 0) {
      throw Error(ErrorCode::InvalidArgument, "layer sizes must be positive");
    }
    DenseLayer layer;
    layer.in = sizes_[l];
    layer.out = sizes_[l + 1];
    layer.weights.assign(static_cast<std::size_t>(layer.in) * layer.out, 0.0);
    layer.bias.assign(layer.out, 0.0);
    layers_.push_back(std::move(layer));
  }
}

MlpModel MlpModel::initialized(std::vector<int> sizes, std::uint64_t seed) {
  MlpModel m(std::move(sizes));
  std::mt19937_64 rng(seed);
  for (auto& layer : m.layers_) {
    const double bound = std::sqrt(6.0 / (layer.in + layer.out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : layer.weights) v = dist(rng);
    for (double& v : layer.bias) v = dist(rng);
  }
  return m;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weights.size() + layer.bias.size();
  return n;
}

bool MlpModel::finite() const {
  for (const auto& layer : layers_) {
    for (double v : layer.weights) if (!std::isfinite(v)) return false;
    for (double v : layer.bias) if (!std::isfinite(v)) return false;
  }
  return true;
}

std::vector<double> predict(const MlpModel& m, std::span<const double> input) {
  if (input.size() != static_cast<std::size_t>(m.input_size())) {
    throw Error(ErrorCode::InvalidArgument, "input size does not match model");
  }
  Workspace ws(m);
  return forward(m, input.data(), ws);
}

std::array<double, kNumGestures> predict(const MlpModel& m, const FeatureVector& f) {
  if (m.output_size() != kNumGestures) {
    throw Error(ErrorCode::InvalidArgument, "model is not a gesture classifier");
  }
  const std::vector<double> p = predict(m, std::span<const double>(f));
  std::array<double, kNumGestures> out{};
  std::copy(p.begin(), p.end(), out.begin());
  return out;
}

int argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::vector<int> predict_labels(const MlpModel& m, std::span<const double> inputs, Exec exec) {
  const std::size_t in = m.input_size();
  const auto n = static_cast<std::ptrdiff_t>(inputs.size() / in);
  std::vector<int> out(n);
  if (exec == Exec::Parallel) {
#pragma omp parallel
    {
      Workspace ws(m);
#pragma omp for schedule(static)
      for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = argmax(forward(m, inputs.data() + i * in, ws));
    }
  } else {
    Workspace ws(m);
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = argmax(forward(m, inputs.data() + i * in, ws));
  }
  return out;
}

LossGradient loss_and_gradient(const MlpModel& m, std::span<const double> inputs,
                               std::span<const int> labels, Exec exec) {
  check_batch(m, inputs, labels);
  const std::size_t in = m.input_size();
  const auto n = static_cast<std::ptrdiff_t>(labels.size());
  LossGradient result{0.0, zero_like(m)};
  if (n == 0) return result;

  if (exec == Exec::Serial) {
    Workspace ws(m);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      result.loss += accumulate_sample(m, inputs.data() + i * in, labels[i], ws, result.grad);
    }
  } else {
    const std::ptrdiff_t chunk = (n + kChunks - 1) / kChunks;
    std::vector<Gradients> partial(kChunks);
    std::vector<double> partial_loss(kChunks, 0.0);
#pragma omp parallel
    {
      Workspace ws(m);
#pragma omp for schedule(static)
      for (int c = 0; c < kChunks; ++c) {
        const std::ptrdiff_t lo = c * chunk;
        const std::ptrdiff_t hi = std::min(n, lo + chunk);
        if (lo >= hi) continue;
        partial[c] = zero_like(m);
        for (std::ptrdiff_t i = lo; i < hi; ++i) {
          partial_loss[c] += accumulate_sample(m, inputs.data() + i * in, labels[i], ws, partial[c]);
        }
      }
    }
    for (int c = 0; c < kChunks; ++c) {
      if (partial[c].empty()) continue;
      add_into(result.grad, partial[c]);
      result.loss += partial_loss[c];
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  result.loss *= inv;
  scale(result.grad, inv);
  return result;
}

double mean_loss(const MlpModel& m, std::span<const double> inputs, std::span<const int> labels,
                 Exec exec) {
  check_batch(m, inputs, labels);
  const std::size_t in = m.input_size();
  const auto n = static_cast<std::ptrdiff_t>(labels.size());
  if (n == 0) return 0.0;
  std::vector<double> per(n);
  auto one = [&](Workspace& ws, std::ptrdiff_t i) {
    const auto& p = forward(m, inputs.data() + i * in, ws);
    per[i] = -std::log(std::max(p[labels[i]], std::numeric_limits<double>::min()));
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel
    {
      Workspace ws(m);
#pragma omp for schedule(static)
      for (std::ptrdiff_t i = 0; i < n; ++i) one(ws, i);
    }
  } else {
    Workspace ws(m);
    for (std::ptrdiff_t i = 0; i < n; ++i) one(ws, i);
  }
  double sum = 0.0;
  for (double v : per) sum += v;
  return sum / static_cast<double>(n);
}

void write_model(std::ostream& os, const MlpModel& m) {
  os << kModelHeader << '\n';
  for (std::size_t i = 0; i < m.sizes().size(); ++i) {
    os << (i ? " " : "") << m.sizes()[i];
  }
  os << '\n' << std::setprecision(17);
  for (const auto& layer : m.layers()) {
    for (int r = 0; r < layer.out; ++r) {
      for (int c = 0; c < layer.in; ++c) os << (c ? " " : "") << layer.w(r, c);
      os << '\n';
    }
    for (int r = 0; r < layer.out; ++r) os << (r ? " " : "") << layer.bias[r];
    os << '\n';
  }
}

MlpModel read_model(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> std::string& {
    if (!std::getline(is, line)) throw MalformedLine(lineno + 1, "unexpected end of model file");
    ++lineno;
    return line;
  };
  auto parse_row = [&](std::size_t expected) {
    std::vector<double> row;
    row.reserve(expected);
    const std::string& text = next_line();
    const char* p = text.c_str();
    char* end = nullptr;
    while (true) {
      const double v = std::strtod(p, &end);
      if (end == p) break;
      row.push_back(v);
      p = end;
    }
    while (*p == ' ' || *p == '\r') ++p;
    if (*p != '\0' || row.size() != expected) {
      throw MalformedLine(lineno, "expected " + std::to_string(expected) + " values");
    }
    return row;
  };

  if (next_line() != kModelHeader) {
    throw Error(ErrorCode::SchemaVersionMismatch, "not a glovelink-mlp v1 model file");
  }
  std::vector<int> sizes;
  {
    std::istringstream dims(next_line());
    int d = 0;
    while (dims >> d) sizes.push_back(d);
    if (!dims.eof() || sizes.size() < 2) throw MalformedLine(lineno, "bad layer dims");
  }
  MlpModel m(sizes);
  for (auto& layer : m.layers()) {
    for (int r = 0; r < layer.out; ++r) {
      const auto row = parse_row(layer.in);
      std::copy(row.begin(), row.end(), layer.weights.begin() + static_cast<std::ptrdiff_t>(r) * layer.in);
    }
    layer.bias = parse_row(layer.out);
  }
  return m;
}

void save_model(const std::string& path, const MlpModel& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  write_model(os, m);
}

MlpModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path);
  return read_model(is);
}

}  // namespace glovelink
