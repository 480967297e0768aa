#include "glovelink/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "glovelink/error.hpp"

namespace glovelink {

namespace {

struct Peak {
  std::size_t index;  // middle of the plateau
  std::size_t left;   // first sample of the plateau
  std::size_t right;  // last sample of the plateau
  double prominence;
};

std::vector<Peak> find_peaks(std::span<const double> s, double min_prominence) {
  std::vector<Peak> peaks;
  const std::size_t n = s.size();
  if (n < 3) return peaks;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (s[i] > s[i - 1]) {
      std::size_t j = i;
      while (j + 1 < n && s[j + 1] == s[i]) ++j;
      if (j + 1 < n && s[j + 1] < s[i]) {
        const double h = s[i];
        double left_min = h;
        for (std::size_t k = i; k-- > 0;) {
          if (s[k] > h) break;
          left_min = std::min(left_min, s[k]);
        }
        double right_min = h;
        for (std::size_t k = j + 1; k < n; ++k) {
          if (s[k] > h) break;
          right_min = std::min(right_min, s[k]);
        }
        const double prominence = h - std::max(left_min, right_min);
        if (prominence >= min_prominence) {
          peaks.push_back({(i + j) / 2, i, j, prominence});
        }
      }
      i = j + 1;
    } else {
      ++i;
    }
  }
  return peaks;
}

/// Sub-sample peak time: vertex of a least-squares parabola through the
/// samples within the top quarter of the peak's prominence. Falls back to the
/// plateau midpoint when the fit is degenerate or lands outside its window.
double peak_time(std::span<const double> t, std::span<const double> s, const Peak& p) {
  const double midpoint = 0.5 * (t[p.left] + t[p.right]);
  const double floor = s[p.index] - 0.25 * p.prominence;
  std::size_t lo = p.left, hi = p.right;
  while (lo > 0 && s[lo - 1] >= floor) --lo;
  while (hi + 1 < s.size() && s[hi + 1] >= floor) ++hi;
  if (lo > 0) --lo;  // one sample below the band on each side anchors the curvature
  if (hi + 1 < s.size()) ++hi;
  if (hi - lo < 2) return midpoint;

  // Normal equations for s ~ c0 + c1 u + c2 u^2, u = t - midpoint.
  double m[3][4] = {};
  for (std::size_t k = lo; k <= hi; ++k) {
    const double u = t[k] - midpoint;
    const double pw[5] = {1.0, u, u * u, u * u * u, u * u * u * u};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += pw[r + c];
      m[r][3] += pw[r] * s[k];
    }
  }
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (std::abs(m[pivot][col]) < 1e-300) return midpoint;
    std::swap(m[col], m[pivot]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  const double c1 = m[1][3] / m[1][1];
  const double c2 = m[2][3] / m[2][2];
  if (!(c2 < 0.0)) return midpoint;
  const double vertex = midpoint - c1 / (2.0 * c2);
  if (!(vertex >= t[lo] && vertex <= t[hi])) return midpoint;
  return vertex;
}

std::vector<double> peak_times(std::span<const double> t, std::span<const double> s,
                               double prominence_ratio) {
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  const double range = *hi - *lo;
  std::vector<double> out;
  if (!(range > 1e-9)) return out;
  for (const Peak& p : find_peaks(s, prominence_ratio * range)) out.push_back(peak_time(t, s, p));
  return out;
}

/// Greedy nearest-time matching within the gate; appends output-minus-input differences.
void match_peaks(const std::vector<double>& in, const std::vector<double>& out, double gate,
                 std::vector<double>& diffs) {
  struct Pair {
    double gap;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < in.size(); ++i) {
    for (std::size_t j = 0; j < out.size(); ++j) {
      const double d = out[j] - in[i];
      if (std::abs(d) <= gate) pairs.push_back({std::abs(d), i, j});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& a, const Pair& b) { return a.gap < b.gap; });
  std::vector<bool> used_in(in.size()), used_out(out.size());
  for (const Pair& p : pairs) {
    if (used_in[p.i] || used_out[p.j]) continue;
    used_in[p.i] = used_out[p.j] = true;
    diffs.push_back(out[p.j] - in[p.i]);
  }
}

double interpolate(std::span<const double> t, std::span<const double> s, double x) {
  const auto it = std::upper_bound(t.begin(), t.end(), x);
  if (it == t.begin()) return s.front();
  if (it == t.end()) return s.back();
  const std::size_t k = static_cast<std::size_t>(it - t.begin());
  const double u = (x - t[k - 1]) / (t[k] - t[k - 1]);
  return s[k - 1] + u * (s[k] - s[k - 1]);
}

std::optional<double> cross_correlation_delay(const Trajectory& input, const Trajectory& output,
                                              const DelayOptions& opts) {
  // Axis with the most input motion.
  int axis = 0;
  double best_range = -1.0;
  for (int k = 0; k < 3; ++k) {
    const auto v = input.axis(k);
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (*hi - *lo > best_range) {
      best_range = *hi - *lo;
      axis = k;
    }
  }
  if (!(best_range > 1e-9) || output.size() < 2) return std::nullopt;

  std::vector<double> gaps(input.size() - 1);
  for (std::size_t i = 1; i < input.size(); ++i) gaps[i - 1] = input.t[i] - input.t[i - 1];
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  const double dt = std::min(gaps[gaps.size() / 2], 0.005);

  const double t0 = input.t.front();
  const double t1 = input.t.back();
  const auto n = static_cast<std::size_t>((t1 - t0) / dt) + 1;
  const auto in_axis = input.axis(axis);
  const auto out_axis = output.axis(axis);
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = t0 + static_cast<double>(i) * dt;
    a[i] = interpolate(input.t, in_axis, x);
    b[i] = interpolate(output.t, out_axis, x);
  }
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  for (double& v : a) v -= ma;
  for (double& v : b) v -= mb;

  const auto max_lag = static_cast<std::ptrdiff_t>(opts.max_lag / dt);
  std::vector<double> corr;
  std::ptrdiff_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::ptrdiff_t lag = -max_lag; lag <= max_lag; ++lag) {
    double acc = 0.0;
    std::size_t count = 0;
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      const std::ptrdiff_t j = i + lag;
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(n)) continue;
      acc += a[i] * b[j];
      ++count;
    }
    const double value = count > n / 4 ? acc / static_cast<double>(count) : -std::numeric_limits<double>::infinity();
    corr.push_back(value);
    if (value > best_value) {
      best_value = value;
      best = lag;
    }
  }
  if (!std::isfinite(best_value) || best_value <= 0.0) return std::nullopt;
  double lag = static_cast<double>(best);
  const std::size_t k = static_cast<std::size_t>(best + max_lag);
  if (k > 0 && k + 1 < corr.size() && std::isfinite(corr[k - 1]) && std::isfinite(corr[k + 1])) {
    const double denom = corr[k - 1] - 2.0 * corr[k] + corr[k + 1];
    if (denom < 0.0) lag += 0.5 * (corr[k - 1] - corr[k + 1]) / denom;
  }
  return lag * dt;
}

}  // namespace

std::vector<double> Trajectory::axis(int k) const {
  std::vector<double> v(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) v[i] = poses[i].position[k];
  return v;
}

void Trajectory::validate() const {
  if (t.size() != poses.size()) throw Error(ErrorCode::InvalidArgument, "trajectory length mismatch");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw Error(ErrorCode::InvalidArgument, "trajectory time not increasing");
  }
}

Trajectory unscale(const Trajectory& tip, double eta, const Alignment& refs) {
  if (!(eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "eta must be positive");
  Trajectory out;
  out.t = tip.t;
  out.poses.reserve(tip.poses.size());
  const bool same_orientation = refs.tip_ref.orientation == refs.hand_ref.orientation;
  const UnitQuat reorient = refs.hand_ref.orientation * refs.tip_ref.orientation.conjugate();
  for (const Pose& p : tip.poses) {
    Pose q;
    q.position = refs.hand_ref.position + (p.position - refs.tip_ref.position) / eta;
    q.orientation = same_orientation ? p.orientation : reorient * p.orientation;
    out.poses.push_back(q);
  }
  return out;
}

Trajectory unscale(const Trajectory& tip, double eta) {
  if (tip.empty()) return tip;
  return unscale(tip, eta, {tip.poses.front(), tip.poses.front()});
}

std::vector<std::size_t> detect_peaks(std::span<const double> signal, double min_prominence) {
  std::vector<std::size_t> idx;
  for (const Peak& p : find_peaks(signal, min_prominence)) idx.push_back(p.index);
  return idx;
}

double estimate_delay(const Trajectory& input, const Trajectory& output, const DelayOptions& opts) {
  if (input.size() < 3 || output.size() < 3) {
    throw Error(ErrorCode::NoPeaks, "trajectories too short for delay estimation");
  }
  std::vector<double> diffs;
  for (int k = 0; k < 3; ++k) {
    auto a = input.axis(k);
    auto b = output.axis(k);
    for (int sign : {1, -1}) {
      if (sign < 0) {
        for (double& v : a) v = -v;
        for (double& v : b) v = -v;
      }
      match_peaks(peak_times(input.t, a, opts.prominence_ratio),
                  peak_times(output.t, b, opts.prominence_ratio), opts.gate, diffs);
    }
  }
  if (diffs.size() >= 2) {
    return std::accumulate(diffs.begin(), diffs.end(), 0.0) / static_cast<double>(diffs.size());
  }
  if (const auto xc = cross_correlation_delay(input, output, opts)) return *xc;
  throw Error(ErrorCode::NoPeaks, "no matched peaks and no cross-correlation maximum");
}

Trajectory resample(const Trajectory& traj, std::span<const double> times,
                    std::vector<std::size_t>* kept) {
  Trajectory out;
  if (kept) kept->clear();
  if (traj.empty()) return out;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double x = times[i];
    if (x < traj.t.front() || x > traj.t.back()) continue;
    const auto it = std::lower_bound(traj.t.begin(), traj.t.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - traj.t.begin());
    Pose p;
    if (traj.t[k] == x) {
      p = traj.poses[k];
    } else {
      const Pose& a = traj.poses[k - 1];
      const Pose& b = traj.poses[k];
      const double u = (x - traj.t[k - 1]) / (traj.t[k] - traj.t[k - 1]);
      p.position = a.position + (b.position - a.position) * u;
      p.orientation = slerp(a.orientation, b.orientation, u);
    }
    out.push_back(x, p);
    if (kept) kept->push_back(i);
  }
  return out;
}

std::pair<Trajectory, Trajectory> align(const Trajectory& input, const Trajectory& output,
                                        double delay) {
  Trajectory shifted = output;
  for (double& t : shifted.t) t -= delay;
  std::vector<std::size_t> kept;
  Trajectory aligned = resample(shifted, input.t, &kept);
  Trajectory subset;
  for (std::size_t i : kept) subset.push_back(input.t[i], input.poses[i]);
  return {std::move(subset), std::move(aligned)};
}

ErrorSeries error_series(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "error_series needs equal lengths");
  ErrorSeries e;
  e.trans.reserve(a.size());
  e.rot.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    e.trans.push_back(distance(a.poses[i].position, b.poses[i].position));
    e.rot.push_back(rotation_distance(a.poses[i].orientation, b.poses[i].orientation));
  }
  return e;
}

MeanStd mean_std(std::span<const double> v) {
  MeanStd r;
  if (v.empty()) return r;
  const double n = static_cast<double>(v.size());
  r.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(ss / n);
  return r;
}

TrialSummary summarize(const Trajectory& hand, const Trajectory& tip, double eta,
                       const std::optional<Alignment>& refs, std::optional<double> delay,
                       const DelayOptions& opts) {
  hand.validate();
  tip.validate();
  if (hand.empty() || tip.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
  const Alignment r = refs.value_or(Alignment{tip.poses.front(), hand.poses.front()});
  const Trajectory unscaled = unscale(tip, eta, r);

  TrialSummary s;
  s.duration = hand.t.back() - hand.t.front();
  s.delay = delay ? *delay : estimate_delay(hand, unscaled, opts);
  const auto [in, out] = align(hand, unscaled, s.delay);
  const ErrorSeries e = error_series(in, out);
  const MeanStd tr = mean_std(e.trans);
  const MeanStd ro = mean_std(e.rot);
  s.trans_mean = tr.mean;
  s.trans_std = tr.std;
  s.rot_mean = ro.mean;
  s.rot_std = ro.std;
  s.samples = e.trans.size();
  return s;
}

}  // namespace glovelink
