#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "glovelink/geometry.hpp"

namespace glovelink {

/// Timestamped pose series; timestamps strictly increasing.
struct Trajectory {
  std::vector<double> t;
  std::vector<Pose> poses;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
  void push_back(double time, const Pose& p) {
    t.push_back(time);
    poses.push_back(p);
  }
  std::vector<double> axis(int k) const;
  /// Throws InvalidArgument on length mismatch or non-increasing time.
  void validate() const;
};

struct TrialSummary {
  double duration = 0.0;    // s
  double trans_mean = 0.0;  // m, hand workspace
  double trans_std = 0.0;
  double rot_mean = 0.0;  // rad
  double rot_std = 0.0;
  double delay = 0.0;  // s
  std::size_t samples = 0;
};

struct DelayOptions {
  double gate = 0.5;              // s, max |peak time difference| for a match
  double prominence_ratio = 0.2;  // of each signal's range
  double max_lag = 1.0;           // s, cross-correlation search range
};

/// Reference poses mapping tip space back into the hand workspace.
struct Alignment {
  Pose tip_ref;
  Pose hand_ref;
};

/// Inverse motion scaling: p -> hand_ref + (p - tip_ref) / eta; orientations
/// carried over by the same reference change (unchanged when both refs
/// share an orientation).
Trajectory unscale(const Trajectory& tip, double eta, const Alignment& refs);
/// Refs default to the trajectory's own first pose.
Trajectory unscale(const Trajectory& tip, double eta);

/// Strict local maxima (plateaus report their middle sample) whose
/// prominence is at least `min_prominence`.
std::vector<std::size_t> detect_peaks(std::span<const double> signal, double min_prominence);

/// Output-minus-input lag from matched peaks, falling back to
/// cross-correlation. Throws NoPeaks when neither yields an estimate.
double estimate_delay(const Trajectory& input, const Trajectory& output,
                      const DelayOptions& opts = {});

/// Linear position / spherical orientation interpolation at `times`.
/// Times outside the trajectory's range are dropped; `kept` receives the
/// indices into `times` that were evaluated.
Trajectory resample(const Trajectory& traj, std::span<const double> times,
                    std::vector<std::size_t>* kept = nullptr);

/// Shifts `output` back by `delay` and resamples it onto the input times.
/// Returns the covered input subset and the aligned output, equal length.
std::pair<Trajectory, Trajectory> align(const Trajectory& input, const Trajectory& output,
                                        double delay);

struct ErrorSeries {
  std::vector<double> trans;  // m
  std::vector<double> rot;    // rad
};

/// Pointwise Euclidean and bi-invariant rotation errors of equal-length trajectories.
ErrorSeries error_series(const Trajectory& a, const Trajectory& b);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};
MeanStd mean_std(std::span<const double> v);

/// unscale -> estimate_delay -> align -> error_series -> mean/std.
/// `delay` skips estimation when given.
TrialSummary summarize(const Trajectory& hand, const Trajectory& tip, double eta,
                       const std::optional<Alignment>& refs = std::nullopt,
                       std::optional<double> delay = std::nullopt,
                       const DelayOptions& opts = {});

}  // namespace glovelink
