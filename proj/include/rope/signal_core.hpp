#pragma once

// Core signal types and the small numerical kernels shared by every estimator:
// numerical differentiation, the normalized distance, circular arithmetic,
// sawtooth phase construction and the pseudo-periodicity check.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rope/error.hpp"

namespace rope {

using Index = std::ptrdiff_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Maps any finite angle onto [0, 2pi).
inline double wrap_angle(double radians) {
  double r = std::fmod(radians, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value plus 2pi can round up to exactly 2pi.
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// An angle on the circle, stored canonically in [0, 2pi).
class Phase {
 public:
  constexpr Phase() = default;
  explicit Phase(double radians) : value_(wrap_angle(radians)) {}

  double value() const noexcept { return value_; }

  friend bool operator==(const Phase&, const Phase&) = default;

 private:
  double value_ = 0.0;
};

using PhaseSeries = std::vector<std::optional<Phase>>;

/// Absolute principal angle between two phases, in [0, pi].
inline double circular_error(Phase a, Phase b) {
  const double diff = std::abs(a.value() - b.value());
  return std::min(diff, kTwoPi - diff);
}

/// Uniformly sampled d-dimensional recording; column k is p(k).
class TimeSeries {
 public:
  TimeSeries(double sampling_time, Matrix samples)
      : sampling_time_(sampling_time), samples_(std::move(samples)) {
    if (!(sampling_time_ > 0.0) || !std::isfinite(sampling_time_))
      throw Error(ErrorKind::InvalidInput, "sampling time must be positive and finite");
    if (samples_.rows() < 1 || samples_.cols() < 1)
      throw Error(ErrorKind::InvalidInput, "time series needs d >= 1 and K >= 1");
    if (!samples_.allFinite())
      throw Error(ErrorKind::InvalidInput, "time series contains non-finite values");
  }

  double sampling_time() const noexcept { return sampling_time_; }
  Index dimension() const noexcept { return samples_.rows(); }
  Index size() const noexcept { return samples_.cols(); }
  const Matrix& samples() const noexcept { return samples_; }
  auto sample(Index k) const { return samples_.col(k); }

  /// Columns [first, first + count).
  TimeSeries slice(Index first, Index count) const {
    if (first < 0 || count < 1 || first + count > size())
      throw Error(ErrorKind::Index, "time series slice out of range");
    return TimeSeries(sampling_time_, samples_.middleCols(first, count));
  }

 private:
  double sampling_time_;
  Matrix samples_;
};

/// Stacked positions and velocities of one recording.
struct Kinematics {
  Matrix positions;
  Matrix velocities;
  double sampling_time = 1.0;

  Index dimension() const noexcept { return positions.rows(); }
  Index size() const noexcept { return positions.cols(); }
};

/// Strictly increasing delimiter sample indices; consecutive gaps are at least 2.
class Delimiters {
 public:
  Delimiters() = default;
  explicit Delimiters(std::vector<Index> indices) : indices_(std::move(indices)) {
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      if (indices_[i] < 0) throw Error(ErrorKind::InvalidInput, "negative delimiter index");
      if (i > 0 && indices_[i] - indices_[i - 1] < 2)
        throw Error(ErrorKind::InvalidInput,
                    "delimiters must be strictly increasing with pseudo-periods of at least 2 "
                    "samples (at position " + std::to_string(i) + ")");
    }
  }

  const std::vector<Index>& indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  Index operator[](std::size_t i) const { return indices_.at(i); }
  Index front() const { return indices_.front(); }
  Index back() const { return indices_.back(); }

  /// Length of pseudo-period i (0-based): k_{i+1} - k_i.
  Index period_length(std::size_t i) const { return indices_.at(i + 1) - indices_.at(i); }

  void push_back(Index k) {
    if (!indices_.empty() && k - indices_.back() < 2)
      throw Error(ErrorKind::InvalidInput, "delimiter does not extend the sequence");
    indices_.push_back(k);
  }

 private:
  std::vector<Index> indices_;
};

enum class DiffMode { Causal, Central };

/// Numerical velocity of a position recording (columns are samples).
inline Matrix differentiate(const Matrix& positions, double sampling_time, DiffMode mode) {
  const Index n = positions.cols();
  if (n < 2) throw Error(ErrorKind::InvalidInput, "differentiation needs at least 2 samples");
  Matrix v(positions.rows(), n);
  if (mode == DiffMode::Causal) {
    for (Index k = 1; k < n; ++k) v.col(k) = (positions.col(k) - positions.col(k - 1)) / sampling_time;
    v.col(0) = v.col(1);
  } else {
    v.col(0) = (positions.col(1) - positions.col(0)) / sampling_time;
    v.col(n - 1) = (positions.col(n - 1) - positions.col(n - 2)) / sampling_time;
    for (Index k = 1; k + 1 < n; ++k)
      v.col(k) = (positions.col(k + 1) - positions.col(k - 1)) / (2.0 * sampling_time);
  }
  return v;
}

inline TimeSeries differentiate(const TimeSeries& series, DiffMode mode) {
  return TimeSeries(series.sampling_time(),
                    differentiate(series.samples(), series.sampling_time(), mode));
}

inline Kinematics kinematics_of(const TimeSeries& series, DiffMode mode) {
  return Kinematics{series.samples(), differentiate(series.samples(), series.sampling_time(), mode),
                    series.sampling_time()};
}

/// ||x(h) - ref|| / max_j ||x(j) - ref||, or 0 when every column equals ref.
inline double normalized_distance(const Eigen::Ref<const Matrix>& recording, Index h,
                                  const Eigen::Ref<const Vector>& ref_point) {
  if (recording.cols() < 1) throw Error(ErrorKind::InvalidInput, "empty recording");
  if (h < 0 || h >= recording.cols()) throw Error(ErrorKind::Index, "normalized_distance: h out of range");
  if (ref_point.size() != recording.rows())
    throw Error(ErrorKind::InvalidInput, "reference point dimension mismatch");
  const double max_sq = (recording.colwise() - ref_point).colwise().squaredNorm().maxCoeff();
  if (max_sq == 0.0) return 0.0;
  return std::sqrt((recording.col(h) - ref_point).squaredNorm() / max_sq);
}

/// Piecewise-linear phase rising by 2pi across each pseudo-period, shifted by `offset`.
/// Samples before the first or at/after the last delimiter are undefined.
inline PhaseSeries sawtooth_phase(const Delimiters& delims, Phase offset, Index length) {
  if (delims.empty()) throw Error(ErrorKind::InvalidInput, "sawtooth_phase needs delimiters");
  if (length < delims.back())
    throw Error(ErrorKind::InvalidInput, "series shorter than last delimiter");
  PhaseSeries out(static_cast<std::size_t>(length));
  for (std::size_t i = 0; i + 1 < delims.size(); ++i) {
    const Index start = delims[i];
    const double span = static_cast<double>(delims.period_length(i));
    for (Index k = start; k < delims[i + 1]; ++k)
      out[static_cast<std::size_t>(k)] =
          Phase(kTwoPi * static_cast<double>(k - start) / span + offset.value());
  }
  return out;
}

struct PseudoPeriodicityReport {
  std::vector<double> eps_t_per_pair;
  std::vector<double> eps_s_per_pair;
  double eps_t_max = 0.0;
  double eps_s_max = 0.0;
  double tau_max = 0.0;  // seconds
};

/// Time and shape tolerances of consecutive pseudo-periods, using the sup-norm
/// distance between the signal and its copy shifted by one period length.
inline PseudoPeriodicityReport verify_pseudo_periodicity(const TimeSeries& series,
                                                         const Delimiters& delims) {
  if (delims.size() < 3)
    throw Error(ErrorKind::InvalidInput, "pseudo-periodicity check needs at least 3 delimiters");
  const Index K = series.size();
  if (delims.back() > K) throw Error(ErrorKind::InvalidInput, "delimiter beyond end of series");
  const Matrix& p = series.samples();

  PseudoPeriodicityReport report;
  for (std::size_t i = 0; i + 1 < delims.size(); ++i)
    report.tau_max = std::max(report.tau_max,
                              static_cast<double>(delims.period_length(i)) * series.sampling_time());

  for (std::size_t i = 0; i + 2 < delims.size(); ++i) {
    const Index kappa = delims.period_length(i);
    const Index kappa_next = delims.period_length(i + 1);
    report.eps_t_per_pair.push_back(std::abs(static_cast<double>(kappa_next - kappa)) /
                                    static_cast<double>(kappa));

    double num = 0.0, den = 0.0;
    for (Index k = delims[i]; k < delims[i + 1]; ++k) {
      den = std::max(den, p.col(k).cwiseAbs().maxCoeff());
      if (k + kappa < K) num = std::max(num, (p.col(k) - p.col(k + kappa)).cwiseAbs().maxCoeff());
    }
    report.eps_s_per_pair.push_back(den > 0.0 ? num / den : 0.0);
  }
  report.eps_t_max = *std::max_element(report.eps_t_per_pair.begin(), report.eps_t_per_pair.end());
  report.eps_s_max = *std::max_element(report.eps_s_per_pair.begin(), report.eps_s_per_pair.end());
  return report;
}

}  // namespace rope
