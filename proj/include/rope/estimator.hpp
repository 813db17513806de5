#pragma once

// Recursive online phase estimation.
//
// A warm-up recording is used to find the first loop by maximizing the
// normalized lag correlation between consecutive segments. From then on each
// incoming sample is located inside the previous loop by minimizing the summed
// normalized position and velocity distances; the relative position of the
// match in that loop gives the phase. A drop of more than pi between
// consecutive phases closes the current loop, which then becomes the
// reference for the next one. In tethered mode the first loop is aligned to a
// known baseline to fix where phase zero sits.

#include <Eigen/Core>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rope/error.hpp"
#include "rope/signal_core.hpp"

namespace rope {

/// Origin plus orthonormal basis vectors (stored as matrix columns).
class FrameOfReference {
 public:
  FrameOfReference(Vector origin, Matrix basis)
      : origin_(std::move(origin)), basis_(std::move(basis)) {
    const Index d = origin_.size();
    if (d < 1 || basis_.rows() != d || basis_.cols() != d)
      throw Error(ErrorKind::InvalidFrame, "frame needs an origin and d basis vectors of dimension d");
    if (!origin_.allFinite() || !basis_.allFinite())
      throw Error(ErrorKind::InvalidFrame, "frame contains non-finite values");
    const Matrix gram = basis_.transpose() * basis_;
    if ((gram - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-9)
      throw Error(ErrorKind::InvalidFrame, "frame basis is not orthonormal");
  }

  static FrameOfReference identity(Index d) {
    return FrameOfReference(Vector::Zero(d), Matrix::Identity(d, d));
  }

  const Vector& origin() const noexcept { return origin_; }
  const Matrix& basis() const noexcept { return basis_; }
  Index dimension() const noexcept { return origin_.size(); }

 private:
  Vector origin_;
  Matrix basis_;
};

enum class Mode { Untethered, Tethered };
enum class SearchKind { Full, Windowed, TimePenalized };
enum class Status { Collecting, Active };

struct SearchConfig {
  SearchKind kind = SearchKind::Full;
  Index delta_minus = 1;  // look-behind, windowed only
  Index delta_plus = 1;   // look-ahead, windowed only
};

struct Tether {
  Matrix baseline_positions;  // d x kappa_b, one closed baseline loop
  FrameOfReference frame_estimand;
  FrameOfReference frame_baseline;
  double baseline_sampling_time = 0.0;  // 0 means "same as the estimand"
};

struct EstimatorConfig {
  double sampling_time = 0.01;
  Index dimension = 1;
  double tau_max = 1.0;  // upper bound on any pseudo-period, seconds
  Mode mode = Mode::Untethered;
  SearchConfig search;
  double warmup_margin = 1.1;
  std::optional<Tether> tether;
  /// Re-emit phases for the warm-up samples once the first loop is known.
  bool backfill = false;

  void validate() const {
    if (!(sampling_time > 0.0)) throw Error(ErrorKind::Config, "sampling_time must be positive");
    if (dimension < 1) throw Error(ErrorKind::Config, "dimension must be at least 1");
    if (!(tau_max > 0.0)) throw Error(ErrorKind::Config, "tau_max must be positive");
    if (!(warmup_margin >= 1.0)) throw Error(ErrorKind::Config, "warmup_margin must be >= 1");
    if (search.kind == SearchKind::Windowed && (search.delta_minus < 1 || search.delta_plus < 1))
      throw Error(ErrorKind::Config, "windowed search needs delta_minus, delta_plus >= 1");
    if (mode == Mode::Tethered) {
      if (!tether) throw Error(ErrorKind::Config, "tethered mode requires a baseline and frames");
      if (tether->baseline_positions.rows() != dimension || tether->baseline_positions.cols() < 2)
        throw Error(ErrorKind::Config, "baseline must be a d x kappa_b recording with kappa_b >= 2");
      if (tether->frame_estimand.dimension() != dimension ||
          tether->frame_baseline.dimension() != dimension)
        throw Error(ErrorKind::Config, "frame dimension does not match the signal");
    }
  }

  /// kappa_0: strictly more than 2 tau_max / T_s samples.
  Index warmup_length() const {
    const double periods = 2.0 * tau_max / sampling_time;
    // The tolerance keeps 1.1 * 200 = 220.00000000000003 from rounding up to 221.
    const auto scaled = static_cast<Index>(std::ceil(warmup_margin * periods - 1e-9));
    return std::max(scaled, static_cast<Index>(std::floor(periods)) + 1);
  }

  /// Shortest admissible loop, used as the lower bound of the first-loop
  /// search and as the minimum length of any later loop.
  Index min_loop_length() const {
    return std::max<Index>(2, static_cast<Index>(std::ceil(0.1 * tau_max / sampling_time - 1e-9)));
  }
};

// ---------------------------------------------------------------------------
// First loop detection

struct FirstLoop {
  Index boundary = 0;                // k_2 (k_1 = 0)
  std::vector<Index> excluded_rows;  // kinematic rows with zero spread
  std::vector<double> scores;        // c_n for n = min_length .. floor(kappa_0 / 2)
  Index min_length = 0;
};

/// Picks k_2 as the lag n maximizing the variance-normalized correlation between
/// columns [0, n) and [n, 2n) of the stacked position/velocity warm-up.
inline FirstLoop detect_first_loop(const Kinematics& warmup, Index min_length) {
  if (warmup.positions.rows() != warmup.velocities.rows() ||
      warmup.positions.cols() != warmup.velocities.cols())
    throw Error(ErrorKind::InvalidInput, "positions and velocities differ in shape");
  const Index kappa0 = warmup.size();
  const Index d = warmup.dimension();
  min_length = std::max<Index>(min_length, 2);
  const Index max_length = kappa0 / 2;
  if (max_length < min_length)
    throw Error(ErrorKind::InsufficientWarmup,
                "warm-up of " + std::to_string(kappa0) + " samples cannot hold two loops of at least " +
                    std::to_string(min_length) + " samples");

  Matrix m(2 * d, kappa0);
  m.topRows(d) = warmup.positions;
  m.bottomRows(d) = warmup.velocities;
  const Index rows = m.rows();

  // A row is degenerate when it is constant over the whole warm-up; it is then
  // left out of every c_n.
  FirstLoop result;
  result.min_length = min_length;
  std::vector<bool> excluded(static_cast<std::size_t>(rows), false);
  for (Index r = 0; r < rows; ++r) {
    const double scale = std::max(1.0, m.row(r).cwiseAbs().maxCoeff());
    if (m.row(r).maxCoeff() - m.row(r).minCoeff() <= 1e-12 * scale) {
      excluded[static_cast<std::size_t>(r)] = true;
      result.excluded_rows.push_back(r);
    }
  }

  result.scores.reserve(static_cast<std::size_t>(max_length - min_length + 1));
  for (Index n = min_length; n <= max_length; ++n) {
    double c = 0.0;
    for (Index r = 0; r < rows; ++r) {
      if (excluded[static_cast<std::size_t>(r)]) continue;
      const auto seg = m.row(r).head(2 * n);
      const double mean = seg.mean();
      const double var = (seg.array() - mean).square().mean();
      const double scale = std::max(1.0, std::abs(mean));
      if (var <= 1e-24 * scale * scale) continue;  // flat over this prefix only
      const auto a = m.row(r).segment(0, n).array() - mean;
      const auto b = m.row(r).segment(n, n).array() - mean;
      c += (a * b).sum() / (static_cast<double>(n) * var);
    }
    result.scores.push_back(c);
  }

  const double best = *std::max_element(result.scores.begin(), result.scores.end());
  // Smallest lag within rounding of the maximum; exact repetitions make c_L and
  // c_2L equal in exact arithmetic.
  const double tol = 1e-9 * std::max(1.0, std::abs(best));
  for (std::size_t i = 0; i < result.scores.size(); ++i) {
    if (result.scores[i] >= best - tol) {
      result.boundary = min_length + static_cast<Index>(i);
      break;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Searches inside the previous loop

/// Non-owning view of one loop: positions and velocities, d x kappa each.
struct LoopRef {
  Eigen::Map<const Matrix> positions;
  Eigen::Map<const Matrix> velocities;

  LoopRef(const double* pos, const double* vel, Index d, Index length)
      : positions(pos, d, length), velocities(vel, d, length) {}
  LoopRef(const Matrix& pos, const Matrix& vel)
      : positions(pos.data(), pos.rows(), pos.cols()), velocities(vel.data(), vel.rows(), vel.cols()) {}
  explicit LoopRef(const Kinematics& k) : LoopRef(k.positions, k.velocities) {}

  Index length() const noexcept { return positions.cols(); }
  Index dimension() const noexcept { return positions.rows(); }
};

namespace detail {

/// Summed normalized position and velocity distance of each loop column to a
/// query. Normalizers always span the whole loop, whatever domain is searched,
/// so every search variant scores a given column identically.
class MatchObjective {
 public:
  MatchObjective(const LoopRef& loop, const Eigen::Ref<const Vector>& p,
                 const Eigen::Ref<const Vector>& v)
      : loop_(loop), p_(p), v_(v) {
    if (loop.length() < 1) throw Error(ErrorKind::InternalState, "search over an empty loop");
    if (p.size() != loop.dimension() || v.size() != loop.dimension())
      throw Error(ErrorKind::InvalidInput, "query dimension does not match the loop");
    for (Index h = 0; h < loop.length(); ++h) {
      max_p_ = std::max(max_p_, (loop.positions.col(h) - p).squaredNorm());
      max_v_ = std::max(max_v_, (loop.velocities.col(h) - v).squaredNorm());
    }
  }

  double operator()(Index h) const {
    const double dp = max_p_ > 0.0 ? std::sqrt((loop_.positions.col(h) - p_).squaredNorm() / max_p_) : 0.0;
    const double dv = max_v_ > 0.0 ? std::sqrt((loop_.velocities.col(h) - v_).squaredNorm() / max_v_) : 0.0;
    return dp + dv;
  }

 private:
  const LoopRef& loop_;
  Eigen::Ref<const Vector> p_;
  Eigen::Ref<const Vector> v_;
  double max_p_ = 0.0;
  double max_v_ = 0.0;
};

}  // namespace detail

/// Contiguous inclusive index range [first, last] inside a loop.
struct IndexRange {
  Index first;
  Index last;
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Windowed search domain around the previous match (relative indices, sorted,
/// overlapping pieces merged). Wraps to the loop head when the look-ahead runs
/// past the loop end.
inline std::vector<IndexRange> search_window(Index loop_length, Index last_match, Index delta_minus,
                                             Index delta_plus) {
  if (last_match < 0 || last_match >= loop_length)
    throw Error(ErrorKind::InternalState, "previous match lies outside the previous loop");
  const Index end = loop_length - 1;
  // A window at least as wide as the loop covers it wherever it is centred.
  if (delta_minus + delta_plus + 1 > loop_length) return {{0, end}};
  const Index tail_first = std::max<Index>(0, last_match - delta_minus);
  if (last_match + delta_plus <= end) return {{tail_first, last_match + delta_plus}};
  const Index head_last = last_match + delta_plus - loop_length;
  if (head_last + 1 >= tail_first) return {{0, end}};
  return {{0, head_last}, {tail_first, end}};
}

/// argmin over the whole previous loop; ties go to the smallest index.
inline Index search_full(const LoopRef& loop, const Eigen::Ref<const Vector>& p,
                         const Eigen::Ref<const Vector>& v) {
  const detail::MatchObjective objective(loop, p, v);
  Index best = 0;
  double best_value = objective(0);
  for (Index h = 1; h < loop.length(); ++h) {
    const double value = objective(h);
    if (value < best_value) {
      best_value = value;
      best = h;
    }
  }
  return best;
}

/// Same objective as search_full restricted to search_window(); ties go to the
/// smallest index.
inline Index search_windowed(const LoopRef& loop, const Eigen::Ref<const Vector>& p,
                             const Eigen::Ref<const Vector>& v, Index last_match, Index delta_minus,
                             Index delta_plus) {
  const detail::MatchObjective objective(loop, p, v);
  Index best = -1;
  double best_value = std::numeric_limits<double>::infinity();
  for (const auto& range : search_window(loop.length(), last_match, delta_minus, delta_plus)) {
    for (Index h = range.first; h <= range.last; ++h) {
      const double value = objective(h);
      if (value < best_value) {
        best_value = value;
        best = h;
      }
    }
  }
  return best;
}

/// Elapsed-time mismatch between loop column h and the current sample, both
/// measured from the start of the previous loop (`elapsed` = k - k_{i-1}).
inline double elapsed_time_mismatch(Index h, Index loop_length, Index elapsed) {
  return static_cast<double>(
      std::min(std::abs(h + loop_length - elapsed), std::abs(h + 2 * loop_length - elapsed)));
}

/// search_full plus a normalized elapsed-time penalty, for signals that dwell
/// (flat segments) and therefore self-intersect in position/velocity space.
inline Index search_time_penalized(const LoopRef& loop, const Eigen::Ref<const Vector>& p,
                                   const Eigen::Ref<const Vector>& v, Index elapsed) {
  const detail::MatchObjective objective(loop, p, v);
  const Index n = loop.length();
  double max_sigma = 0.0;
  for (Index h = 0; h < n; ++h) max_sigma = std::max(max_sigma, elapsed_time_mismatch(h, n, elapsed));
  Index best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (Index h = 0; h < n; ++h) {
    const double sigma = max_sigma > 0.0 ? elapsed_time_mismatch(h, n, elapsed) / max_sigma : 0.0;
    const double value = objective(h) + sigma;
    if (value < best_value) {
      best_value = value;
      best = h;
    }
  }
  return best;
}

/// Phase of a match h* inside the previous loop [prev_start, cur_start).
inline Phase compute_phase(Index match, Index prev_start, Index cur_start, Phase offset) {
  if (match < prev_start || match >= cur_start)
    throw Error(ErrorKind::InternalState, "match index outside the previous loop");
  return Phase(kTwoPi * static_cast<double>(match - prev_start) /
                   static_cast<double>(cur_start - prev_start) +
               offset.value());
}

/// True on a 2pi -> 0 wrap: the raw difference drops below -pi.
inline bool detect_cycle_boundary(Phase now, Phase previous) {
  return now.value() - previous.value() < -std::numbers::pi;
}

// ---------------------------------------------------------------------------
// Offset estimation for tethered mode

struct OffsetEstimate {
  Phase offset;
  Index baseline_index = 0;  // h*_0
  Matrix aligned_loop;       // first loop after rotation, centering and scaling
  bool degenerate_scaling = false;
};

/// Aligns the first loop to the baseline (rotate into the baseline frame,
/// center, match per-axis spread) and returns the phase of the baseline point
/// that best matches the aligned first sample.
inline OffsetEstimate estimate_offset(const Matrix& first_loop, const FrameOfReference& frame_estimand,
                                      const Matrix& baseline, const FrameOfReference& frame_baseline,
                                      double sampling_time, double baseline_sampling_time = 0.0) {
  const Index d = first_loop.rows();
  if (first_loop.cols() < 2 || baseline.cols() < 2)
    throw Error(ErrorKind::InvalidInput, "offset estimation needs loops of at least 2 samples");
  if (baseline.rows() != d || frame_estimand.dimension() != d || frame_baseline.dimension() != d)
    throw Error(ErrorKind::InvalidInput, "dimension mismatch between loop, baseline and frames");
  if (baseline_sampling_time <= 0.0) baseline_sampling_time = sampling_time;

  const Eigen::FullPivLU<Matrix> lu(frame_estimand.basis());
  if (!lu.isInvertible()) throw Error(ErrorKind::InvalidFrame, "estimand frame basis is singular");
  const Matrix rotation = frame_baseline.basis() * lu.inverse();

  OffsetEstimate result;
  Matrix aligned = rotation * (first_loop.colwise() - frame_estimand.origin());
  aligned.colwise() -= aligned.rowwise().mean();

  const Matrix centered_baseline = baseline.colwise() - baseline.rowwise().mean();
  for (Index r = 0; r < d; ++r) {
    const double spread_loop = std::sqrt(aligned.row(r).squaredNorm() / static_cast<double>(aligned.cols()));
    const double spread_base =
        std::sqrt(centered_baseline.row(r).squaredNorm() / static_cast<double>(baseline.cols()));
    if (spread_loop > 0.0 && spread_base > 0.0) {
      aligned.row(r) *= spread_base / spread_loop;
    } else {
      result.degenerate_scaling = true;
    }
  }

  const Vector p0 = aligned.col(0);
  const Vector v0 = (aligned.col(1) - aligned.col(0)) / sampling_time;
  const Matrix baseline_velocity = differentiate(centered_baseline, baseline_sampling_time, DiffMode::Central);
  const LoopRef loop(centered_baseline, baseline_velocity);
  result.baseline_index = search_full(loop, p0, v0);
  result.offset = Phase(kTwoPi * static_cast<double>(result.baseline_index) /
                        static_cast<double>(baseline.cols()));
  result.aligned_loop = std::move(aligned);
  return result;
}

// ---------------------------------------------------------------------------
// Streaming state machine

struct PhaseOutput {
  Index sample_index = 0;
  Status status = Status::Collecting;
  std::optional<Phase> phase;
  std::optional<Index> match_index;  // h*, absolute sample index
  Index loop_index = 1;
  bool retroactive = false;  // back-filled warm-up sample
};

struct EstimatorDiagnostics {
  std::vector<Index> excluded_rows;  // from first loop detection
  bool degenerate_scaling = false;   // from offset estimation
  Index suppressed_wraps = 0;        // phase wraps inside a loop shorter than min_loop_length
  std::optional<Index> baseline_index;
};

class Estimator {
 public:
  explicit Estimator(EstimatorConfig config)
      : config_(std::move(config)), warmup_length_(0), min_loop_(0) {
    config_.validate();
    warmup_length_ = config_.warmup_length();
    min_loop_ = config_.min_loop_length();
  }

  const EstimatorConfig& config() const noexcept { return config_; }
  Status status() const noexcept { return status_; }
  Index warmup_length() const noexcept { return warmup_length_; }
  Index samples_seen() const noexcept { return count_; }
  Index loop_index() const noexcept { return loop_index_; }
  const Delimiters& delimiters() const noexcept { return delimiters_; }
  Phase offset() const noexcept { return offset_; }
  const EstimatorDiagnostics& diagnostics() const noexcept { return diagnostics_; }
  Index buffered_samples() const noexcept { return static_cast<Index>(positions_.size()) / d(); }

  /// Consumes one position sample; velocity is the backward difference.
  PhaseOutput step(std::span<const double> position) { return push(position, {}); }

  /// Consumes one sample with a caller-supplied velocity.
  PhaseOutput step(std::span<const double> position, std::span<const double> velocity) {
    if (velocity.size() != static_cast<std::size_t>(d()))
      throw Error(ErrorKind::InvalidInput, "velocity dimension mismatch");
    return push(position, velocity);
  }

  /// Outputs for warm-up samples produced when the first loop was found
  /// (only with config.backfill). Cleared on each call.
  std::vector<PhaseOutput> take_backfill() { return std::exchange(backfill_, {}); }

 private:
  Index d() const noexcept { return config_.dimension; }

  const double* pos_col(Index k) const { return positions_.data() + (k - base_) * d(); }
  const double* vel_col(Index k) const { return velocities_.data() + (k - base_) * d(); }

  PhaseOutput push(std::span<const double> position, std::span<const double> velocity) {
    if (position.size() != static_cast<std::size_t>(d()))
      throw Error(ErrorKind::InvalidInput, "sample dimension " + std::to_string(position.size()) +
                                               " does not match configured dimension " +
                                               std::to_string(d()));
    const Index k = count_++;
    positions_.insert(positions_.end(), position.begin(), position.end());
    if (!velocity.empty()) {
      velocities_.insert(velocities_.end(), velocity.begin(), velocity.end());
    } else if (k == 0) {
      velocities_.insert(velocities_.end(), position.size(), 0.0);
    } else {
      const double* prev = pos_col(k - 1);
      for (Index r = 0; r < d(); ++r)
        velocities_.push_back((position[static_cast<std::size_t>(r)] - prev[r]) / config_.sampling_time);
      if (k == 1) std::copy_n(vel_col(1), d(), velocities_.begin());
    }

    if (status_ == Status::Active) return active_step(k);
    if (count_ < warmup_length_) return PhaseOutput{k, Status::Collecting, std::nullopt, std::nullopt, 1, false};
    return activate(k);
  }

  PhaseOutput activate(Index k) {
    Kinematics warmup{Eigen::Map<const Matrix>(positions_.data(), d(), count_),
                      Eigen::Map<const Matrix>(velocities_.data(), d(), count_), config_.sampling_time};
    const FirstLoop first = detect_first_loop(warmup, min_loop_);
    diagnostics_.excluded_rows = first.excluded_rows;
    const Index k2 = first.boundary;

    if (config_.mode == Mode::Tethered) {
      const auto& t = *config_.tether;
      const OffsetEstimate est = estimate_offset(warmup.positions.leftCols(k2), t.frame_estimand,
                                                 t.baseline_positions, t.frame_baseline,
                                                 config_.sampling_time, t.baseline_sampling_time);
      offset_ = est.offset;
      diagnostics_.degenerate_scaling = est.degenerate_scaling;
      diagnostics_.baseline_index = est.baseline_index;
    }

    delimiters_ = Delimiters({0, k2});
    prev_start_ = 0;
    cur_start_ = k2;
    loop_index_ = 2;
    status_ = Status::Active;

    if (config_.backfill) {
      const LoopRef loop(pos_col(0), vel_col(0), d(), k2);
      for (Index j = 0; j < k2; ++j) {
        const Index h = search_full(loop, Eigen::Map<const Vector>(pos_col(j), d()),
                                    Eigen::Map<const Vector>(vel_col(j), d()));
        backfill_.push_back(PhaseOutput{j, Status::Active, compute_phase(h, 0, k2, offset_), h, 1, true});
      }
    }
    // Replay the rest of the warm-up through the regular per-sample path.
    PhaseOutput out;
    for (Index j = k2; j <= k; ++j) {
      out = active_step(j);
      if (j < k && config_.backfill) {
        out.retroactive = true;
        backfill_.push_back(out);
      }
    }
    return out;
  }

  PhaseOutput active_step(Index k) {
    const Index kappa = cur_start_ - prev_start_;
    const LoopRef loop(pos_col(prev_start_), vel_col(prev_start_), d(), kappa);
    const Eigen::Map<const Vector> p(pos_col(k), d());
    const Eigen::Map<const Vector> v(vel_col(k), d());

    Index h = 0;
    switch (config_.search.kind) {
      case SearchKind::Full:
        h = search_full(loop, p, v);
        break;
      case SearchKind::Windowed:
        h = last_match_ ? search_windowed(loop, p, v, *last_match_ - prev_start_, config_.search.delta_minus,
                                          config_.search.delta_plus)
                        : search_full(loop, p, v);
        break;
      case SearchKind::TimePenalized:
        h = search_time_penalized(loop, p, v, k - prev_start_);
        break;
    }
    const Index match = prev_start_ + h;
    // Loop boundaries follow the offset-free phase: with a tethered offset the
    // shifted phase wraps mid-loop, which would split the reference loop.
    const Phase raw = compute_phase(match, prev_start_, cur_start_, Phase(0.0));
    const Phase phase(raw.value() + offset_.value());

    bool rolled = false;
    if (last_phase_ && k > cur_start_ && detect_cycle_boundary(raw, *last_phase_)) {
      if (k - cur_start_ >= min_loop_) {
        roll(k, h);
        rolled = true;
      } else {
        ++diagnostics_.suppressed_wraps;
      }
    }
    if (!rolled) last_match_ = match;
    last_phase_ = raw;
    return PhaseOutput{k, Status::Active, phase, match, loop_index_, false};
  }

  // Closes the current loop at k: it becomes the reference loop.
  void roll(Index k, Index match_in_old_loop) {
    delimiters_.push_back(k);
    prev_start_ = cur_start_;
    cur_start_ = k;
    ++loop_index_;
    last_match_ = prev_start_ + std::min(match_in_old_loop, cur_start_ - prev_start_ - 1);

    const auto drop = static_cast<std::ptrdiff_t>((prev_start_ - base_) * d());
    positions_.erase(positions_.begin(), positions_.begin() + drop);
    velocities_.erase(velocities_.begin(), velocities_.begin() + drop);
    base_ = prev_start_;
  }

  EstimatorConfig config_;
  Index warmup_length_;
  Index min_loop_;

  std::vector<double> positions_;   // column-major d x buffered, from sample base_
  std::vector<double> velocities_;
  Index base_ = 0;
  Index count_ = 0;

  Status status_ = Status::Collecting;
  Index loop_index_ = 1;
  Delimiters delimiters_;
  Index prev_start_ = 0;
  Index cur_start_ = 0;
  std::optional<Index> last_match_;
  std::optional<Phase> last_phase_;  // offset-free
  Phase offset_;
  std::vector<PhaseOutput> backfill_;
  EstimatorDiagnostics diagnostics_;
};

/// Runs the estimator over a whole recording with central-difference
/// velocities and warm-up back-fill. One output per sample.
inline std::vector<PhaseOutput> estimate(const TimeSeries& series, EstimatorConfig config) {
  config.sampling_time = series.sampling_time();
  config.dimension = series.dimension();
  config.backfill = true;
  Estimator estimator(config);
  if (series.size() < estimator.warmup_length())
    throw Error(ErrorKind::InsufficientWarmup,
                "series has " + std::to_string(series.size()) + " samples, warm-up needs " +
                    std::to_string(estimator.warmup_length()));

  const Matrix velocity = series.size() >= 2
                              ? differentiate(series.samples(), series.sampling_time(), DiffMode::Central)
                              : Matrix::Zero(series.dimension(), series.size());
  std::vector<PhaseOutput> outputs;
  outputs.reserve(static_cast<std::size_t>(series.size()));
  for (Index k = 0; k < series.size(); ++k) {
    outputs.push_back(estimator.step(std::span<const double>(series.samples().col(k).data(),
                                                             static_cast<std::size_t>(series.dimension())),
                                     std::span<const double>(velocity.col(k).data(),
                                                             static_cast<std::size_t>(series.dimension()))));
    for (auto& out : estimator.take_backfill()) outputs[static_cast<std::size_t>(out.sample_index)] = out;
  }
  return outputs;
}

inline PhaseSeries phases_of(const std::vector<PhaseOutput>& outputs) {
  PhaseSeries phases;
  phases.reserve(outputs.size());
  for (const auto& out : outputs) phases.push_back(out.phase);
  return phases;
}

}  // namespace rope
