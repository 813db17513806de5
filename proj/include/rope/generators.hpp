#pragma once

// Synthetic signals with known ground truth: Rossler trajectories with
// Poincare-section delimiters, jittered repetitions of a template loop, and
// half-period-shifted signal pairs for tethered-mode checks.

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "rope/error.hpp"
#include "rope/estimator.hpp"
#include "rope/signal_core.hpp"

namespace rope {

struct RosslerParams {
  double a = 0.2;
  double b = 0.2;
  double c = 3.7;
  Eigen::Vector3d initial_state{0.1, 0.1, 0.1};
  double sampling_time = 0.01;
  double duration = 60.0;
  double transient = 200.0;   // integrated but not returned
  double internal_step = 0.0; // 0 selects min(T_s, 0.01 / max(1, c))
};

/// The five parameter sets used for the chaotic benchmark trajectories.
inline RosslerParams rossler_preset(int preset) {
  static constexpr std::array<std::array<double, 3>, 5> kPresets{{
      {0.2, 0.2, 3.7},
      {0.1, 0.1, 9.0},
      {0.15, 0.25, 5.5},
      {0.18, 0.22, 4.9},
      {0.12, 0.28, 9.15},
  }};
  if (preset < 1 || preset > 5) throw Error(ErrorKind::InvalidInput, "Rossler preset must be 1..5");
  RosslerParams params;
  params.a = kPresets[static_cast<std::size_t>(preset - 1)][0];
  params.b = kPresets[static_cast<std::size_t>(preset - 1)][1];
  params.c = kPresets[static_cast<std::size_t>(preset - 1)][2];
  return params;
}

/// Fixed-step RK4 integration of the Rossler system, subsampled to T_s.
inline TimeSeries rossler_integrate(const RosslerParams& params) {
  if (!(params.sampling_time > 0.0) || !(params.duration > 0.0) || params.transient < 0.0)
    throw Error(ErrorKind::InvalidInput, "Rossler sampling time and duration must be positive");

  const double h_max = params.internal_step > 0.0 ? params.internal_step
                                                  : std::min(params.sampling_time, 0.01 / std::max(1.0, params.c));
  const auto substeps = static_cast<Index>(std::ceil(params.sampling_time / h_max - 1e-9));
  const double h = params.sampling_time / static_cast<double>(substeps);

  const auto rhs = [&](const Eigen::Vector3d& s) {
    return Eigen::Vector3d(-s.y() - s.z(), s.x() + params.a * s.y(), params.b + s.z() * (s.x() - params.c));
  };

  const auto skip = static_cast<Index>(std::llround(params.transient / params.sampling_time));
  const auto count = static_cast<Index>(std::llround(params.duration / params.sampling_time));
  if (count < 1) throw Error(ErrorKind::InvalidInput, "Rossler duration shorter than one sample");

  Matrix out(3, count);
  Eigen::Vector3d state = params.initial_state;
  for (Index k = 0; k < skip + count; ++k) {
    if (k >= skip) out.col(k - skip) = state;
    for (Index s = 0; s < substeps; ++s) {
      const Eigen::Vector3d k1 = rhs(state);
      const Eigen::Vector3d k2 = rhs(state + 0.5 * h * k1);
      const Eigen::Vector3d k3 = rhs(state + 0.5 * h * k2);
      const Eigen::Vector3d k4 = rhs(state + h * k3);
      state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!state.allFinite() || state.cwiseAbs().maxCoeff() > 1e6)
      throw Error(ErrorKind::Divergence,
                  "Rossler trajectory diverged at t = " +
                      std::to_string(static_cast<double>(k + 1) * params.sampling_time) + " s");
  }
  return TimeSeries(params.sampling_time, std::move(out));
}

/// Delimiters at upward crossings of the half-plane {y = 0, x > 0}; each
/// delimiter is the first sample at or past the crossing. With
/// `crossings_per_loop` = 2 only every second crossing closes a loop, which
/// suits the period-2 (and period-2 banded) attractors of the presets.
inline Delimiters rossler_oracle_delimiters(const TimeSeries& series, int crossings_per_loop = 1) {
  if (crossings_per_loop < 1) throw Error(ErrorKind::InvalidInput, "crossings_per_loop must be >= 1");
  if (series.dimension() < 2) throw Error(ErrorKind::InvalidInput, "oracle delimiters need x and y");
  const Matrix& p = series.samples();
  std::vector<Index> indices;
  int crossings = 0;
  for (Index k = 1; k < series.size(); ++k) {
    if (p(1, k - 1) < 0.0 && p(1, k) >= 0.0 && p(0, k) > 0.0) {
      if (crossings++ % crossings_per_loop != 0) continue;
      if (indices.empty() || k - indices.back() >= 2) indices.push_back(k);
    }
  }
  if (indices.size() < 3)
    throw Error(ErrorKind::InsufficientData,
                "only " + std::to_string(indices.size()) + " section crossings found (need 3)");
  return Delimiters(std::move(indices));
}

// ---------------------------------------------------------------------------
// Template loops

enum class TemplateKind { Cosine, Circle, Infinity, Trefoil, Lissajous, Spiral, Plateau };

inline TemplateKind parse_template(std::string_view name) {
  if (name == "cosine") return TemplateKind::Cosine;
  if (name == "circle") return TemplateKind::Circle;
  if (name == "infinity") return TemplateKind::Infinity;
  if (name == "trefoil") return TemplateKind::Trefoil;
  if (name == "lissajous") return TemplateKind::Lissajous;
  if (name == "spiral") return TemplateKind::Spiral;
  if (name == "plateau") return TemplateKind::Plateau;
  throw Error(ErrorKind::InvalidInput, "unknown template '" + std::string(name) +
                                           "' (cosine, circle, infinity, trefoil, lissajous, spiral, plateau)");
}

/// One loop of `length` samples; the angle is 2 pi (s mod L) / L so repeated
/// loops are bit-identical.
inline Matrix template_loop(TemplateKind kind, Index length) {
  if (length < 2) throw Error(ErrorKind::InvalidInput, "template loop needs at least 2 samples");
  const auto angle = [length](Index s) { return kTwoPi * static_cast<double>(s % length) / static_cast<double>(length); };
  Matrix loop;
  switch (kind) {
    case TemplateKind::Cosine:
      loop.resize(1, length);
      for (Index s = 0; s < length; ++s) loop(0, s) = std::cos(angle(s));
      break;
    case TemplateKind::Circle:
      loop.resize(2, length);
      for (Index s = 0; s < length; ++s) loop.col(s) << std::cos(angle(s)), std::sin(angle(s));
      break;
    case TemplateKind::Infinity:
      loop.resize(3, length);
      for (Index s = 0; s < length; ++s) {
        const double t = angle(s);
        loop.col(s) << std::sin(t), 0.5 * std::sin(2.0 * t), 0.2 * std::cos(t);
      }
      break;
    case TemplateKind::Trefoil:
      loop.resize(3, length);
      for (Index s = 0; s < length; ++s) {
        const double t = angle(s);
        loop.col(s) << std::sin(t) + 2.0 * std::sin(2.0 * t), std::cos(t) - 2.0 * std::cos(2.0 * t),
            -std::sin(3.0 * t);
      }
      break;
    case TemplateKind::Lissajous:
      loop.resize(3, length);
      for (Index s = 0; s < length; ++s) {
        const double t = angle(s);
        loop.col(s) << 1.5 * std::cos(t), std::sin(t) + 0.3 * std::cos(2.0 * t), 0.7 * std::sin(t + 0.4);
      }
      break;
    case TemplateKind::Spiral:
      // Three nested turns that close into one loop.
      loop.resize(3, length);
      for (Index s = 0; s < length; ++s) {
        const double t = angle(s);
        const double r = 1.0 + 0.5 * std::cos(t);
        loop.col(s) << r * std::cos(3.0 * t), r * std::sin(3.0 * t), std::sin(t);
      }
      break;
    case TemplateKind::Plateau: {
      // ECG-like beat: an asymmetric deflection over 60% of the cycle, then flat.
      loop.resize(1, length);
      for (Index s = 0; s < length; ++s) {
        const double u = static_cast<double>(s % length) / static_cast<double>(length);
        if (u < 0.6) {
          const double w = u / 0.6;
          const double bump = std::sin(std::numbers::pi * w);
          loop(0, s) = bump * bump * (1.0 + 1.5 * w) - 0.4 * std::sin(kTwoPi * w) * bump;
        } else {
          loop(0, s) = 0.0;
        }
      }
      break;
    }
  }
  return loop;
}

// ---------------------------------------------------------------------------
// Jittered repetitions

struct SyntheticSpec {
  Matrix template_loop;          // d x L
  double period_jitter = 0.0;    // each repetition has length L (1 + u), u ~ U[-jitter, jitter]
  double amplitude_noise = 0.0;  // Gaussian std, relative to the loop half-range
  Index n_periods = 3;
  double time_shift = 0.5;       // fraction of a period, pairs only
  double sampling_time = 0.01;

  void validate() const {
    if (template_loop.cols() < 2 || template_loop.rows() < 1)
      throw Error(ErrorKind::InvalidInput, "template loop must be d x L with L >= 2");
    if (period_jitter < 0.0 || period_jitter >= 1.0) throw Error(ErrorKind::InvalidInput, "jitter must be in [0, 1)");
    if (amplitude_noise < 0.0) throw Error(ErrorKind::InvalidInput, "noise must be non-negative");
    if (n_periods < 3) throw Error(ErrorKind::InvalidInput, "need at least 3 periods");
    if (!(sampling_time > 0.0)) throw Error(ErrorKind::InvalidInput, "sampling time must be positive");
    if (time_shift < 0.0 || time_shift >= 1.0) throw Error(ErrorKind::InvalidInput, "time shift must be in [0, 1)");
  }
};

struct SyntheticSignal {
  TimeSeries series;
  Delimiters delimiters;  // exact, including the final end-of-series delimiter
};

/// Linear interpolation around a closed loop at fractional column `pos`.
inline Vector sample_loop(const Matrix& loop, double pos) {
  const Index length = loop.cols();
  const auto j = static_cast<Index>(std::floor(pos));
  const double frac = pos - static_cast<double>(j);
  const Index j0 = ((j % length) + length) % length;
  if (frac == 0.0) return loop.col(j0);
  return (1.0 - frac) * loop.col(j0) + frac * loop.col((j0 + 1) % length);
}

inline SyntheticSignal synth_pseudo_periodic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Matrix& tpl = spec.template_loop;
  const Index length = tpl.cols();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-spec.period_jitter, spec.period_jitter);

  std::vector<Index> kappas;
  for (Index i = 0; i < spec.n_periods; ++i) {
    const double u = spec.period_jitter > 0.0 ? jitter(rng) : 0.0;
    kappas.push_back(std::max<Index>(2, std::llround(static_cast<double>(length) * (1.0 + u))));
  }
  Index total = 0;
  std::vector<Index> delims{0};
  for (Index kappa : kappas) delims.push_back(total += kappa);

  Matrix samples(tpl.rows(), total);
  Index k = 0;
  for (Index kappa : kappas) {
    for (Index s = 0; s < kappa; ++s, ++k)
      samples.col(k) = sample_loop(tpl, static_cast<double>(s * length) / static_cast<double>(kappa));
  }

  if (spec.amplitude_noise > 0.0) {
    const double half_range = 0.5 * (tpl.rowwise().maxCoeff() - tpl.rowwise().minCoeff()).maxCoeff();
    std::normal_distribution<double> noise(0.0, spec.amplitude_noise * half_range);
    for (Index c = 0; c < samples.cols(); ++c)
      for (Index r = 0; r < samples.rows(); ++r) samples(r, c) += noise(rng);
  }
  return SyntheticSignal{TimeSeries(spec.sampling_time, std::move(samples)), Delimiters(std::move(delims))};
}

struct AntiPhasePair {
  TimeSeries first;
  TimeSeries second;  // `first` delayed by time_shift periods
  Delimiters first_delimiters;
  Delimiters second_delimiters;
  Matrix baseline;  // the clean template loop
  FrameOfReference frame;
};

/// Two signals tracing the same template, the second delayed by a fraction of a
/// period, sharing one baseline and one frame of reference.
inline AntiPhasePair anti_phase_pair(const SyntheticSpec& spec, std::uint64_t seed) {
  SyntheticSpec longer = spec;
  longer.n_periods = spec.n_periods + 1;
  const SyntheticSignal base = synth_pseudo_periodic(longer, seed);
  const Index lead = base.delimiters[1];
  const auto shift = static_cast<Index>(std::llround(spec.time_shift * static_cast<double>(lead)));
  const Index count = base.series.size() - lead;

  const auto shifted_delims = [&](Index start) {
    std::vector<Index> out;
    for (Index k : base.delimiters.indices())
      if (k - start >= 0 && k - start <= count) out.push_back(k - start);
    return Delimiters(std::move(out));
  };
  return AntiPhasePair{base.series.slice(lead, count),
                       base.series.slice(lead - shift, count),
                       shifted_delims(lead),
                       shifted_delims(lead - shift),
                       spec.template_loop,
                       FrameOfReference::identity(spec.template_loop.rows())};
}

}  // namespace rope
