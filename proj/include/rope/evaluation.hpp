#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <exception>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rope/baselines.hpp"
#include "rope/error.hpp"
#include "rope/estimator.hpp"
#include "rope/signal_core.hpp"

namespace rope {

/// Ground-truth sawtooth from annotated delimiters (zero offset).
inline PhaseSeries benchmark_phase(const Delimiters& delims, Index length) {
  if (delims.size() < 2) throw Error(ErrorKind::InvalidInput, "benchmark needs at least 2 delimiters");
  return sawtooth_phase(delims, Phase(0.0), length);
}

struct ErrorStats {
  double mean = 0.0;
  double variance = 0.0;  // population
  std::vector<std::optional<double>> per_sample;
  Index n_valid = 0;
};

inline ErrorStats error_stats(const PhaseSeries& estimate, const PhaseSeries& benchmark) {
  if (estimate.size() != benchmark.size())
    throw Error(ErrorKind::InvalidInput, "phase sequences differ in length");
  ErrorStats stats;
  stats.per_sample.resize(estimate.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < estimate.size(); ++k) {
    if (!estimate[k] || !benchmark[k]) continue;
    const double e = circular_error(*estimate[k], *benchmark[k]);
    stats.per_sample[k] = e;
    sum += e;
    ++stats.n_valid;
  }
  if (stats.n_valid == 0) throw Error(ErrorKind::EmptyOverlap, "no sample has both phases defined");
  stats.mean = sum / static_cast<double>(stats.n_valid);
  double sq = 0.0;
  for (const auto& e : stats.per_sample)
    if (e) sq += (*e - stats.mean) * (*e - stats.mean);
  stats.variance = sq / static_cast<double>(stats.n_valid);
  return stats;
}

/// Discrete Frechet distance (Euclidean ground metric) between two polylines
/// given as d x m and d x n matrices.
inline double discrete_frechet(const Matrix& a, const Matrix& b) {
  if (a.cols() < 1 || b.cols() < 1) throw Error(ErrorKind::InvalidInput, "Frechet distance needs non-empty curves");
  if (a.rows() != b.rows()) throw Error(ErrorKind::InvalidInput, "curves differ in dimension");
  const Index m = a.cols(), n = b.cols();
  std::vector<double> prev(static_cast<std::size_t>(n)), cur(static_cast<std::size_t>(n));
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double dist = (a.col(i) - b.col(j)).norm();
      double reach;
      if (i == 0 && j == 0) reach = dist;
      else if (i == 0) reach = std::max(cur[static_cast<std::size_t>(j - 1)], dist);
      else if (j == 0) reach = std::max(prev[0], dist);
      else
        reach = std::max(std::min({prev[static_cast<std::size_t>(j)], prev[static_cast<std::size_t>(j - 1)],
                                   cur[static_cast<std::size_t>(j - 1)]}),
                         dist);
      cur[static_cast<std::size_t>(j)] = reach;
    }
    std::swap(prev, cur);
  }
  return prev[static_cast<std::size_t>(n - 1)];
}

// ---------------------------------------------------------------------------
// Method comparison

enum class Method { Rope, PcaT, PcaH };

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::Rope: return "rope";
    case Method::PcaT: return "pca-t";
    case Method::PcaH: return "pca-h";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view name) {
  if (name == "rope") return Method::Rope;
  if (name == "pca-t") return Method::PcaT;
  if (name == "pca-h") return Method::PcaH;
  return std::nullopt;
}

struct CompareConfig {
  EstimatorConfig rope;  // sampling time and dimension are taken from the series
  PcaTConfig pca_t;
  double hilbert_edge_fraction = 0.05;  // PCA-H samples excluded at each end
};

struct MethodResult {
  Method method = Method::Rope;
  PhaseSeries phases;  // full length; undefined where the method gives nothing
  std::optional<ErrorStats> stats;
  std::string error;   // non-empty when the method failed
};

struct CompareReport {
  Index start = 0;  // first benchmark delimiter; estimators run from here
  PhaseSeries benchmark;
  std::vector<MethodResult> results;

  bool all_failed() const {
    return std::all_of(results.begin(), results.end(), [](const MethodResult& r) { return !r.error.empty(); });
  }
  const MethodResult* find(Method m) const {
    for (const auto& r : results)
      if (r.method == m) return &r;
    return nullptr;
  }
};

namespace detail {

inline PhaseSeries run_method(Method method, const TimeSeries& trimmed, const CompareConfig& config) {
  switch (method) {
    case Method::Rope:
      return phases_of(estimate(trimmed, config.rope));
    case Method::PcaT:
      return pca_t(trimmed, config.pca_t);
    case Method::PcaH: {
      PhaseSeries phases = pca_h(trimmed);
      const auto edge = static_cast<std::size_t>(
          std::ceil(config.hilbert_edge_fraction * static_cast<double>(phases.size())));
      for (std::size_t k = 0; k < phases.size(); ++k)
        if (k < edge || k + edge >= phases.size()) phases[k].reset();
      return phases;
    }
  }
  return {};
}

}  // namespace detail

/// Runs each method on the series from its first benchmark delimiter onward (so
/// an untethered estimator's phase zero coincides with the benchmark's) and
/// scores it against the benchmark sawtooth. A failing method is recorded in
/// its result and does not stop the others.
inline CompareReport compare_report(const TimeSeries& series, const Delimiters& delims,
                                    std::span<const Method> methods, const CompareConfig& config) {
  CompareReport report;
  report.benchmark = benchmark_phase(delims, series.size());
  report.start = delims.front();
  if (report.start >= series.size() - 1)
    throw Error(ErrorKind::InvalidInput, "first delimiter leaves no samples to estimate");
  const TimeSeries trimmed = series.slice(report.start, series.size() - report.start);

  std::vector<std::future<PhaseSeries>> jobs;
  for (Method m : methods)
    jobs.push_back(std::async(std::launch::async, [m, &trimmed, &config] { return detail::run_method(m, trimmed, config); }));

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    MethodResult result;
    result.method = methods[i];
    result.phases.resize(static_cast<std::size_t>(series.size()));
    try {
      const PhaseSeries phases = jobs[i].get();
      std::copy(phases.begin(), phases.end(), result.phases.begin() + report.start);
      result.stats = error_stats(result.phases, report.benchmark);
    } catch (const std::exception& e) {
      result.error = e.what();
    }
    report.results.push_back(std::move(result));
  }
  return report;
}

}  // namespace rope
