#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include "rope/evaluation.hpp"
#include "rope/generators.hpp"

using namespace rope;

namespace {

constexpr double kPi = std::numbers::pi;

// Minimum over every monotone coupling path of the largest matched distance.
double brute_force_frechet(const Matrix& a, const Matrix& b) {
  double best = std::numeric_limits<double>::infinity();
  std::function<void(Index, Index, double)> walk = [&](Index i, Index j, double worst) {
    worst = std::max(worst, (a.col(i) - b.col(j)).norm());
    if (i == a.cols() - 1 && j == b.cols() - 1) {
      best = std::min(best, worst);
      return;
    }
    if (i + 1 < a.cols()) walk(i + 1, j, worst);
    if (j + 1 < b.cols()) walk(i, j + 1, worst);
    if (i + 1 < a.cols() && j + 1 < b.cols()) walk(i + 1, j + 1, worst);
  };
  walk(0, 0, 0.0);
  return best;
}

Matrix random_curve(std::mt19937_64& rng, Index d, Index n) {
  std::normal_distribution<double> g;
  Matrix m(d, n);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

PhaseSeries random_phases(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  std::bernoulli_distribution defined(0.8);
  PhaseSeries out(n);
  for (auto& p : out)
    if (defined(rng)) p = Phase(u(rng));
  return out;
}

}  // namespace

// --- benchmark_phase ---------------------------------------------------------

TEST(BenchmarkPhase, TwoIdenticalRamps) {
  const PhaseSeries b = benchmark_phase(Delimiters({0, 10, 20}), 20);
  ASSERT_EQ(b.size(), 20u);
  for (std::size_t k = 0; k < 10; ++k) {
    ASSERT_TRUE(b[k] && b[k + 10]);
    EXPECT_EQ(*b[k], *b[k + 10]);
    EXPECT_NEAR(b[k]->value(), 2.0 * kPi * static_cast<double>(k) / 10.0, 1e-12);
  }
}

TEST(BenchmarkPhase, SinglePeriodDefinedOnlyInside) {
  const PhaseSeries b = benchmark_phase(Delimiters({5, 15}), 25);
  for (std::size_t k = 0; k < b.size(); ++k) EXPECT_EQ(static_cast<bool>(b[k]), k >= 5 && k < 15) << k;
}

TEST(BenchmarkPhase, NeedsTwoDelimiters) {
  EXPECT_THROW(benchmark_phase(Delimiters({3}), 10), Error);
  EXPECT_THROW(benchmark_phase(Delimiters(), 10), Error);
}

// --- error_stats -------------------------------------------------------------

TEST(ErrorStats, IdentityAndAntipodalOffset) {
  const PhaseSeries b = benchmark_phase(Delimiters({0, 13, 29, 40}), 40);
  const ErrorStats same = error_stats(b, b);
  EXPECT_EQ(same.mean, 0.0);
  EXPECT_EQ(same.variance, 0.0);
  EXPECT_EQ(same.n_valid, 40);

  PhaseSeries shifted = b;
  for (auto& p : shifted) p = Phase(p->value() + kPi);
  const ErrorStats anti = error_stats(shifted, b);
  EXPECT_NEAR(anti.mean, kPi, 1e-12);
  EXPECT_NEAR(anti.variance, 0.0, 1e-20);
}

TEST(ErrorStats, PopulationVarianceOverDefinedSamples) {
  PhaseSeries est{Phase(0.0), Phase(0.0), std::nullopt, Phase(0.0)};
  PhaseSeries bmk{Phase(0.1), Phase(0.3), Phase(1.0), std::nullopt};
  const ErrorStats s = error_stats(est, bmk);
  EXPECT_EQ(s.n_valid, 2);
  EXPECT_NEAR(s.mean, 0.2, 1e-12);
  EXPECT_NEAR(s.variance, 0.01, 1e-12);
  ASSERT_EQ(s.per_sample.size(), 4u);
  EXPECT_FALSE(s.per_sample[2]);
  EXPECT_FALSE(s.per_sample[3]);
}

TEST(ErrorStats, EmptyOverlapAndLengthMismatch) {
  PhaseSeries est{Phase(0.0), std::nullopt};
  PhaseSeries bmk{std::nullopt, Phase(1.0)};
  try {
    error_stats(est, bmk);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyOverlap);
  }
  EXPECT_THROW(error_stats(est, PhaseSeries(3)), Error);
}

TEST(ErrorStatsProperty, IdentityAndSymmetry) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const PhaseSeries a = random_phases(rng, 64), b = random_phases(rng, 64);
    const ErrorStats self = error_stats(a, a);
    EXPECT_EQ(self.mean, 0.0);
    EXPECT_EQ(self.variance, 0.0);
    const ErrorStats ab = error_stats(a, b), ba = error_stats(b, a);
    EXPECT_EQ(ab.mean, ba.mean);
    EXPECT_EQ(ab.variance, ba.variance);
    EXPECT_EQ(ab.n_valid, ba.n_valid);
    EXPECT_GE(ab.mean, 0.0);
    EXPECT_LE(ab.mean, kPi);
    EXPECT_GE(ab.variance, 0.0);
  }
}

// --- discrete_frechet --------------------------------------------------------

TEST(DiscreteFrechet, IdenticalAndTranslated) {
  std::mt19937_64 rng(8);
  const Matrix a = random_curve(rng, 3, 20);
  EXPECT_EQ(discrete_frechet(a, a), 0.0);
  const Vector t = Vector::LinSpaced(3, 0.5, 1.5);
  EXPECT_NEAR(discrete_frechet(a, a.colwise() + t), t.norm(), 1e-12);
}

TEST(DiscreteFrechet, HandExample) {
  Matrix a(2, 3), b(2, 3);
  a << 0, 1, 2, 0, 0, 0;
  b << 0, 1, 2, 1, 2, 1;
  // The diagonal coupling has distances 1, 2, 1; every other coupling pairs a
  // point of a with a farther point of b, so the distance is 2.
  EXPECT_NEAR(brute_force_frechet(a, b), 2.0, 1e-12);
  EXPECT_NEAR(discrete_frechet(a, b), 2.0, 1e-12);
}

TEST(DiscreteFrechet, MatchesBruteForceOnShortPolylines) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const Index m = 1 + trial % 4, n = 1 + (trial / 4) % 4;
    const Matrix a = random_curve(rng, 2, m), b = random_curve(rng, 2, n);
    EXPECT_NEAR(discrete_frechet(a, b), brute_force_frechet(a, b), 1e-12);
  }
}

TEST(DiscreteFrechet, InvalidInput) {
  EXPECT_THROW(discrete_frechet(Matrix(2, 0), Matrix::Zero(2, 3)), Error);
  EXPECT_THROW(discrete_frechet(Matrix::Zero(2, 2), Matrix::Zero(3, 2)), Error);
}

TEST(DiscreteFrechetProperty, MetricAxioms) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix a = random_curve(rng, 3, 5), b = random_curve(rng, 3, 7), c = random_curve(rng, 3, 4);
    const double ab = discrete_frechet(a, b), ba = discrete_frechet(b, a);
    EXPECT_EQ(ab, ba);
    EXPECT_LE(ab, discrete_frechet(a, c) + discrete_frechet(c, b) + 1e-12);
    EXPECT_GE(ab, 0.0);
  }
}

// --- compare_report ----------------------------------------------------------

TEST(CompareReport, CosineAllMethodsAccurate) {
  const Index L = 100, n = 3000;
  Matrix m(1, n);
  for (Index k = 0; k < n; ++k) m(0, k) = std::cos(2.0 * kPi * static_cast<double>(k) / L);
  std::vector<Index> maxima;
  for (Index k = 0; k <= n; k += L) maxima.push_back(k);
  CompareConfig cfg;
  cfg.rope.tau_max = 1.2;
  cfg.pca_t = PcaTConfig{0.1, 2.4};
  const std::array methods{Method::Rope, Method::PcaT, Method::PcaH};
  const CompareReport report = compare_report(TimeSeries(0.01, m), Delimiters(maxima), methods, cfg);
  ASSERT_EQ(report.results.size(), 3u);
  EXPECT_FALSE(report.all_failed());
  for (const auto& r : report.results) {
    ASSERT_TRUE(r.error.empty()) << r.error;
    ASSERT_TRUE(r.stats);
    EXPECT_LE(r.stats->mean, 0.3) << method_name(r.method);
  }
}

TEST(CompareReport, PlateauFavoursTimePenalizedSearch) {
  SyntheticSpec spec;
  spec.template_loop = template_loop(TemplateKind::Plateau, 200);
  spec.period_jitter = 0.03;
  spec.amplitude_noise = 0.002;
  spec.n_periods = 15;
  const SyntheticSignal sig = synth_pseudo_periodic(spec, 4);
  CompareConfig full;
  full.rope.tau_max = 2.3;
  CompareConfig penalized = full;
  penalized.rope.search.kind = SearchKind::TimePenalized;
  const std::array methods{Method::Rope};
  const auto a = compare_report(sig.series, sig.delimiters, methods, full);
  const auto b = compare_report(sig.series, sig.delimiters, methods, penalized);
  ASSERT_TRUE(a.results[0].stats && b.results[0].stats);
  EXPECT_LT(b.results[0].stats->mean, a.results[0].stats->mean);
}

TEST(CompareReport, MethodFailureIsRecordedWithoutAborting) {
  const Index L = 50, n = 400;
  Matrix m(1, n);
  for (Index k = 0; k < n; ++k) m(0, k) = std::cos(2.0 * kPi * static_cast<double>(k) / L);
  std::vector<Index> maxima;
  for (Index k = 0; k <= n; k += L) maxima.push_back(k);
  CompareConfig cfg;
  cfg.rope.tau_max = 10.0;  // warm-up longer than the record
  const std::array methods{Method::Rope, Method::PcaH};
  const CompareReport report = compare_report(TimeSeries(0.01, m), Delimiters(maxima), methods, cfg);
  const MethodResult* rope = report.find(Method::Rope);
  const MethodResult* pcah = report.find(Method::PcaH);
  ASSERT_TRUE(rope && pcah);
  EXPECT_FALSE(rope->error.empty());
  EXPECT_FALSE(rope->stats);
  EXPECT_TRUE(pcah->error.empty());
  EXPECT_TRUE(pcah->stats);
  EXPECT_FALSE(report.all_failed());
}

TEST(CompareReport, TrimsToFirstDelimiterAndIsDeterministic) {
  SyntheticSpec spec;
  spec.template_loop = template_loop(TemplateKind::Infinity, 90);
  spec.period_jitter = 0.05;
  spec.amplitude_noise = 0.01;
  spec.n_periods = 10;
  const SyntheticSignal sig = synth_pseudo_periodic(spec, 6);
  std::vector<Index> later(sig.delimiters.indices().begin() + 1, sig.delimiters.indices().end());
  CompareConfig cfg;
  cfg.rope.tau_max = 1.1;
  cfg.pca_t = PcaTConfig{0.1, 2.2};
  const std::array methods{Method::Rope, Method::PcaT, Method::PcaH};
  const auto a = compare_report(sig.series, Delimiters(later), methods, cfg);
  const auto b = compare_report(sig.series, Delimiters(later), methods, cfg);
  EXPECT_EQ(a.start, later.front());
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    EXPECT_EQ(a.results[i].phases, b.results[i].phases);
    for (Index k = 0; k < a.start; ++k) EXPECT_FALSE(a.results[i].phases[static_cast<std::size_t>(k)]);
  }
  // Every benchmark sample is covered by the ROPE output after the trim.
  const auto& rope = a.results[0].phases;
  for (Index k = a.start; k < sig.series.size(); ++k) EXPECT_TRUE(rope[static_cast<std::size_t>(k)]);
}
