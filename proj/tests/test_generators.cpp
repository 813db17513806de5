#include <gtest/gtest.h>

#include <cmath>

#include "rope/generators.hpp"

using namespace rope;

namespace {

double sup_norm(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Largest sup-norm step between neighbouring template columns (wrapping).
double template_lipschitz(const Matrix& tpl) {
  double lip = 0.0;
  for (Index s = 0; s < tpl.cols(); ++s)
    lip = std::max(lip, (tpl.col((s + 1) % tpl.cols()) - tpl.col(s)).cwiseAbs().maxCoeff());
  return lip;
}

}  // namespace

// --- Rossler -----------------------------------------------------------------

TEST(Rossler, StepHalvingConverges) {
  RosslerParams coarse = rossler_preset(1);
  coarse.transient = 0.0;
  coarse.duration = 5.0;
  coarse.internal_step = 0.01 / 3.7;
  RosslerParams fine = coarse;
  fine.internal_step = coarse.internal_step / 2.0;
  const TimeSeries a = rossler_integrate(coarse), b = rossler_integrate(fine);
  EXPECT_LE(sup_norm(a.samples() - b.samples()) / sup_norm(b.samples()), 1e-4);
}

TEST(Rossler, DeterministicBitIdentical) {
  const RosslerParams p = rossler_preset(3);
  EXPECT_EQ(rossler_integrate(p).samples(), rossler_integrate(p).samples());
}

TEST(Rossler, PresetsAreBoundedAndPseudoPeriodic) {
  for (int preset = 1; preset <= 5; ++preset) {
    const TimeSeries s = rossler_integrate(rossler_preset(preset));
    ASSERT_EQ(s.size(), 6000);
    EXPECT_TRUE(s.samples().allFinite());
    EXPECT_LT(sup_norm(s.samples()), 50.0) << "preset " << preset;
  }
  const RosslerParams two = rossler_preset(2);
  EXPECT_EQ(two.a, 0.1);
  EXPECT_EQ(two.c, 9.0);
  EXPECT_THROW(rossler_preset(0), Error);
  EXPECT_THROW(rossler_preset(6), Error);
}

TEST(Rossler, SimTwoHasLongerMoreVariablePeriods) {
  const auto periods = [](int preset) {
    const TimeSeries s = rossler_integrate(rossler_preset(preset));
    return verify_pseudo_periodicity(s, rossler_oracle_delimiters(s, 2));
  };
  const auto one = periods(1), two = periods(2);
  EXPECT_GT(two.tau_max, one.tau_max);
  EXPECT_GT(two.eps_t_max, one.eps_t_max);
}

TEST(Rossler, DivergenceNamesBlowUpTime) {
  RosslerParams p = rossler_preset(1);
  p.initial_state = Eigen::Vector3d(1e5, 1e5, 1e5);
  p.transient = 0.0;
  try {
    rossler_integrate(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Divergence);
    EXPECT_NE(std::string(e.what()).find("t = "), std::string::npos);
  }
}

TEST(Rossler, InvalidParamsRejected) {
  RosslerParams p;
  p.sampling_time = 0.0;
  EXPECT_THROW(rossler_integrate(p), Error);
  p = RosslerParams{};
  p.duration = -1.0;
  EXPECT_THROW(rossler_integrate(p), Error);
}

// --- oracle ------------------------------------------------------------------

TEST(RosslerOracle, SimOneSixtySecondsPerCrossing) {
  const TimeSeries s = rossler_integrate(rossler_preset(1));
  const Delimiters d = rossler_oracle_delimiters(s);
  EXPECT_GE(d.size(), 8u);
  for (double eps : verify_pseudo_periodicity(s, d).eps_t_per_pair) EXPECT_LE(eps, 0.2);
}

TEST(RosslerOracle, PlanarCircleDelimitersExactlyOnePeriodApart) {
  const Index L = 64;
  const Matrix loop = template_loop(TemplateKind::Circle, L);
  Matrix p = Matrix::Zero(3, 6 * L);
  for (Index k = 0; k < p.cols(); ++k) p.col(k).head(2) = loop.col(k % L);
  const Delimiters d = rossler_oracle_delimiters(TimeSeries(0.01, p));
  ASSERT_EQ(d.size(), 5u);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(d[i], static_cast<Index>(i + 1) * L);
}

TEST(RosslerOracle, SimFivePeriodsWithinTauMax) {
  const TimeSeries s = rossler_integrate(rossler_preset(5));
  for (int crossings : {1, 2}) {
    const Delimiters d = rossler_oracle_delimiters(s, crossings);
    EXPECT_GE(d.size(), 3u);
    EXPECT_LE(verify_pseudo_periodicity(s, d).tau_max, 12.27) << crossings;
  }
}

TEST(RosslerOracle, TwoCrossingsKeepEverySecondDelimiter) {
  const TimeSeries s = rossler_integrate(rossler_preset(1));
  const Delimiters one = rossler_oracle_delimiters(s, 1), two = rossler_oracle_delimiters(s, 2);
  ASSERT_EQ(two.size(), (one.size() + 1) / 2);
  for (std::size_t i = 0; i < two.size(); ++i) EXPECT_EQ(two[i], one[2 * i]);
}

TEST(RosslerOracle, TooFewCrossings) {
  const Matrix p = Matrix::Ones(3, 100);
  try {
    rossler_oracle_delimiters(TimeSeries(0.01, p));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientData);
  }
}

TEST(RosslerOracleProperty, ReproducibleAndIncreasing) {
  for (int preset = 1; preset <= 5; ++preset) {
    const TimeSeries s = rossler_integrate(rossler_preset(preset));
    const Delimiters a = rossler_oracle_delimiters(s, 2), b = rossler_oracle_delimiters(s, 2);
    EXPECT_EQ(a.indices(), b.indices());
    for (std::size_t i = 1; i < a.size(); ++i) EXPECT_GT(a[i], a[i - 1]);
  }
}

// --- templates and synthetic signals -----------------------------------------

TEST(Templates, ParseAndShape) {
  EXPECT_EQ(parse_template("trefoil"), TemplateKind::Trefoil);
  EXPECT_THROW(parse_template("square"), Error);
  EXPECT_EQ(template_loop(TemplateKind::Cosine, 10).rows(), 1);
  EXPECT_EQ(template_loop(TemplateKind::Circle, 10).rows(), 2);
  EXPECT_EQ(template_loop(TemplateKind::Spiral, 10).cols(), 10);
  EXPECT_THROW(template_loop(TemplateKind::Circle, 1), Error);
}

TEST(Synth, NoJitterNoNoiseIsExactlyPeriodic) {
  SyntheticSpec spec;
  spec.template_loop = template_loop(TemplateKind::Lissajous, 90);
  spec.n_periods = 5;
  const SyntheticSignal sig = synth_pseudo_periodic(spec, 1);
  EXPECT_EQ(sig.series.size(), 450);
  const auto report = verify_pseudo_periodicity(sig.series, sig.delimiters);
  EXPECT_EQ(report.eps_t_max, 0.0);
  EXPECT_EQ(report.eps_s_max, 0.0);
}

TEST(Synth, JitterFivePercentBound) {
  SyntheticSpec spec;
  spec.template_loop = template_loop(TemplateKind::Trefoil, 200);
  spec.period_jitter = 0.05;
  spec.n_periods = 40;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SyntheticSignal sig = synth_pseudo_periodic(spec, seed);
    EXPECT_LE(verify_pseudo_periodicity(sig.series, sig.delimiters).eps_t_max, 0.106) << seed;
  }
}

TEST(Synth, PlateauTemplateIsFortyPercentFlat) {
  SyntheticSpec spec;
  spec.template_loop = template_loop(TemplateKind::Plateau, 250);
  spec.n_periods = 4;
  const SyntheticSignal sig = synth_pseudo_periodic(spec, 0);
  Index flat = 0;
  for (Index k = 0; k < sig.series.size(); ++k) flat += sig.series.samples()(0, k) == 0.0 ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(flat) / static_cast<double>(sig.series.size()), 0.4, 0.01);
}

TEST(Synth, DeterministicGivenSeed) {
  SyntheticSpec spec;
  spec.template_loop = template_loop(TemplateKind::Circle, 50);
  spec.period_jitter = 0.1;
  spec.amplitude_noise = 0.05;
  const auto a = synth_pseudo_periodic(spec, 42), b = synth_pseudo_periodic(spec, 42),
             c = synth_pseudo_periodic(spec, 43);
  EXPECT_EQ(a.series.samples(), b.series.samples());
  EXPECT_EQ(a.delimiters.indices(), b.delimiters.indices());
  EXPECT_NE(a.series.samples(), c.series.samples());
}

TEST(Synth, InvalidSpecRejected) {
  SyntheticSpec spec;
  spec.template_loop = template_loop(TemplateKind::Circle, 50);
  spec.n_periods = 2;
  EXPECT_THROW(synth_pseudo_periodic(spec, 0), Error);
  spec.n_periods = 3;
  spec.period_jitter = -0.1;
  EXPECT_THROW(synth_pseudo_periodic(spec, 0), Error);
  spec.period_jitter = 0.0;
  spec.amplitude_noise = -1.0;
  EXPECT_THROW(synth_pseudo_periodic(spec, 0), Error);
}

TEST(SynthProperty, TolerancesBoundedByJitterAndNoise) {
  const Index L = 120;
  for (TemplateKind kind : {TemplateKind::Circle, TemplateKind::Trefoil, TemplateKind::Lissajous}) {
    const Matrix tpl = template_loop(kind, L);
    const double lip = template_lipschitz(tpl);
    const double amplitude = sup_norm(tpl);
    const double half_range = 0.5 * (tpl.rowwise().maxCoeff() - tpl.rowwise().minCoeff()).maxCoeff();
    for (double jitter : {0.0, 0.05, 0.1}) {
      for (double noise : {0.0, 0.02, 0.05}) {
        SyntheticSpec spec;
        spec.template_loop = tpl;
        spec.period_jitter = jitter;
        spec.amplitude_noise = noise;
        spec.n_periods = 12;
        const SyntheticSignal sig = synth_pseudo_periodic(spec, 7);
        const auto report = verify_pseudo_periodicity(sig.series, sig.delimiters);
        // Rounding each length to whole samples adds half a sample on each side.
        const double lo = static_cast<double>(L) * (1.0 - jitter) - 0.5;
        const double hi = static_cast<double>(L) * (1.0 + jitter) + 0.5;
        EXPECT_LE(report.eps_t_max, hi / lo - 1.0 + 1e-12);
        // Template drift between aligned samples of two loops is at most
        // 2 L (hi - lo) / lo columns plus one interpolation step (none without
        // jitter); the noise of two samples stays inside 6 sigma each.
        const double sigma = noise * half_range;
        const double drift = jitter > 0.0 ? 2.0 * static_cast<double>(L) * (hi - lo) / lo + 1.0 : 0.0;
        const double bound = (lip * drift + 12.0 * sigma) / (amplitude - 6.0 * sigma);
        EXPECT_LE(report.eps_s_max, bound) << "jitter " << jitter << " noise " << noise;
      }
    }
  }
}

// --- anti-phase pairs --------------------------------------------------------

TEST(AntiPhasePair, HalfPeriodDelay) {
  SyntheticSpec spec;
  spec.template_loop = template_loop(TemplateKind::Trefoil, 100);
  spec.n_periods = 6;
  const AntiPhasePair pair = anti_phase_pair(spec, 0);
  ASSERT_EQ(pair.first.size(), pair.second.size());
  EXPECT_EQ(pair.first.size(), 600);
  EXPECT_EQ(pair.first_delimiters.front(), 0);
  EXPECT_EQ(pair.second_delimiters.front(), 50);
  EXPECT_EQ(pair.baseline, spec.template_loop);
  // The second signal shows at k the sample the first showed half a period earlier.
  for (Index k = 50; k < pair.first.size(); ++k)
    EXPECT_EQ(pair.second.samples().col(k), pair.first.samples().col(k - 50));
}

TEST(AntiPhasePair, ZeroShiftGivesIdenticalSignals) {
  SyntheticSpec spec;
  spec.template_loop = template_loop(TemplateKind::Circle, 80);
  spec.time_shift = 0.0;
  spec.period_jitter = 0.05;
  spec.amplitude_noise = 0.01;
  const AntiPhasePair pair = anti_phase_pair(spec, 3);
  EXPECT_EQ(pair.first.samples(), pair.second.samples());
  EXPECT_EQ(pair.first_delimiters.indices(), pair.second_delimiters.indices());
}
