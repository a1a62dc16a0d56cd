#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "gloc/analytic.hpp"
#include "gloc/units.hpp"
#include "oracle.hpp"

using namespace gloc;

namespace {

ScenarioConfig defaults() { return ScenarioConfig{}; }

double probe_s(const ScenarioConfig& cfg) {
  return cfg.gamma * std::pow(cfg.tau * cfg.r_bc, cfg.alpha) / cfg.rho_vt;
}

double capture(const ScenarioConfig& cfg, Scheme s, const TrafficModel& tm) {
  return capture_probability(cfg, s, tm);
}

}  // namespace

// ---------------------------------------------------------------------------
// Integration regions

TEST(Region, SlpProbeClusterSplitsAtReceiver) {
  const auto r = interference_region(0, 10.0, 0.0, Scheme::SLP, defaults());
  EXPECT_EQ(r, IntervalSet({{0.0, 11.0}, {0.0, 31.0}}));
}

TEST(Region, MlpProbeClusterFullyExcludedWhenSafetyCoversSegment) {
  const auto cfg = defaults();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uv(-21.0, 21.0), ux(-500.0, 500.0);
  for (int i = 0; i < 200; ++i) EXPECT_TRUE(interference_region(0, ux(rng), uv(rng), Scheme::MLP, cfg).empty());
}

TEST(Region, BeyondRangeIsEmpty) {
  const auto cfg = defaults();
  EXPECT_TRUE(interference_region(134, 150.0, 0.0, Scheme::SLP, cfg).empty());
  EXPECT_TRUE(interference_region(-140, 150.0, 0.0, Scheme::SLP, cfg).empty());
  EXPECT_FALSE(interference_region(133, 150.0, 0.0, Scheme::SLP, cfg).empty());
}

TEST(Region, MlpExclusionsCutAroundReceiverAndProbe) {
  auto cfg = defaults();
  cfg.d_safe = 10.0;
  // offsets y - x span [-26, 16]; removing (-10, 10) and (-30, -10) leaves [10, 16]
  const auto r = interference_region(0, 5.0, -15.0, Scheme::MLP, cfg);
  EXPECT_EQ(r, IntervalSet({{10.0, 16.0}}));
}

TEST(Region, LengthsMatchSegmentMeasure) {
  const auto cfg = defaults();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ux(-300.0, 300.0);
  for (int i = 0; i < 200; ++i) {
    const double x = ux(rng);
    double total = 0.0;
    const auto [first, last] = co_channel_range(cfg);
    for (auto c = first; c <= last; ++c) total += interference_region(c, x, 0.0, Scheme::SLP, cfg).total_length();
    // every co-channel segment fully inside [x - d_max, x + d_max] contributes d_segment
    double expect = 0.0;
    for (auto c = first; c <= last; ++c) {
      const double lo = std::max(c * 420.0 - 21.0, x - cfg.d_max);
      const double hi = std::min(c * 420.0 + 21.0, x + cfg.d_max);
      expect += std::max(0.0, hi - lo);
    }
    EXPECT_NEAR(total, expect, 1e-8);
  }
}

// ---------------------------------------------------------------------------
// Laplace transform

TEST(Laplace, TrivialValues) {
  const auto cfg = defaults();
  EXPECT_EQ(laplace_interference({probe_s(cfg), 150.0, 0.0, Scheme::SLP, 0.0}, cfg), 1.0);
  EXPECT_EQ(laplace_interference({0.0, 150.0, 0.0, Scheme::MLP, 0.25}, cfg), 1.0);
  EXPECT_THROW(laplace_interference({-1.0, 150.0, 0.0, Scheme::SLP, 0.25}, cfg), DomainError);
}

TEST(Laplace, MatchesPositionSpaceIntegral) {
  auto cfg = defaults();
  cfg.d_max = 5000.0;  // keeps the reference integration quick
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    const Scheme scheme = i % 2 ? Scheme::MLP : Scheme::SLP;
    cfg.n_ar = 1 + static_cast<std::int64_t>(12 * u(rng));
    cfg.d_safe = 50.0 * u(rng);
    const double v = -21.0 + 42.0 * u(rng);
    const double x = v + 400.0 * (u(rng) - 0.3);
    const double s = probe_s(cfg) * std::pow(10.0, 2.0 * u(rng) - 1.0);
    const double p_a = u(rng);
    const double got = laplace_interference({s, x, v, scheme, p_a}, cfg);
    const double ref = oracle::laplace(cfg, scheme, p_a, s, x, v);
    EXPECT_NEAR(got, ref, 1e-9 * ref) << "case " << i;
  }
}

TEST(Laplace, DecreasingInArgumentAndDensity) {
  const auto cfg = defaults();
  const double s0 = probe_s(cfg);
  for (Scheme scheme : {Scheme::SLP, Scheme::MLP}) {
    double prev = 1.0;
    for (double f : {0.01, 0.1, 1.0, 10.0, 100.0}) {
      const double l = laplace_interference({s0 * f, 160.0, 10.0, scheme, 0.25}, cfg);
      EXPECT_LT(l, prev);
      EXPECT_GT(l, 0.0);
      prev = l;
    }
    prev = 1.0;
    for (double p : {0.05, 0.2, 0.5, 1.0}) {
      const double l = laplace_interference({s0, 160.0, 10.0, scheme, p}, cfg);
      EXPECT_LT(l, prev);
      prev = l;
    }
  }
}

TEST(Laplace, MlpReducesToOtherClustersWhenApplicable) {
  auto cfg = defaults();
  cfg.d_safe = 60.0;  // d_segment < d_safe < (n_ar - 1) d_segment
  cfg.lambda_lane = 0.008;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const double v = 21.0 * u(rng);
    const double x = 200.0 * u(rng);
    if (!mlp_simplification_applies(cfg, x)) continue;
    ++checked;
    const LaplaceQuery q{probe_s(cfg), x, v, Scheme::MLP, 0.25};
    EXPECT_NEAR(laplace_interference(q, cfg), laplace_interference_mlp_simplified(q, cfg), 1e-13);
  }
  EXPECT_GT(checked, 20);
}

TEST(Laplace, MlpSimplificationNeedsReceiverClearOfNeighbourClusters) {
  // Segment ordering and |x| < n_ar d_A / 2 hold, yet the receiver sits within
  // d_safe of the next co-channel segment, so the exclusion still matters.
  auto cfg = defaults();
  cfg.n_ar = 3;
  cfg.d_safe = 80.0;
  cfg.lambda_lane = 0.005;
  const double x = 60.0;
  EXPECT_FALSE(mlp_simplification_applies(cfg, x));
  const LaplaceQuery q{probe_s(cfg), x, 0.0, Scheme::MLP, 0.25};
  EXPECT_GT(laplace_interference(q, cfg), laplace_interference_mlp_simplified(q, cfg) * (1.0 + 1e-6));
}

TEST(Laplace, NoiseLimitedMlpSeesNoInterference) {
  auto cfg = defaults();
  cfg.n_ar = 2668;
  ASSERT_TRUE(noise_limited(cfg));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double v = -21.0 + 42.0 * u(rng);
    const double r = cfg.d_max * u(rng);
    const double x = u(rng) < 0.5 ? v + r : v - r;
    const double s = std::pow(10.0, 30.0 * u(rng));
    EXPECT_EQ(laplace_interference({s, x, v, Scheme::MLP, 1.0}, cfg), 1.0);
  }
}

TEST(Laplace, ManyResourcesLeaveOnlyTheProbeCluster) {
  auto cfg = defaults();
  cfg.n_ar = static_cast<std::int64_t>(std::ceil((2.0 * cfg.d_max + cfg.d_segment) / cfg.d_segment)) + 1;
  for (double v : {-20.0, 0.0, 15.0}) {
    const double x = v + cfg.r_bc;
    const double s_rho = probe_s(cfg) * cfg.rho_vt;
    double own = 0.0;
    for (const auto& iv : interference_region(0, x, v, Scheme::SLP, cfg))
      own += special::branch_integral(iv.lo, iv.hi, cfg.tau, cfg.alpha, s_rho);
    const double lam = derive_scheme(cfg, Scheme::SLP).lambda_abs * 0.25;
    EXPECT_NEAR(laplace_interference({probe_s(cfg), x, v, Scheme::SLP, 0.25}, cfg), std::exp(-lam * own),
                1e-12);
  }
}

// ---------------------------------------------------------------------------
// Capture probability

TEST(Capture, ReferenceValues) {
  // probe-averaged values from an independent scipy evaluation of the model
  const auto cfg = defaults();
  EXPECT_NEAR(capture(cfg, Scheme::SLP, NonPeriodic{}), 0.586650823624562, 1e-8);
  EXPECT_NEAR(capture(cfg, Scheme::SLP, Periodic{}), 0.9725897882645415, 1e-8);
  EXPECT_NEAR(capture(cfg, Scheme::MLP, NonPeriodic{}), 0.8263489233410622, 1e-8);
  EXPECT_NEAR(capture(cfg, Scheme::MLP, Periodic{}), 0.980284565196977, 1e-8);
  auto many = cfg;
  many.n_ar = 100;
  EXPECT_NEAR(capture(many, Scheme::MLP, NonPeriodic{}), 0.9955618339423267, 1e-8);
  EXPECT_NEAR(capture(many, Scheme::MLP, Periodic{}), 0.9954038537552701, 1e-8);
}

TEST(Capture, MatchesPositionSpaceOracleWithNonUniformProbe) {
  auto cfg = defaults();
  cfg.d_max = 3000.0;
  cfg.r_bc = 50.0;  // receiver ball reaches into the probe segment
  cfg.n_ar = 4;
  const auto d = capture_details(cfg, Scheme::MLP, NonPeriodic{});
  EXPECT_FALSE(d.uniform_path);
  EXPECT_NEAR(d.value, oracle::capture(cfg, Scheme::MLP, 0.25), 1e-7);
  EXPECT_NEAR(capture(cfg, Scheme::SLP, NonPeriodic{}), oracle::capture(cfg, Scheme::SLP, 0.25), 1e-7);
}

TEST(Capture, NoNoiseNoInterferersIsExactlyOne) {
  auto cfg = defaults();
  cfg.sigma_n2 = 0.0;
  EXPECT_EQ(capture(cfg, Scheme::SLP, NonPeriodic{0.0}), 1.0);
  EXPECT_EQ(capture(cfg, Scheme::MLP, NonPeriodic{0.0}), 1.0);
}

TEST(Capture, UniformPathEqualsGeneralWeightWhenBallMissesSegment) {
  for (double r_bc : {84.0, 150.0, 400.0}) {
    auto cfg = defaults();
    cfg.r_bc = r_bc;
    for (const TrafficModel tm : {TrafficModel{NonPeriodic{}}, TrafficModel{Periodic{}}}) {
      const auto u = capture_details(cfg, Scheme::MLP, tm, CapturePath::UniformAverage);
      const auto g = capture_details(cfg, Scheme::MLP, tm, CapturePath::GeneralWeight);
      EXPECT_NEAR(u.value, g.value, 1e-12);
      EXPECT_NEAR(g.weight_mass, 1.0, 1e-12);
      EXPECT_TRUE(capture_details(cfg, Scheme::MLP, tm).uniform_path);
    }
  }
}

TEST(Capture, UnnormalizedWeightsAreFlagged) {
  auto cfg = defaults();
  cfg.r_bc = 50.0;
  cfg.d_max = 3000.0;
  const auto d = capture_details(cfg, Scheme::MLP, NonPeriodic{});
  EXPECT_TRUE(d.weights_flagged);
  EXPECT_GT(std::abs(d.weight_mass - 1.0), 1e-6);
  EXPECT_NEAR(d.renormalized, d.value / d.weight_mass, 1e-15);

  cfg.r_bc = 30.0;  // receiver within d_safe of every probe position
  const auto z = capture_details(cfg, Scheme::MLP, NonPeriodic{});
  EXPECT_EQ(z.value, 0.0);
  EXPECT_EQ(z.weight_mass, 0.0);
}

TEST(Capture, PowerFactorization) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Scheme scheme : {Scheme::SLP, Scheme::MLP}) {
    for (int i = 0; i < 5; ++i) {
      auto a = defaults();
      a.rho_vt = units::dbm_hz_to_mw_hz(-80.0 + 50.0 * u(rng));
      auto b = a;
      b.rho_vt = units::dbm_hz_to_mw_hz(-80.0 + 50.0 * u(rng));
      const double fa = capture(a, scheme, NonPeriodic{});
      const double fb = capture(b, scheme, NonPeriodic{});
      const double c2 = noise_constant(a);
      EXPECT_NEAR(fa / fb, std::exp(-c2 * (1.0 / a.rho_vt - 1.0 / b.rho_vt)), 1e-10 * fa / fb);
    }
  }
}

TEST(Capture, MonotoneInThresholdActivityNoiseAndPower) {
  for (Scheme scheme : {Scheme::SLP, Scheme::MLP}) {
    double prev = 2.0;
    for (double g : {-10.0, -3.0, 0.0, 5.0, 12.0, 20.0}) {
      auto cfg = defaults();
      cfg.gamma = units::db_to_linear(g);
      const double f = capture(cfg, scheme, NonPeriodic{});
      EXPECT_LE(f, prev);
      prev = f;
    }
    prev = 2.0;
    for (double p : {0.0, 0.1, 0.3, 0.7, 1.0}) {
      const double f = capture(defaults(), scheme, NonPeriodic{p});
      EXPECT_LE(f, prev);
      prev = f;
    }
    prev = 2.0;
    for (double n : {-200.0, -170.0, -150.0, -130.0}) {
      auto cfg = defaults();
      cfg.sigma_n2 = units::dbm_hz_to_mw_hz(n);
      const double f = capture(cfg, scheme, NonPeriodic{});
      EXPECT_LE(f, prev);
      prev = f;
    }
    prev = -1.0;
    for (double r : {-90.0, -70.0, -50.0, -30.0}) {
      auto cfg = defaults();
      cfg.rho_vt = units::dbm_hz_to_mw_hz(r);
      const double f = capture(cfg, scheme, NonPeriodic{});
      EXPECT_GE(f, prev);
      prev = f;
    }
  }
}

TEST(Capture, MlpAboveSlpForNonPeriodicTraffic) {
  for (double g = -10.0; g <= 20.0; g += 5.0) {
    auto cfg = defaults();
    cfg.gamma = units::db_to_linear(g);
    EXPECT_GT(capture(cfg, Scheme::MLP, NonPeriodic{}), capture(cfg, Scheme::SLP, NonPeriodic{}));
  }
}

TEST(Capture, SlpPeriodicDecreasesWithResources) {
  // Own-segment load grows with n_ar. Up to n_ar = 11 a 5e-4 ripple remains
  // from where the receiver falls relative to the co-channel segments.
  auto at = [](int n) {
    auto cfg = defaults();
    cfg.n_ar = n;
    return capture(cfg, Scheme::SLP, Periodic{});
  };
  double prev = at(11);
  for (int n = 12; n <= 100; ++n) {
    const double f = at(n);
    EXPECT_LT(f, prev) << n;
    prev = f;
  }
  EXPECT_LT(at(100), at(1));
  EXPECT_LT(at(4), at(3));
  EXPECT_GT(at(11), at(4));
}

// ---------------------------------------------------------------------------
// Mean interference

TEST(MeanInterference, EmptyProcessIsZero) {
  const auto m = mean_interference(0.0, 0.0, Scheme::SLP, defaults(), NonPeriodic{0.0});
  EXPECT_EQ(m.value, 0.0);
  EXPECT_FALSE(m.divergent);
}

TEST(MeanInterference, DivergesInsideCoChannelSegment) {
  const auto m = mean_interference(0.0, 0.0, Scheme::SLP, defaults(), NonPeriodic{});
  EXPECT_TRUE(m.divergent);
  EXPECT_TRUE(std::isinf(m.value));
  EXPECT_FALSE(mean_interference(0.0, 0.0, Scheme::MLP, defaults(), NonPeriodic{}).divergent);
}

TEST(MeanInterference, FiniteBetweenSegments) {
  auto cfg = defaults();
  cfg.n_ar = 3;
  const auto m = mean_interference(63.0, 0.0, Scheme::SLP, cfg, NonPeriodic{});
  EXPECT_FALSE(m.divergent);
  EXPECT_GT(m.value, 0.0);
}

TEST(MeanInterference, EqualsLaplaceSlopeAtOrigin) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  while (checked < 30) {
    auto cfg = defaults();
    cfg.n_ar = 2 + static_cast<std::int64_t>(10 * u(rng));
    cfg.alpha = 1.3 + 2.5 * u(rng);
    const Scheme scheme = u(rng) < 0.5 ? Scheme::SLP : Scheme::MLP;
    const double v = -21.0 + 42.0 * u(rng);
    const double x = v + 300.0 * (u(rng) - 0.5);
    const auto m = mean_interference(x, v, scheme, cfg, NonPeriodic{0.3});
    if (m.divergent) continue;
    ++checked;
    // -ln L(s) is smooth in s; Richardson-extrapolated forward difference at 0
    const double h = 1e-7 / m.value;
    auto neglog = [&](double s) { return -std::log(laplace_interference({s, x, v, scheme, 0.3}, cfg)); };
    const double slope = (4.0 * neglog(h) - neglog(2.0 * h)) / (2.0 * h);
    EXPECT_NEAR(slope, m.value, 1e-4 * m.value);
  }
}

// ---------------------------------------------------------------------------
// Link metrics and power optimisation

TEST(LinkMetrics, RateAndEfficiencyFactorization) {
  auto cfg = defaults();
  cfg.sigma_n2 = 0.0;
  const auto lm = link_metrics(cfg, Scheme::MLP, NonPeriodic{0.0});
  EXPECT_EQ(lm.capture, 1.0);
  EXPECT_DOUBLE_EQ(lm.avg_br, 450e3 * std::log2(1.0 + cfg.gamma));
  EXPECT_DOUBLE_EQ(lm.avg_ee, std::log2(1.0 + cfg.gamma) / (cfg.rho_vt * 1e-3));
}

TEST(LinkMetrics, HundredResourcesPeriodic) {
  auto cfg = defaults();
  cfg.n_ar = 100;
  const auto lm = link_metrics(cfg, Scheme::MLP, Periodic{});
  EXPECT_NEAR(lm.avg_br, 9e6 / 200.0 * std::log2(1.0 + cfg.gamma) * lm.capture, 1e-9);
  // the model gives 0.99540 here, hence 9.216e4 rather than 9.236e4
  EXPECT_NEAR(lm.avg_br, 9.216e4, 5.0);
}

TEST(LinkMetrics, RateVanishesWithManyResources) {
  auto cfg = defaults();
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {100, 1000, 10000, 100000}) {
    cfg.n_ar = n;
    const double br = link_metrics(cfg, Scheme::MLP, NonPeriodic{}).avg_br;
    EXPECT_LT(br, prev);
    prev = br;
  }
  EXPECT_LT(prev, 100.0);
}

TEST(OptimalPower, HighReliabilityTarget) {
  const auto r = optimal_power(0.99, defaults(), Scheme::MLP, NonPeriodic{});
  EXPECT_NEAR(units::mw_hz_to_dbm_hz(r.rho_opt), -58.27, 0.05);
  EXPECT_NEAR(r.rho_opt, r.c2 / std::log(1.0 / 0.99), 1e-20);
  EXPECT_EQ(r.c2, noise_constant(defaults()));
}

TEST(OptimalPower, UnconstrainedBranch) {
  const auto a = optimal_power(0.2, defaults(), Scheme::SLP, Periodic{});
  const auto b = optimal_power(0.3, defaults(), Scheme::SLP, Periodic{});
  EXPECT_EQ(a.rho_opt, b.rho_opt);
  EXPECT_EQ(a.rho_opt, a.c2);
  EXPECT_NEAR(units::mw_hz_to_dbm_hz(a.rho_opt), -78.2, 0.05);
}

TEST(OptimalPower, ContinuousAtBranchBoundary) {
  const double e = std::exp(-1.0);
  const auto lo = optimal_power(e, defaults(), Scheme::MLP, Periodic{});
  const auto hi = optimal_power(std::nextafter(e, 1.0), defaults(), Scheme::MLP, Periodic{});
  EXPECT_NEAR(lo.rho_opt, hi.rho_opt, 1e-12 * lo.rho_opt);
  EXPECT_NEAR(lo.ee_opt, hi.ee_opt, 1e-9 * lo.ee_opt);
  EXPECT_NEAR(lo.capture_at_opt, hi.capture_at_opt, 1e-12);
}

TEST(OptimalPower, ResultInvariantsAndConsistency) {
  for (Scheme scheme : {Scheme::SLP, Scheme::MLP}) {
    for (double delta : {0.1, 0.5, 0.9, 0.99}) {
      const auto r = optimal_power(delta, defaults(), scheme, Periodic{});
      EXPECT_GT(r.capture_at_opt, 0.0);
      EXPECT_LE(r.capture_at_opt, r.c1);
      EXPECT_LE(r.c1, 1.0);
      auto at = defaults();
      at.rho_vt = r.rho_opt;
      const auto lm = link_metrics(at, scheme, Periodic{});
      EXPECT_NEAR(lm.capture, r.capture_at_opt, 1e-9);
      EXPECT_NEAR(lm.avg_ee, r.ee_opt, 1e-8 * r.ee_opt);
      // feasible neighbours are no better
      for (double f : {1.05, 1.5}) {
        auto nb = at;
        nb.rho_vt = r.rho_opt * f;
        EXPECT_LE(link_metrics(nb, scheme, Periodic{}).avg_ee, r.ee_opt * (1.0 + 1e-12));
      }
    }
  }
}

TEST(OptimalPower, Errors) {
  EXPECT_THROW(optimal_power(0.0, defaults(), Scheme::MLP, Periodic{}), DomainError);
  EXPECT_THROW(optimal_power(1.0, defaults(), Scheme::MLP, Periodic{}), DomainError);
  auto quiet = defaults();
  quiet.sigma_n2 = 0.0;
  EXPECT_THROW(optimal_power(0.5, quiet, Scheme::MLP, Periodic{}), DomainError);
}

TEST(OptimalPower, SchemeIndependentPower) {
  const auto a = optimal_power(0.9, defaults(), Scheme::SLP, NonPeriodic{});
  const auto b = optimal_power(0.9, defaults(), Scheme::MLP, Periodic{});
  EXPECT_EQ(a.rho_opt, b.rho_opt);
}

TEST(OptimalPower, EfficiencyFallsWithThreshold) {
  double prev = std::numeric_limits<double>::infinity();
  for (double g = -5.0; g <= 20.0; g += 1.0) {
    auto cfg = defaults();
    cfg.gamma = units::db_to_linear(g);
    const double ee = optimal_power(0.99, cfg, Scheme::MLP, NonPeriodic{}).ee_opt;
    EXPECT_LT(ee, prev) << g;
    prev = ee;
  }
}
