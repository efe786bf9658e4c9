// Copyright 2026 The collapse-sim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "collapse/verify.hpp"

namespace collapse {
namespace {

// Small grids keep these suites in the seconds range; the contract-scale runs
// live in the acceptance binary.
Grid small_grid() { return Grid(64, -8.0, 8.0); }

TEST(TestReport, OutcomeFollowsChecks) {
  TestReport r;
  r.add_check("le", 1.0, 1.0);
  r.add_check("lt", 0.5, 1.0, "<");
  r.add_check("ge", 0.02, 0.01, ">=");
  r.finalize();
  EXPECT_TRUE(r.pass());
  EXPECT_LE(r.statistic, r.threshold);

  r.add_check("strict", 1.0, 1.0, "<");
  r.finalize();
  EXPECT_FALSE(r.pass());
  EXPECT_GT(r.statistic, r.threshold);

  r.finalize(true);
  EXPECT_EQ(r.outcome, Outcome::inconclusive);
  EXPECT_EQ(to_string(r.outcome), "inconclusive");
}

TEST(TestReport, MarginSeparatesPassAndFail) {
  for (const char* cmp : {"<=", "<", ">="}) {
    for (double v : {0.0, 0.5, 0.999, 1.0, 1.001, 3.0}) {
      TestReport r;
      const Check& c = r.add_check("x", v, 1.0, cmp);
      EXPECT_EQ(c.pass, c.margin() <= 1.0) << cmp << " " << v;
    }
  }
}

TEST(TestReport, UnknownComparisonIsRejected) {
  TestReport r;
  EXPECT_THROW(r.add_check("x", 1.0, 1.0, "=="), Error);
}

TEST(TestReport, SerializationHasStableKeyOrder) {
  TestReport r;
  r.name = "demo";
  r.details["zeta"] = 1;
  r.details["alpha"] = 2;
  r.add_check("c", 0.1, 1.0);
  r.finalize();
  const std::string s = r.serialize();
  EXPECT_EQ(s, r.serialize());
  EXPECT_LT(s.find("\"name\""), s.find("\"outcome\""));
  EXPECT_LT(s.find("\"zeta\""), s.find("\"alpha\""));
  const Json back = Json::parse(s);
  EXPECT_EQ(back["pass"], true);
  EXPECT_EQ(back["checks"][0]["name"], "c");
}

TEST(TestFunctional, BoundedAndLipschitzRecorded) {
  const Grid g = small_grid();
  const WaveFunction ref = make_gaussian_packet(g, 0.3, 0.6, 0.0);
  const WaveFunction far = make_gaussian_packet(g, 1.0, 0.8, 0.4);
  const auto ov = TestFunctional::overlap(ref, 0.5);
  EXPECT_DOUBLE_EQ(ov(ref), 0.5);  // |<ref, ref>| = 1, capped
  EXPECT_LE(std::abs(ov(far)), 0.5);
  EXPECT_EQ(ov.lipschitz(), 1.0);

  const auto mp = TestFunctional::mean_position(2.0, 1.5);
  EXPECT_NEAR(mp(make_gaussian_packet(g, 0.7, 0.3, 0.0)), 0.7, 1e-6);
  EXPECT_DOUBLE_EQ(mp(make_gaussian_packet(g, 3.0, 0.3, 0.0)), 1.5);
  EXPECT_EQ(mp.lipschitz(), 4.0);

  const auto one = TestFunctional::constant();
  EXPECT_NEAR(one(far), 1.0, 1e-12);
  EXPECT_NEAR(one.evaluate({&far, &ref}), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(TestFunctional::overlap(ref, 0.5).evaluate({&ref, &ref}), 0.25);
}

TEST(TestFunctional, OverlapWithoutReferenceIsAnError) {
  TestFunctional f;
  f.kind = TestFunctional::Kind::overlap_modulus;
  EXPECT_THROW(f(make_gaussian_packet(small_grid(), 0.0, 1.0, 0.0)), Error);
}

TEST(WeightedMoments, NotSelfNormalized) {
  // E_P[g] = E_Q[w g], estimated by sum w g / N (weights are not rescaled).
  const std::vector<double> z{1.0, -2.0, 0.5};
  const std::vector<double> w{0.5, 1.5, 1.0};
  const double m1 = (0.5 * 1.0 + 1.5 * -2.0 + 1.0 * 0.5) / 3.0;
  const double m2 = (0.5 * 1.0 + 1.5 * 4.0 + 1.0 * 0.25) / 3.0;
  const auto m = weighted_moments(z, w);
  EXPECT_NEAR(m.mean, m1, 1e-15);
  EXPECT_NEAR(m.variance, m2 - m1 * m1, 1e-14);

  const std::vector<double> ones(3, 1.0);
  const auto plain = weighted_moments(z, ones);
  EXPECT_NEAR(plain.variance, estimate_variance(z).variance * 2.0 / 3.0, 1e-14);
}

FlashIncrementConfig flash_config(std::size_t n) {
  FlashIncrementConfig c{.phi0 = make_gaussian_packet(Grid(128, -10.0, 10.0), 0.0, 1.0, 0.0)};
  c.n_samples = n;
  c.seed = 99;
  return c;
}

TEST(FlashVsIncrement, ZeroJumpsPassVacuously) {
  auto c = flash_config(10);
  c.n_jumps = 0;
  const auto r = test_flash_vs_increment(c);
  EXPECT_TRUE(r.pass());
  EXPECT_TRUE(r.checks.empty());
}

TEST(FlashVsIncrement, SameLawPassesAndVarianceIsTwo) {
  const auto r = test_flash_vs_increment(flash_config(20000));
  EXPECT_TRUE(r.pass()) << r.serialize();
  EXPECT_NEAR(r.details["grw_variance_1"].get<double>(), 2.0,
              4.0 * r.details["grw_variance_1_se"].get<double>());
}

TEST(FlashVsIncrement, TwoJumpsIncludingSum) {
  auto c = flash_config(20000);
  c.n_jumps = 2;
  const auto r = test_flash_vs_increment(c);
  EXPECT_TRUE(r.pass()) << r.serialize();
  EXPECT_EQ(r.checks.size(), 3u);  // two marginals and the sum
  EXPECT_NEAR(r.details["bonferroni_level"].get<double>(), 0.01 / 3.0, 1e-15);
}

TEST(FlashVsIncrement, MismatchedAlphaFails) {
  auto c = flash_config(20000);
  c.grw_alpha = 1.0;
  EXPECT_EQ(test_flash_vs_increment(c).outcome, Outcome::fail);
}

TEST(FlashVsIncrement, TinyEnsembleIsInconclusive) {
  EXPECT_EQ(test_flash_vs_increment(flash_config(60)).outcome, Outcome::inconclusive);
}

TEST(FlashVsIncrement, ReportBytesIndependentOfWorkers) {
  auto a = flash_config(3000);
  auto b = a;
  a.workers = 1;
  b.workers = 3;
  EXPECT_EQ(test_flash_vs_increment(a).serialize(), test_flash_vs_increment(b).serialize());
}

FddConfig fdd_config(double lambda, TestFunctional f) {
  const Grid g = small_grid();
  FddConfig c{.phi0 = make_gaussian_packet(g, 0.0, 0.5, 0.0),
              .h = HamiltonianSpec::free_particle(g)};
  c.lambda = lambda;
  c.mu_list = {4, 16, 64};
  c.t_list = {0.25, 0.5};
  c.functional = std::move(f);
  c.n_samples = 300;
  c.seed = 5;
  c.wiener_cells_per_unit_time = 1024;
  c.reference_substeps = 1024;
  c.max_dt = 1.0 / 256.0;
  return c;
}

TEST(FddConvergence, ConstantFunctionalIsMeanWeightAtEveryMu) {
  const auto r = test_fdd_convergence(fdd_config(1.0, TestFunctional::constant()));
  for (const auto& row : r.details["per_mu"])
    EXPECT_LE(row["error"].get<double>(), 3.0 * row["pooled_se"].get<double>()) << row.dump();
}

TEST(FddConvergence, VanishingLambdaAgreesAtCoarsestMesh) {
  const Grid g = small_grid();
  const auto f = TestFunctional::overlap(make_gaussian_packet(g, 0.3, 0.6, 0.0));
  const auto r = test_fdd_convergence(fdd_config(1e-12, f));
  const auto& first = r.details["per_mu"][0];
  // Both sides are the same Schrodinger evolution up to O(1e-6) weights.
  EXPECT_LE(first["error"].get<double>(), 1e-5);
}

TEST(FddConvergence, DeterministicGivenSeed) {
  const auto c = fdd_config(1.0, TestFunctional::constant());
  auto d = c;
  d.workers = 2;
  EXPECT_EQ(test_fdd_convergence(c).serialize(), test_fdd_convergence(d).serialize());
}

TEST(KappaLemma, EqualTimesGiveZeroLhs) {
  KappaConfig c;
  c.s = 1.0;
  c.t = 1.0;
  c.n_samples = 2000;
  const auto r = test_kappa_lemma(c);
  for (const auto& row : r.details["part_a"]) EXPECT_EQ(row["lhs"].get<double>(), 0.0);
}

TEST(KappaLemma, PassesAndTailVanishesAtLargeMuT) {
  KappaConfig c;
  c.n_samples = 20000;
  c.seed = 8;
  const auto r = test_kappa_lemma(c);
  EXPECT_TRUE(r.pass()) << r.serialize();
  for (const auto& row : r.details["part_b"])
    if (row["mu_t"].get<double>() >= 50.0) {
      EXPECT_EQ(row["tail"].get<double>(), 0.0);
    }
}

TEST(KappaLemma, TruncatedSecondMomentOracle) {
  // E[N^2 1{N >= c}] by direct summation.
  for (double m : {0.5, 3.0, 12.0}) {
    for (std::uint64_t c : {0u, 1u, 4u, 20u}) {
      double direct = 0.0;
      for (std::uint64_t k = c; k < 400; ++k)
        direct += static_cast<double>(k * k) * std::exp(log_poisson_pmf(k, m));
      EXPECT_NEAR(poisson_truncated_second_moment(m, c), direct, 1e-10 * (1.0 + direct));
    }
  }
}

/// RHS by trapezoid quadrature of the analytic derivatives of a Gaussian with
/// |phi|^2 ~ N(0, 1): phi' = -x phi / 2, phi'' = (x^2 / 4 - 1 / 2) phi.
double gaussian_rhs(double t) {
  double d1 = 0.0, d2 = 0.0;
  const double h = 1e-3;
  for (double x = -30.0; x <= 30.0; x += h) {
    const double phi = std::pow(2.0 * std::numbers::pi, -0.25) * std::exp(-x * x / 4.0);
    const double p1 = -0.5 * x * phi;
    const double p2 = (0.25 * x * x - 0.5) * phi;
    d1 += p1 * p1 * h;
    d2 += -std::expm1(-0.5 * t * x * x) * p2 * p2 * h;
  }
  return 15.0 * t * t + 12.0 * t * d1 + 6.0 * d2;
}

TEST(ConditionI, RhsMatchesIndependentQuadrature) {
  const WaveFunction phi = make_gaussian_packet(Grid(256, -20.0, 20.0), 0.0, 1.0, 0.0);
  for (double t : {1e-1, 1e-2, 1e-3}) EXPECT_NEAR(condition_I_rhs(phi, t), gaussian_rhs(t), 1e-8);
  // t -> 0: RHS / t -> 12 |phi'|^2 + 3 E[x^2 (x^2/4 - 1/2)^2] = 3 + 21/16.
  EXPECT_NEAR(gaussian_rhs(1e-6) / 1e-6, 3.0 + 21.0 / 16.0, 1e-4);
}

TEST(ConditionI, ZeroTimeIntegrandVanishes) {
  const WaveFunction phi = make_gaussian_packet(Grid(128, -15.0, 15.0), 0.0, 1.0, 0.0);
  EXPECT_EQ(condition_I_sample(phi, 0.0, 0.0), 0.0);
}

TEST(ConditionI, BoundHoldsAndVanishes) {
  ConditionIConfig c{.phi = make_gaussian_packet(Grid(256, -20.0, 20.0), 0.0, 1.0, 0.0)};
  c.bound_times = {1e-1, 1e-2, 1e-3};
  c.n_samples = 2000;
  c.seed = 4;
  const auto r = test_condition_I_bound(c);
  EXPECT_TRUE(r.pass()) << r.serialize();
}

TEST(ConditionI, NyquistContentIsInconclusive) {
  const Grid g(64, -8.0, 8.0);
  // Momentum close to the Nyquist wavenumber puts mass in the last bins.
  ConditionIConfig c{.phi = make_gaussian_packet(g, 0.0, 0.3, 0.95 * std::numbers::pi / g.dx())};
  c.n_samples = 100;
  EXPECT_EQ(test_condition_I_bound(c).outcome, Outcome::inconclusive);
}

MartingaleConfig martingale_config(MartingaleModel model, double lambda) {
  const Grid g = small_grid();
  MartingaleConfig c{.model = model, .phi0 = make_gaussian_packet(g, 0.0, 0.5, 0.0),
                     .h = HamiltonianSpec::free_particle(g)};
  c.diosi.lambda = lambda;
  c.diosi.n_substeps_per_unit_time = 256;
  c.diosi.wiener_cells_per_unit_time = 1024;
  c.diosi.t_max = 0.5;
  c.diosi.sample_times = {0.125, 0.5};
  c.hybrid.lambda = lambda;
  c.hybrid.mu = 16;
  c.hybrid.wiener_cells_per_unit_time = 1024;
  c.hybrid.max_dt = 1.0 / 256.0;
  c.hybrid.t_max = 0.5;
  c.hybrid.sample_times = {0.125, 0.5};
  c.n_samples = 2000;
  c.seed = 21;
  return c;
}

TEST(NormMartingale, MeanWeightIsOne) {
  for (auto m : {MartingaleModel::diosi, MartingaleModel::hybrid}) {
    const auto r = test_norm_martingale(martingale_config(m, 1.0));
    for (const auto& row : r.details["per_t"])
      EXPECT_LE(std::abs(row["mean_weight"].get<double>() - 1.0), 3.0 * row["se"].get<double>())
          << r.name;
  }
}

TEST(NormMartingale, VanishingLambdaKeepsWeightsAtOne) {
  for (auto m : {MartingaleModel::diosi, MartingaleModel::hybrid}) {
    auto c = martingale_config(m, 1e-12);
    c.n_samples = 50;
    const auto r = test_norm_martingale(c);
    EXPECT_TRUE(r.pass());
    for (const auto& row : r.details["per_t"])
      EXPECT_NEAR(row["mean_weight"].get<double>(), 1.0, 1e-6);
  }
}

}  // namespace
}  // namespace collapse
