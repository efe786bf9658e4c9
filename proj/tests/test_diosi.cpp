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
#include <vector>

#include <gtest/gtest.h>

#include "collapse/diosi.hpp"
#include "collapse/oracles.hpp"

namespace collapse {
namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::io_failure;
}

TEST(WienerPath, AggregatedIncrementsAreSumsOfCells) {
  const WienerPath path(8, 2, 64);
  for (auto [first, count] : {std::pair<std::uint64_t, std::uint64_t>{0, 64}, {3, 17}, {10, 1}, {7, 2}}) {
    double sum = 0.0;
    for (std::uint64_t c = first; c < first + count; ++c) sum += path.cell_increment(c);
    EXPECT_NEAR(path.increment(first, count), sum, 1e-12);
  }
  EXPECT_EQ(path.increment(5, 0), 0.0);
}

TEST(WienerPath, IncrementVarianceIsDuration) {
  constexpr std::size_t n = 40000;
  std::vector<double> a(n), b(n), prod(n);
  for (std::size_t i = 0; i < n; ++i) {
    const WienerPath path(12, static_cast<std::uint32_t>(i), 256);
    a[i] = path.increment(0, 64);    // [0, 0.25)
    b[i] = path.increment(64, 128);  // [0.25, 0.75)
    prod[i] = a[i] * b[i];
  }
  const auto va = estimate_variance(a), vb = estimate_variance(b);
  EXPECT_NEAR(va.variance, 0.25, 4.0 * va.se);
  EXPECT_NEAR(vb.variance, 0.5, 4.0 * vb.se);
  const auto cov = estimate_mean(prod);
  EXPECT_NEAR(cov.mean, 0.0, 4.0 * cov.se);
}

DiosiParams diosi_params(double lambda, std::uint64_t substeps, std::vector<double> ts) {
  DiosiParams p;
  p.lambda = lambda;
  p.n_substeps_per_unit_time = substeps;
  p.wiener_cells_per_unit_time = 4096;
  p.t_max = ts.back();
  p.sample_times = std::move(ts);
  return p;
}

TEST(Diosi, PureCollapseHasClosedForm) {
  // H = 0: psi_t = exp(sqrt(lambda) x xi_t - lambda x^2 t) phi0.
  const Grid g(128, -10, 10);
  const auto phi = make_gaussian_packet(g, 0.3, 1.0, 0.0);
  const double lambda = 0.7;
  const auto p = diosi_params(lambda, 64, {0.5, 1.0});
  const auto rec = diosi_trajectory(phi, HamiltonianSpec::zero(g), p, 21, 6);
  const WienerPath path(21, 6, 4096);
  for (double t : {0.5, 1.0}) {
    const double xi = path.increment(0, static_cast<std::uint64_t>(4096 * t));
    Amplitudes a = phi.copy_amplitudes();
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double x = g.x(j);
      a[j] *= std::exp(std::sqrt(lambda) * x * xi - lambda * x * x * t);
    }
    const double n2 = kernel::squared_norm(a, g.dx());
    EXPECT_NEAR(rec.at(t).raw_norm2, n2, 1e-12 * n2);
    const auto expected = normalize(WaveFunction(g, a));
    EXPECT_LT(oracle::distance(rec.at(t).state, expected), 1e-12);
  }
  EXPECT_EQ(rec.weight, rec.at(1.0).raw_norm2);
}

TEST(Diosi, VanishingIntensityIsSchrodinger) {
  const Grid g(256, -20, 20);
  const auto phi = make_gaussian_packet(g, 0.0, 1.0, 0.5);
  const auto p = diosi_params(1e-12, 256, {1.0});
  const auto rec = diosi_trajectory(phi, HamiltonianSpec::free_particle(g), p, 4, 0);
  EXPECT_LT(oracle::distance(rec.at(1.0).state, oracle::free_gaussian(g, 0.0, 1.0, 0.5, 1.0)),
            1e-5);
  EXPECT_NEAR(rec.at(1.0).raw_norm2, 1.0, 1e-6);
}

TEST(Diosi, NormIsMartingale) {
  // With H = 0 and |phi0|^2 = N(0, s^2) the weight is
  // (1 + 4 lambda t s^2)^(-1/2) exp(2 lambda s^2 xi^2 / (1 + 4 lambda t s^2)); s = 0.25
  // keeps its fourth moment finite up to t = 1, so the standard error is meaningful.
  const Grid g(128, -8, 8);
  const auto phi = make_gaussian_packet(g, 0.0, 0.25, 0.0);
  const auto p = diosi_params(1.0, 64, {0.125, 0.5, 1.0});
  constexpr std::size_t n = 10000;
  std::vector<std::vector<double>> w(3, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto rec = diosi_trajectory(phi, HamiltonianSpec::zero(g), p, 31, i);
    for (std::size_t k = 0; k < 3; ++k) w[k][i] = rec.snapshots[k].raw_norm2;
  }
  for (std::size_t k = 0; k < 3; ++k) {
    const auto e = estimate_mean(w[k]);
    EXPECT_LE(std::abs(e.mean - 1.0), 3.0 * e.se) << k;
  }
}

TEST(Diosi, ErrorsAreReported) {
  const Grid g(64, -10, 10);
  const auto phi = make_gaussian_packet(g, 0.0, 1.0, 0.0);
  const auto h = HamiltonianSpec::zero(g);
  EXPECT_EQ(code_of([&] { diosi_trajectory(phi, h, diosi_params(100.0, 1, {1.0}), 1); }),
            ErrorCode::step_too_large);
  EXPECT_EQ(code_of([&] { diosi_trajectory(phi, h, diosi_params(1.0, 4, {0.3}), 1); }),
            ErrorCode::schedule_mismatch);
  auto p = diosi_params(1.0, 3, {1.0});
  EXPECT_EQ(code_of([&] { diosi_trajectory(phi, h, p, 1); }), ErrorCode::invalid_parameter);
}

HybridParams hybrid_params(double lambda, double mu, std::vector<double> ts) {
  HybridParams p;
  p.lambda = lambda;
  p.mu = mu;
  p.t_max = ts.back();
  p.sample_times = std::move(ts);
  return p;
}

TEST(Hybrid, ZeroHamiltonianIsGaussianProductOfIncrements) {
  const Grid g(128, -10, 10);
  const auto phi = make_gaussian_packet(g, 0.0, 1.0, 0.0);
  auto p = hybrid_params(1.0, 4.0, {0.75});
  p.deterministic_times = true;
  p.record_cells = true;
  const auto rec = hybrid_trajectory(phi, HamiltonianSpec::zero(g), p, 5, 9);
  ASSERT_EQ(rec.flashes.size(), 3u);
  ASSERT_EQ(rec.collapse_cells.size(), 3u);

  // Independent oracle: Z_k from raw path cells, then the Gaussian product.
  const WienerPath path(5, 9, 4096);
  const double alpha = p.alpha();
  std::vector<double> z;
  for (std::uint64_t k = 0; k < 3; ++k) {
    EXPECT_EQ(rec.collapse_cells[k].first_cell, k * 1024);
    EXPECT_EQ(rec.collapse_cells[k].n_cells, 1024u);
    double dxi = 0.0;
    for (std::uint64_t c = k * 1024; c < (k + 1) * 1024; ++c) dxi += path.cell_increment(c);
    z.push_back(p.mu / (2.0 * std::sqrt(p.lambda)) * dxi);
    EXPECT_NEAR(rec.flashes[k].center, z.back(), 1e-10);
  }
  Amplitudes a = phi.copy_amplitudes();
  for (std::size_t j = 0; j < g.size(); ++j) {
    double e = 0.0;
    for (double zk : z) e += (g.x(j) - zk) * (g.x(j) - zk);
    a[j] *= std::exp(-0.5 * alpha * e);
  }
  EXPECT_LT(oracle::distance(rec.at(0.75).state, normalize(WaveFunction(g, a))), 1e-10);
}

TEST(Hybrid, IncrementVarianceUnderReferenceMeasure) {
  // Var Z_k = mu / (4 lambda) = 1 / (2 alpha).
  const double lambda = 1.0, mu = 4.0;
  constexpr std::size_t n = 100000;
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    const WienerPath path(13, static_cast<std::uint32_t>(i), 4096);
    z[i] = mu / (2.0 * std::sqrt(lambda)) * path.increment(1024, 1024);
  }
  const auto v = estimate_variance(z);
  EXPECT_NEAR(v.variance, mu / (4.0 * lambda), 3.0 * v.se);
}

TEST(Hybrid, CollapseCellsIgnoreRandomWaitingTimes) {
  const Grid g(64, -8, 8);
  const auto phi = make_gaussian_packet(g, 0.0, 1.0, 0.0);
  auto p = hybrid_params(1.0, 16.0, {0.5, 1.0});
  p.record_cells = true;
  const auto rec = hybrid_trajectory(phi, HamiltonianSpec::free_particle(g), p, 3, 1);
  ASSERT_EQ(rec.collapse_cells.size(), rec.flashes.size());
  for (std::size_t k = 0; k < rec.collapse_cells.size(); ++k) {
    EXPECT_EQ(rec.collapse_cells[k].first_cell, k * 256);
    EXPECT_EQ(rec.collapse_cells[k].n_cells, 256u);
  }
}

TEST(Hybrid, DeterministicAndValidated) {
  const Grid g(64, -8, 8);
  const auto phi = make_gaussian_packet(g, 0.0, 1.0, 0.0);
  const auto h = HamiltonianSpec::free_particle(g);
  const auto p = hybrid_params(1.0, 16.0, {0.5});
  const auto a = hybrid_trajectory(phi, h, p, 3, 1);
  const auto b = hybrid_trajectory(phi, h, p, 3, 1);
  EXPECT_TRUE(a.at(0.5).state == b.at(0.5).state);
  EXPECT_EQ(a.weight, b.weight);
  EXPECT_DOUBLE_EQ(p.alpha() * p.mu / 2.0, p.lambda);
  EXPECT_EQ(code_of([&] { hybrid_trajectory(phi, h, hybrid_params(1.0, 3.0, {0.5}), 1); }),
            ErrorCode::invalid_parameter);
}

TEST(Reweight, EstimatorIsNotSelfNormalized) {
  const Grid g(64, -8, 8);
  const auto phi = make_gaussian_packet(g, 0.0, 0.5, 0.0);
  const auto p = diosi_params(1.0, 16, {0.125, 0.25});
  std::vector<TrajectoryRecord> recs;
  for (std::size_t i = 0; i < 400; ++i)
    recs.push_back(diosi_trajectory(phi, HamiltonianSpec::zero(g), p, 2, i));
  const auto ens = reweight_ensemble(recs, 0.125);
  const auto one = ens.expectation([](const WaveFunction&) { return 1.0; });
  EXPECT_DOUBLE_EQ(one.mean, ens.mean_weight.mean);
  EXPECT_LE(std::abs(one.mean - 1.0), 3.0 * one.se);
  // A self-normalized estimator would return exactly 1 here.
  EXPECT_NE(one.mean, 1.0);
  EXPECT_EQ(code_of([&] { reweight_ensemble(recs, 0.5); }), ErrorCode::schedule_mismatch);
}

TEST(Reweight, TinyIntensityGivesUnitWeights) {
  const Grid g(64, -8, 8);
  const auto phi = make_gaussian_packet(g, 0.0, 1.0, 0.0);
  const auto p = diosi_params(1e-12, 16, {1.0});
  std::vector<TrajectoryRecord> recs;
  for (std::size_t i = 0; i < 50; ++i)
    recs.push_back(diosi_trajectory(phi, HamiltonianSpec::free_particle(g), p, 2, i));
  const auto ens = reweight_ensemble(recs, 1.0);
  for (double w : ens.weights) EXPECT_NEAR(w, 1.0, 1e-6);
}

}  // namespace
}  // namespace collapse
