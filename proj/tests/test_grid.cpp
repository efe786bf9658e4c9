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
#include <complex>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "collapse/fft.hpp"
#include "collapse/grid.hpp"
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

TEST(Grid, RejectsBadShapes) {
  EXPECT_EQ(code_of([] { Grid(100, -1, 1); }), ErrorCode::invalid_parameter);
  EXPECT_EQ(code_of([] { Grid(4, -1, 1); }), ErrorCode::invalid_parameter);
  EXPECT_EQ(code_of([] { Grid(64, 1, 1); }), ErrorCode::invalid_parameter);
}

TEST(Grid, CoordinatesAndWavenumbers) {
  const Grid g(8, -4.0, 4.0);
  EXPECT_DOUBLE_EQ(g.dx(), 1.0);
  EXPECT_DOUBLE_EQ(g.x(0), -4.0);
  EXPECT_DOUBLE_EQ(g.x(7), 3.0);
  EXPECT_DOUBLE_EQ(g.max_abs_x(), 4.0);
  const double k0 = 2.0 * std::numbers::pi / 8.0;
  EXPECT_DOUBLE_EQ(g.wavenumber(1), k0);
  EXPECT_DOUBLE_EQ(g.wavenumber(3), 3 * k0);
  EXPECT_DOUBLE_EQ(g.wavenumber(4), -4 * k0);
  EXPECT_DOUBLE_EQ(g.wavenumber(7), -k0);
}

TEST(Fft, MatchesNaiveDft) {
  constexpr std::size_t n = 16;
  std::vector<Complex> a(n);
  for (std::size_t j = 0; j < n; ++j) a[j] = {std::sin(0.3 * j + 1.0), std::cos(1.7 * j * j)};
  std::vector<Complex> naive(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      naive[k] += a[j] * std::polar(1.0, -2.0 * std::numbers::pi * double(j * k) / n);
  FftPlan plan(n);
  auto b = a;
  plan.forward(b);
  for (std::size_t k = 0; k < n; ++k) EXPECT_LT(std::abs(b[k] - naive[k]), 1e-12);
  plan.inverse(b);
  for (std::size_t j = 0; j < n; ++j) EXPECT_LT(std::abs(b[j] - a[j]), 1e-14);
}

TEST(Fft, RejectsNonPowerOfTwo) {
  EXPECT_EQ(code_of([] { FftPlan(12); }), ErrorCode::invalid_parameter);
}

TEST(WaveFunction, NormalizedLabelIsChecked) {
  const Grid g(16, -4, 4);
  EXPECT_EQ(code_of([&] { WaveFunction(g, Amplitudes(16, 1.0), StateLabel::normalized); }),
            ErrorCode::invalid_parameter);
  EXPECT_EQ(code_of([&] { WaveFunction(g, Amplitudes(8, 1.0)); }), ErrorCode::grid_mismatch);
  EXPECT_EQ(code_of([&] { normalize(WaveFunction(g, Amplitudes(16, 0.0))); }),
            ErrorCode::degenerate_state);
}

TEST(Packet, NormMomentsAndWindowCheck) {
  const Grid g(256, -20, 20);
  const auto phi = make_gaussian_packet(g, 1.5, 1.2, 0.8);
  EXPECT_NEAR(norm2(phi), 1.0, 1e-14);
  const auto m = position_moments(phi.amplitudes(), g);
  EXPECT_NEAR(m.mean, 1.5, 1e-12);
  EXPECT_NEAR(m.variance(), 1.44, 1e-12);
  EXPECT_LT(boundary_mass_fraction(phi.amplitudes(), g), 1e-20);
  EXPECT_EQ(code_of([&] { make_gaussian_packet(g, 18.0, 1.0, 0.0); }), ErrorCode::grid_too_small);
}

TEST(GaussianHit, SquaredNormIsSmearedDensity) {
  // |hit|^2 integrates to N(y; c, sigma^2 + 1/(2 alpha)) for a Gaussian packet.
  const Grid g(256, -20, 20);
  const double sigma = 1.0, alpha = 0.5, c = 0.3;
  const auto phi = make_gaussian_packet(g, c, sigma, 0.4);
  for (double y : {-2.0, 0.0, 0.7, 3.1}) {
    const double var = sigma * sigma + 1.0 / (2.0 * alpha);
    const double expected =
        std::exp(-(y - c) * (y - c) / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
    EXPECT_NEAR(norm2(gaussian_hit(phi, y, alpha)), expected, 1e-13) << y;
  }
}

TEST(CollapseFlow, CompositionIsExact) {
  const Grid g(128, -10, 10);
  const auto phi = make_gaussian_packet(g, 0.0, 1.0, 0.0);
  const CollapseSpec c{1.3};
  const auto two = collapse_flow(collapse_flow(phi, c, 0.4, 0.05), c, -0.15, 0.07);
  const auto one = collapse_flow(phi, c, 0.25, 0.12);
  for (std::size_t j = 0; j < g.size(); ++j)
    EXPECT_LE(std::abs(two[j] - one[j]), 1e-12 * std::abs(one[j]) + 1e-300);
}

TEST(CollapseFlow, OverflowGuard) {
  const Grid g(64, -10, 10);
  const auto phi = make_gaussian_packet(g, 0.0, 1.0, 0.0);
  EXPECT_EQ(code_of([&] { collapse_flow(phi, {1.0}, 0.0, 8.0); }), ErrorCode::step_too_large);
  EXPECT_NO_THROW(collapse_flow(phi, {1.0}, 0.0, 7.0));
}

TEST(SplitStep, FreeGaussianMatchesClosedForm) {
  const Grid g(1024, -64, 64);
  const auto phi = make_gaussian_packet(g, -2.0, 1.0, 0.5);
  const SplitStepPropagator prop(g, HamiltonianSpec::free_particle(g), 0.1);
  Amplitudes a = phi.copy_amplitudes();
  for (int s = 0; s < 100; ++s) prop.apply(a);
  const auto exact = oracle::free_gaussian(g, -2.0, 1.0, 0.5, 10.0);
  EXPECT_LT(oracle::distance(WaveFunction(g, a), exact), 1e-6);
}

TEST(SplitStep, UnitaryWithPotential) {
  const Grid g(256, -20, 20);
  const auto h = HamiltonianSpec::with_potential(g, [](double x) { return 2.0 * std::exp(-x * x); });
  const SplitStepPropagator prop(g, h, 0.01);
  Amplitudes a = make_gaussian_packet(g, -3.0, 1.0, 1.0).copy_amplitudes();
  for (int s = 0; s < 1000; ++s) prop.apply(a);
  EXPECT_LT(std::abs(kernel::squared_norm(a, g.dx()) - 1.0), 1e-10);
}

TEST(SplitStep, SecondOrderInHarmonicPotential) {
  const Grid g(256, -16, 16);
  const double omega = 1.3;
  const auto h = HamiltonianSpec::with_potential(g, [&](double x) { return 0.5 * omega * omega * x * x; });
  const auto phi = oracle::coherent_state(g, omega, 1.0, 0.7, 0.0);
  const auto exact = oracle::coherent_state(g, omega, 1.0, 0.7, 1.0);
  std::vector<double> err;
  for (int steps : {10, 20, 40, 80}) {
    Amplitudes a = phi.copy_amplitudes();
    propagate(a, g, h, 1.0, 1.0 / steps);
    err.push_back(oracle::distance(WaveFunction(g, a), exact));
  }
  for (std::size_t i = 1; i < err.size(); ++i) EXPECT_GE(std::log2(err[i - 1] / err[i]), 1.9);
}

TEST(SplitStep, StepCountRespectsExactness) {
  const Grid g(16, -4, 4);
  EXPECT_EQ(split_step_count(HamiltonianSpec::free_particle(g), 1.0, 0.01), 1u);
  const auto h = HamiltonianSpec::with_potential(g, [](double x) { return x; });
  EXPECT_EQ(split_step_count(h, 1.0, 0.01), 100u);
  EXPECT_EQ(split_step_count(h, 0.0, 0.01), 0u);
  EXPECT_EQ(split_step_count(h, 0.015, 0.01), 2u);
}

TEST(SpectralDerivative, GaussianDerivatives) {
  const Grid g(256, -20, 20);
  Amplitudes f(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) f[j] = std::exp(-0.5 * g.x(j) * g.x(j));
  const auto d1 = spectral_derivative(f, g, 1);
  const auto d2 = spectral_derivative(f, g, 2);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = g.x(j), e = std::exp(-0.5 * x * x);
    EXPECT_NEAR(d1[j].real(), -x * e, 1e-11);
    EXPECT_NEAR(d2[j].real(), (x * x - 1.0) * e, 1e-11);
    EXPECT_NEAR(d1[j].imag(), 0.0, 1e-11);
  }
}

TEST(Boundary, FlagsMassNearEdges) {
  const Grid g(64, -8, 8);
  Amplitudes a(64, 0.0);
  a[1] = 1.0;
  a[32] = 1.0;
  EXPECT_DOUBLE_EQ(boundary_mass_fraction(a, g), 0.5);
}

}  // namespace
}  // namespace collapse
