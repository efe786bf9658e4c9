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

#ifndef COLLAPSE_ORACLES_HPP_
#define COLLAPSE_ORACLES_HPP_

// Closed-form solutions used to check the propagators.

#include <cmath>
#include <complex>
#include <numbers>

#include "collapse/grid.hpp"

namespace collapse::oracle {

/// Free evolution (H = -1/2 d^2/dx^2) of make_gaussian_packet(center, sigma,
/// momentum): psi(x, t) = exp(i k x - i k^2 t / 2) psi_0(x - k t, t).
inline WaveFunction free_gaussian(const Grid& grid, double center, double sigma, double momentum,
                                  double t) {
  const Complex spread(1.0, t / (2.0 * sigma * sigma));
  const Complex pre = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25) / std::sqrt(spread);
  Amplitudes a(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid.x(j);
    const double d = x - momentum * t - center;
    a[j] = pre * std::exp(-d * d / (4.0 * sigma * sigma * spread) +
                          Complex(0.0, momentum * x - 0.5 * momentum * momentum * t));
  }
  return WaveFunction(grid, std::move(a));
}

/// Coherent state of V = omega^2 x^2 / 2 starting at (q0, p0), including the
/// dynamical phase.
inline WaveFunction coherent_state(const Grid& grid, double omega, double q0, double p0,
                                   double t) {
  const double c = std::cos(omega * t), s = std::sin(omega * t);
  const double q = q0 * c + p0 / omega * s;
  const double p = -q0 * omega * s + p0 * c;
  const double pre = std::pow(omega / std::numbers::pi, 0.25);
  Amplitudes a(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid.x(j);
    const double d = x - q;
    a[j] = pre * std::exp(Complex(-0.5 * omega * d * d,
                                  p * (x - 0.5 * q) - 0.5 * omega * t + 0.5 * p0 * q0));
  }
  return WaveFunction(grid, std::move(a));
}

/// L2 distance on the grid.
inline double distance(const WaveFunction& a, const WaveFunction& b) {
  require(a.grid() == b.grid(), ErrorCode::grid_mismatch, "distance across grids");
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::norm(a[j] - b[j]);
  return std::sqrt(s * a.grid().dx());
}

}  // namespace collapse::oracle

#endif  // COLLAPSE_ORACLES_HPP_
