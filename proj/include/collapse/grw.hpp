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

#ifndef COLLAPSE_GRW_HPP_
#define COLLAPSE_GRW_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "collapse/error.hpp"
#include "collapse/grid.hpp"
#include "collapse/random.hpp"
#include "collapse/trajectory.hpp"

namespace collapse {

/// Jump times T_n = (X_1 + ... + X_n) / mu <= t_max with X_k ~ Exp(1) i.i.d.
inline std::vector<double> sample_jump_times(double mu, double t_max, RandomStream& rng) {
  require(mu > 0.0 && std::isfinite(mu), ErrorCode::invalid_parameter, "mu must be positive");
  require(t_max > 0.0 && std::isfinite(t_max), ErrorCode::invalid_parameter,
          "t_max must be positive");
  std::vector<double> times;
  double sum = 0.0;
  for (;;) {
    sum += rng.exponential();
    const double t = sum / mu;
    if (t > t_max) break;
    times.push_back(t);
  }
  return times;
}

/// Density of the next hit center, sqrt(alpha/pi) sum_j exp(-alpha (x_j - y)^2) |psi_j|^2 dx.
inline double flash_density(const WaveFunction& psi, double alpha, double y) {
  require(alpha > 0.0, ErrorCode::invalid_parameter, "alpha must be positive");
  const Grid& g = psi.grid();
  double sum = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double d = g.x(j) - y;
    sum += std::exp(-alpha * d * d) * std::norm(psi[j]);
  }
  return std::sqrt(alpha / std::numbers::pi) * sum * g.dx();
}

namespace detail {

inline double sample_flash_center(std::span<const Complex> psi, const Grid& grid, double alpha,
                                  RandomStream& position_rng, RandomStream& noise_rng,
                                  std::vector<double>& cdf) {
  require(alpha > 0.0, ErrorCode::invalid_parameter, "alpha must be positive");
  cdf.resize(psi.size());
  double total = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    total += std::norm(psi[j]);
    cdf[j] = total;
  }
  require(total * grid.dx() > 1e-300, ErrorCode::degenerate_state,
          "cannot sample a hit center from a vanishing state");
  const double u = position_rng.uniform() * total;
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto j = static_cast<std::size_t>(
      std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(psi.size()) - 1));
  return grid.x(j) + noise_rng.normal() * std::sqrt(0.5 / alpha);
}

}  // namespace detail

/// Draws Y with density flash_density(psi, alpha, .): a grid position from
/// |psi_j|^2 dx, then Gaussian noise of variance 1/(2 alpha).
inline double sample_flash_center(const WaveFunction& psi, double alpha,
                                  RandomStream& position_rng, RandomStream& noise_rng) {
  std::vector<double> cdf;
  return detail::sample_flash_center(psi.amplitudes(), psi.grid(), alpha, position_rng,
                                     noise_rng, cdf);
}

inline double sample_flash_center(const WaveFunction& psi, double alpha, RandomStream& rng) {
  return sample_flash_center(psi, alpha, rng, rng);
}

inline void require_normalized(const WaveFunction& phi0) {
  require(std::abs(norm2(phi0) - 1.0) <= 1e-10, ErrorCode::invalid_parameter,
          "initial state must be normalized");
}

/// One GRW trajectory: Schrodinger evolution between jump times, Gaussian hit
/// at each jump with the center drawn from the evolved pre-hit state,
/// renormalization after the hit. Deterministic in (seed, index).
inline TrajectoryRecord grw_trajectory(const WaveFunction& phi0, const HamiltonianSpec& h,
                                       const GrwParams& p, std::uint64_t seed,
                                       std::uint64_t index = 0) {
  p.validate();
  h.validate(phi0.grid());
  require_normalized(phi0);
  const Grid& grid = phi0.grid();
  const auto stream = static_cast<std::uint32_t>(index);
  RandomStream jumps(seed, stream, StreamRole::jump_times);
  RandomStream positions(seed, stream, StreamRole::flash_position);
  RandomStream noise(seed, stream, StreamRole::flash_noise);

  TrajectoryRecord rec;
  rec.params = p;
  rec.seed = seed;
  rec.index = index;

  Amplitudes state = phi0.copy_amplitudes();
  std::vector<double> cdf;
  double now = 0.0;
  double waiting_sum = 0.0;
  auto draw_next = [&] {
    waiting_sum += p.deterministic_times ? 1.0 : jumps.exponential();
    return waiting_sum / p.mu;
  };
  double next_jump = draw_next();

  auto advance_through_jumps = [&](double until) {
    while (next_jump <= until) {
      propagate(state, grid, h, next_jump - now, p.max_dt);
      now = next_jump;
      const double pre = kernel::squared_norm(state, grid.dx());
      const double y = detail::sample_flash_center(state, grid, p.alpha, positions, noise, cdf);
      kernel::apply_gaussian_hit(state, grid, y, p.alpha);
      const double n2 = kernel::squared_norm(state, grid.dx());
      require(n2 > 1e-300, ErrorCode::degenerate_state, "state vanished after a hit");
      kernel::scale(state, 1.0 / std::sqrt(n2));
      rec.flashes.push_back({now, y, pre});
      next_jump = draw_next();
    }
  };

  for (double ts : p.sample_times) {
    advance_through_jumps(ts);
    propagate(state, grid, h, ts - now, p.max_dt);
    now = ts;
    if (boundary_mass_fraction(state, grid) > kBoundaryMassLimit) rec.boundary_flag = true;
    rec.snapshots.push_back({ts, 1.0, WaveFunction(grid, state, StateLabel::normalized)});
  }
  advance_through_jumps(p.t_max);
  rec.weight = 1.0;
  return rec;
}

}  // namespace collapse

#endif  // COLLAPSE_GRW_HPP_
