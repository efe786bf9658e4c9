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

#ifndef COLLAPSE_DIOSI_HPP_
#define COLLAPSE_DIOSI_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "collapse/error.hpp"
#include "collapse/grid.hpp"
#include "collapse/grw.hpp"
#include "collapse/random.hpp"
#include "collapse/stats.hpp"
#include "collapse/trajectory.hpp"

namespace collapse {

/// Standard one-dimensional Wiener path sampled on cells of width
/// 1 / cells_per_unit_time. Cell increments are drawn lazily from a
/// counter-based stream keyed by (seed, trajectory index, cell), so coarser
/// increments are exact sums of the same fine increments.
class WienerPath {
 public:
  WienerPath(std::uint64_t seed, std::uint32_t index, std::uint64_t cells_per_unit_time = 4096)
      : stream_(seed, index, StreamRole::wiener),
        cells_per_unit_time_(cells_per_unit_time),
        scale_(std::sqrt(1.0 / static_cast<double>(cells_per_unit_time))) {
    require(cells_per_unit_time >= 1, ErrorCode::invalid_parameter,
            "Wiener resolution must be >= 1");
  }

  std::uint64_t cells_per_unit_time() const noexcept { return cells_per_unit_time_; }

  double cell_increment(std::uint64_t cell) const { return scale_ * stream_.normal_at(cell); }

  /// xi(t_b) - xi(t_a) over cells [first, first + count), summed in cell order.
  double increment(std::uint64_t first, std::uint64_t count) const {
    double sum = 0.0;
    std::uint64_t c = first;
    const std::uint64_t end = first + count;
    if (c < end && c % 2 == 1) sum += stream_.normal_at(c++);
    while (c + 1 < end) {
      const auto pair = stream_.normal_pair_at(c / 2);
      sum += pair[0];
      sum += pair[1];
      c += 2;
    }
    if (c < end) sum += stream_.normal_at(c);
    return scale_ * sum;
  }

 private:
  RandomStream stream_;
  std::uint64_t cells_per_unit_time_;
  double scale_;
};

/// Reference Diosi trajectory under the reference measure Q: per step dt,
/// one split Schrodinger step followed by the exact collapse flow with the
/// Wiener increment of that step. Snapshots keep the normalized state and the
/// raw squared norm, which is the importance weight.
inline TrajectoryRecord diosi_trajectory(const WaveFunction& phi0, const HamiltonianSpec& h,
                                         const DiosiParams& p, std::uint64_t seed,
                                         std::uint64_t index = 0) {
  p.validate();
  h.validate(phi0.grid());
  require_normalized(phi0);
  const Grid& grid = phi0.grid();
  const double dt = p.dt();
  const std::uint64_t cells_per_step = p.wiener_cells_per_unit_time / p.n_substeps_per_unit_time;
  const WienerPath path(seed, static_cast<std::uint32_t>(index), p.wiener_cells_per_unit_time);
  const bool dynamic = h.kinetic || h.has_potential();
  const SplitStepPropagator prop(grid, h, dynamic ? dt : 0.0);

  TrajectoryRecord rec;
  rec.params = p;
  rec.seed = seed;
  rec.index = index;

  Amplitudes state = phi0.copy_amplitudes();
  std::uint64_t step = 0;
  for (double ts : p.sample_times) {
    const auto target = static_cast<std::uint64_t>(std::llround(ts / dt));
    for (; step < target; ++step) {
      prop.apply(state);
      kernel::apply_collapse_flow(state, grid, p.lambda,
                                  path.increment(step * cells_per_step, cells_per_step), dt);
    }
    const double n2 = kernel::squared_norm(state, grid.dx());
    require(n2 > 1e-300 && std::isfinite(n2), ErrorCode::degenerate_state,
            "Diosi state vanished or overflowed");
    if (boundary_mass_fraction(state, grid) > kBoundaryMassLimit) rec.boundary_flag = true;
    Amplitudes normalized = state;
    kernel::scale(normalized, 1.0 / std::sqrt(n2));
    rec.snapshots.push_back({ts, n2, WaveFunction(grid, std::move(normalized),
                                                  StateLabel::normalized)});
  }
  rec.weight = rec.snapshots.empty() ? 1.0 : rec.snapshots.back().raw_norm2;
  return rec;
}

/// GRW-coupled Diosi process: unitary gaps X_{k+1} / mu alternate with the
/// collapse flow over the deterministic mesh cell [k/mu, (k+1)/mu]; the
/// residual exp(-i (t - T_kappa) H) completes each snapshot. Jump times and
/// Wiener path use independent streams.
inline TrajectoryRecord hybrid_trajectory(const WaveFunction& phi0, const HamiltonianSpec& h,
                                          const HybridParams& p, std::uint64_t seed,
                                          std::uint64_t index = 0) {
  p.validate();
  h.validate(phi0.grid());
  require_normalized(phi0);
  const Grid& grid = phi0.grid();
  const auto stream = static_cast<std::uint32_t>(index);
  RandomStream jumps(seed, stream, StreamRole::jump_times);
  const WienerPath path(seed, stream, p.wiener_cells_per_unit_time);
  const std::uint64_t cells = p.cells_per_mesh();
  const double mesh_dt = 1.0 / p.mu;
  const double z_scale = p.mu / (2.0 * std::sqrt(p.lambda));

  TrajectoryRecord rec;
  rec.params = p;
  rec.seed = seed;
  rec.index = index;

  Amplitudes state = phi0.copy_amplitudes();
  double now = 0.0;
  double waiting_sum = 0.0;
  std::uint64_t applied = 0;
  auto draw_next = [&] {
    waiting_sum += p.deterministic_times ? 1.0 : jumps.exponential();
    return waiting_sum / p.mu;
  };
  double next_jump = draw_next();

  for (double ts : p.sample_times) {
    while (next_jump <= ts) {
      propagate(state, grid, h, next_jump - now, p.max_dt);
      now = next_jump;
      const double pre = kernel::squared_norm(state, grid.dx());
      const std::uint64_t first = applied * cells;
      const double dxi = path.increment(first, cells);
      kernel::apply_collapse_flow(state, grid, p.lambda, dxi, mesh_dt);
      rec.flashes.push_back({now, z_scale * dxi, pre});
      if (p.record_cells) rec.collapse_cells.push_back({first, cells});
      ++applied;
      next_jump = draw_next();
    }
    propagate(state, grid, h, ts - now, p.max_dt);
    now = ts;
    const double n2 = kernel::squared_norm(state, grid.dx());
    require(n2 > 1e-300 && std::isfinite(n2), ErrorCode::degenerate_state,
            "hybrid state vanished or overflowed");
    if (boundary_mass_fraction(state, grid) > kBoundaryMassLimit) rec.boundary_flag = true;
    Amplitudes normalized = state;
    kernel::scale(normalized, 1.0 / std::sqrt(n2));
    rec.snapshots.push_back({ts, n2, WaveFunction(grid, std::move(normalized),
                                                  StateLabel::normalized)});
  }
  rec.weight = rec.snapshots.empty() ? 1.0 : rec.snapshots.back().raw_norm2;
  return rec;
}

/// Normalized states with importance weights at one time. Expectations are
/// sum_i w_i f(phi_i) / N, deliberately not self-normalized: the weights have
/// mean one under Q, and sum w / N doubles as a martingale diagnostic.
struct WeightedEnsemble {
  double time = 0.0;
  std::vector<WaveFunction> states;
  std::vector<double> weights;
  MeanEstimate mean_weight;

  std::size_t size() const noexcept { return states.size(); }

  MeanEstimate expectation(const std::function<double(const WaveFunction&)>& f) const {
    std::vector<double> v(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) v[i] = weights[i] * f(states[i]);
    return estimate_mean(v);
  }
};

inline WeightedEnsemble reweight_ensemble(std::span<const TrajectoryRecord> records, double t) {
  WeightedEnsemble e;
  e.time = t;
  e.states.reserve(records.size());
  e.weights.reserve(records.size());
  for (const auto& r : records) {
    const Snapshot& s = r.at(t);
    e.states.push_back(s.state);
    e.weights.push_back(s.raw_norm2);
  }
  e.mean_weight = estimate_mean(e.weights);
  return e;
}

}  // namespace collapse

#endif  // COLLAPSE_DIOSI_HPP_
