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

#ifndef COLLAPSE_TRAJECTORY_HPP_
#define COLLAPSE_TRAJECTORY_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "collapse/error.hpp"
#include "collapse/grid.hpp"

namespace collapse {

namespace detail {

inline void validate_schedule(const std::vector<double>& sample_times, double t_max) {
  require(t_max > 0.0 && std::isfinite(t_max), ErrorCode::invalid_parameter,
          "t_max must be positive");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    require(sample_times[i] >= 0.0 && sample_times[i] <= t_max, ErrorCode::invalid_parameter,
            "sample times must lie in [0, t_max]");
    if (i > 0)
      require(sample_times[i] > sample_times[i - 1], ErrorCode::invalid_parameter,
              "sample times must be strictly increasing");
  }
}

inline bool is_integer_multiple(double value, double unit) {
  const double q = value / unit;
  return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, std::abs(q));
}

}  // namespace detail

/// GRW jump process: hits at rate mu with width 1/sqrt(alpha).
struct GrwParams {
  double mu = 1.0;
  double alpha = 1.0;
  double t_max = 1.0;
  std::vector<double> sample_times;
  /// Largest split step used when propagating across a waiting gap.
  double max_dt = 1e-2;
  /// Forces X_k = 1 (jumps at k / mu), the H = 0 comparison setting.
  bool deterministic_times = false;

  void validate() const {
    require(mu > 0.0 && std::isfinite(mu), ErrorCode::invalid_parameter, "mu must be positive");
    require(alpha > 0.0 && std::isfinite(alpha), ErrorCode::invalid_parameter,
            "alpha must be positive");
    require(max_dt > 0.0, ErrorCode::invalid_parameter, "max_dt must be positive");
    detail::validate_schedule(sample_times, t_max);
  }
};

/// Linear Diosi equation integrated by unitary/collapse splitting with
/// deterministic steps of 1 / n_substeps_per_unit_time.
struct DiosiParams {
  double lambda = 1.0;
  std::uint64_t n_substeps_per_unit_time = 4096;
  /// Resolution of the underlying Wiener path; shared with hybrid runs so
  /// that both see the same noise (common random numbers).
  std::uint64_t wiener_cells_per_unit_time = 4096;
  double t_max = 1.0;
  std::vector<double> sample_times;

  double dt() const { return 1.0 / static_cast<double>(n_substeps_per_unit_time); }

  void validate() const {
    require(lambda > 0.0 && std::isfinite(lambda), ErrorCode::invalid_parameter,
            "lambda must be positive");
    require(n_substeps_per_unit_time >= 1, ErrorCode::invalid_parameter,
            "n_substeps_per_unit_time must be >= 1");
    require(wiener_cells_per_unit_time % n_substeps_per_unit_time == 0,
            ErrorCode::invalid_parameter,
            "Wiener resolution must be a multiple of the step resolution");
    detail::validate_schedule(sample_times, t_max);
    for (double t : sample_times)
      require(detail::is_integer_multiple(t, dt()), ErrorCode::schedule_mismatch,
              "sample time " + std::to_string(t) + " is not on the step grid");
  }
};

/// GRW-coupled Diosi process: unitary gaps X_k / mu, collapse flows over the
/// deterministic mesh cells [k/mu, (k+1)/mu].
struct HybridParams {
  double lambda = 1.0;
  double mu = 1.0;
  double t_max = 1.0;
  std::vector<double> sample_times;
  std::uint64_t wiener_cells_per_unit_time = 4096;
  double max_dt = 1e-2;
  bool deterministic_times = false;
  /// Keep the Wiener cell range of every collapse factor in the record.
  bool record_cells = false;

  /// alpha = 2 lambda / mu, so that mu alpha / 2 = lambda.
  double alpha() const { return 2.0 * lambda / mu; }

  std::uint64_t cells_per_mesh() const {
    return static_cast<std::uint64_t>(
        std::llround(static_cast<double>(wiener_cells_per_unit_time) / mu));
  }

  void validate() const {
    require(lambda > 0.0 && std::isfinite(lambda), ErrorCode::invalid_parameter,
            "lambda must be positive");
    require(mu > 0.0 && std::isfinite(mu), ErrorCode::invalid_parameter, "mu must be positive");
    require(max_dt > 0.0, ErrorCode::invalid_parameter, "max_dt must be positive");
    const double cells = static_cast<double>(wiener_cells_per_unit_time) / mu;
    require(cells >= 1.0 && std::abs(cells - std::round(cells)) <= 1e-9 * cells,
            ErrorCode::invalid_parameter,
            "mu must divide the Wiener resolution so mesh cells align with the path");
    detail::validate_schedule(sample_times, t_max);
  }
};

using ModelParams = std::variant<GrwParams, DiosiParams, HybridParams>;

struct FlashEvent {
  double time = 0.0;
  /// GRW: hit center Y_n. Hybrid: the increment image Z_n.
  double center = 0.0;
  double pre_collapse_norm2 = 0.0;
};

/// Wiener cells [first_cell, first_cell + n_cells) consumed by one collapse.
struct CollapseCell {
  std::uint64_t first_cell = 0;
  std::uint64_t n_cells = 0;
};

struct Snapshot {
  double time = 0.0;
  /// Squared norm of the unnormalized state (1 for GRW). Importance weight.
  double raw_norm2 = 1.0;
  WaveFunction state;
};

inline bool same_time(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a));
}

/// One realization of a collapse process.
struct TrajectoryRecord {
  ModelParams params;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::vector<FlashEvent> flashes;
  std::vector<Snapshot> snapshots;
  std::vector<CollapseCell> collapse_cells;
  double weight = 1.0;
  bool boundary_flag = false;

  const Snapshot* find(double t) const {
    for (const auto& s : snapshots)
      if (same_time(s.time, t)) return &s;
    return nullptr;
  }

  const Snapshot& at(double t) const {
    const Snapshot* s = find(t);
    require(s != nullptr, ErrorCode::schedule_mismatch,
            "no snapshot at t = " + std::to_string(t));
    return *s;
  }
};

}  // namespace collapse

#endif  // COLLAPSE_TRAJECTORY_HPP_
