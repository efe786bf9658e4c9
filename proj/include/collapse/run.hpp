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

#ifndef COLLAPSE_RUN_HPP_
#define COLLAPSE_RUN_HPP_

// Ensemble runs and plot-data emission. Records are generated in parallel
// chunks but consumed strictly in trajectory-index order, so every artifact
// is a function of (config, seed) alone.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "collapse/archive.hpp"
#include "collapse/config.hpp"
#include "collapse/diosi.hpp"
#include "collapse/grw.hpp"
#include "collapse/master.hpp"
#include "collapse/parallel.hpp"
#include "collapse/stats.hpp"

namespace collapse::io {

inline constexpr const char* kCrlf = "\r\n";

/// Runs one trajectory of the configured model.
inline TrajectoryRecord run_trajectory(const RunConfig& c, const WaveFunction& phi0,
                                       const HamiltonianSpec& h, std::uint64_t index) {
  const std::uint64_t seed = *c.seed;
  switch (c.model) {
    case Model::grw: return grw_trajectory(phi0, h, c.grw_params(), seed, index);
    case Model::diosi: return diosi_trajectory(phi0, h, c.diosi_params(), seed, index);
    case Model::hybrid: return hybrid_trajectory(phi0, h, c.hybrid_params(), seed, index);
    default: break;
  }
  throw Error(ErrorCode::invalid_parameter, "model " + to_string(c.model) + " has no trajectories");
}

namespace detail {

/// Per-sample-time running sums, filled in index order.
struct TimeAccumulator {
  std::vector<double> weight;
  std::vector<double> weighted_x;
  std::vector<double> weighted_x2;
  std::vector<double> density_sum;
  std::vector<double> density_sq;
  std::uint64_t boundary_flags = 0;
};

}  // namespace detail

/// Writes the archive, the per-time summary and the decimated density table.
inline void simulate(const RunConfig& c, std::size_t workers, std::ostream& archive,
                     std::ostream& summary, std::ostream& density) {
  c.validate();
  require(c.model == Model::grw || c.model == Model::diosi || c.model == Model::hybrid,
          ErrorCode::config_violation, "simulate needs model grw, diosi or hybrid");
  const Grid grid = c.grid();
  const WaveFunction phi0 = c.initial_state();
  const HamiltonianSpec h = c.hamiltonian();
  const auto times = c.effective_sample_times();
  const std::size_t stride = c.density_stride;
  const std::size_t n_density = (grid.size() + stride - 1) / stride;

  // Fail fast on parameter errors before any output is produced.
  std::visit([](const auto& p) { p.validate(); }, params_for(c));

  ArchiveWriter writer(archive, c, c.n_trajectories);
  std::vector<detail::TimeAccumulator> acc(times.size());
  for (auto& a : acc) {
    a.density_sum.assign(n_density, 0.0);
    a.density_sq.assign(n_density, 0.0);
  }

  constexpr std::uint64_t chunk = 256;
  for (std::uint64_t start = 0; start < c.n_trajectories; start += chunk) {
    const std::uint64_t count = std::min(chunk, c.n_trajectories - start);
    const auto records = parallel_map(count, workers, [&](std::size_t i) {
      return run_trajectory(c, phi0, h, start + i);
    });
    for (const auto& rec : records) {
      writer.append(rec);
      for (std::size_t k = 0; k < times.size(); ++k) {
        const Snapshot& s = rec.snapshots[k];
        auto& a = acc[k];
        const auto m = position_moments(s.state.amplitudes(), grid);
        a.weight.push_back(s.raw_norm2);
        a.weighted_x.push_back(s.raw_norm2 * m.mean);
        a.weighted_x2.push_back(s.raw_norm2 * m.second);
        for (std::size_t d = 0; d < n_density; ++d) {
          const double p = s.raw_norm2 * std::norm(s.state[d * stride]);
          a.density_sum[d] += p;
          a.density_sq[d] += p * p;
        }
        if (rec.boundary_flag) ++a.boundary_flags;
      }
    }
  }
  writer.finish();

  summary << "time,n_trajectories,mean_weight,mean_weight_se,mean_position,mean_position_se,"
             "position_variance,boundary_flags"
          << kCrlf;
  density << "time,x,density,se" << kCrlf;
  const auto n = static_cast<double>(c.n_trajectories);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto& a = acc[k];
    const auto w = estimate_mean(a.weight);
    const auto x = estimate_mean(a.weighted_x);
    const double x2 = estimate_mean(a.weighted_x2).mean;
    const bool any = c.n_trajectories > 0;
    summary << format_double(times[k]) << ',' << c.n_trajectories << ','
            << format_double(any ? w.mean : 0.0) << ',' << format_double(w.se) << ','
            << format_double(x.mean) << ',' << format_double(x.se) << ','
            << format_double(any ? x2 - x.mean * x.mean : 0.0) << ',' << a.boundary_flags
            << kCrlf;
    for (std::size_t d = 0; d < n_density; ++d) {
      double mean = 0.0, se = 0.0;
      if (any) {
        mean = a.density_sum[d] / n;
        if (n > 1) {
          const double var = std::max(0.0, (a.density_sq[d] - n * mean * mean) / (n - 1.0));
          se = std::sqrt(var / n);
        }
      }
      density << format_double(times[k]) << ',' << format_double(grid.x(d * stride)) << ','
              << format_double(mean) << ',' << format_double(se) << kCrlf;
    }
  }
  require(static_cast<bool>(summary) && static_cast<bool>(density), ErrorCode::io_failure,
          "CSV write failed");
}

/// Density-matrix evolution of the initial packet; writes the diagonal at each
/// sample time and a per-time summary.
inline void run_master(const RunConfig& c, std::ostream& summary, std::ostream& density) {
  c.validate();
  require(c.model == Model::master, ErrorCode::config_violation, "run_master needs model master");
  const Grid grid = c.grid();
  require(grid.size() <= kMaxMasterGridPoints, ErrorCode::config_violation,
          "master model is limited to 128 grid points");
  const HamiltonianSpec h = c.hamiltonian();
  DensityMatrix rho = DensityMatrix::pure(c.initial_state());
  summary << "time,trace,hermiticity_defect,min_eigenvalue,mean_position,position_variance"
          << kCrlf;
  density << "time,x,density,se" << kCrlf;
  double now = 0.0;
  for (double t : c.effective_sample_times()) {
    const double span = t - now;
    if (span > 0.0) {
      rho = c.decoherence == "grw"
                ? evolve_grw_master(rho, h, c.effective_mu(), c.effective_alpha(), span,
                                    c.master_dt)
                : evolve_diosi_master(rho, h, *c.lambda, span, c.master_dt);
    }
    now = t;
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double p = rho.kernel(j, j).real();
      m0 += p;
      m1 += p * grid.x(j);
      m2 += p * grid.x(j) * grid.x(j);
    }
    const double mean = m1 / m0;
    summary << format_double(t) << ',' << format_double(rho.trace()) << ','
            << format_double(rho.hermiticity_defect()) << ','
            << format_double(rho.min_eigenvalue()) << ',' << format_double(mean) << ','
            << format_double(m2 / m0 - mean * mean) << kCrlf;
    for (std::size_t j = 0; j < grid.size(); j += c.density_stride)
      density << format_double(t) << ',' << format_double(grid.x(j)) << ','
              << format_double(rho.kernel(j, j).real()) << ",0" << kCrlf;
  }
}

/// Ensemble density at one sampled time from an archive: columns x, density,
/// se. Diosi and hybrid records are weighted by their raw squared norms.
inline void export_density_csv(const TrajectoryArchive& a, double time, std::ostream& out,
                               std::size_t stride = 1) {
  require(stride >= 1, ErrorCode::invalid_parameter, "stride must be >= 1");
  bool sampled = false;
  for (double t : a.header.sample_times) sampled = sampled || same_time(t, time);
  require(sampled, ErrorCode::schedule_mismatch,
          "time " + format_double(time) + " is not a sample time of this archive");
  const Grid grid = a.config.grid();
  const bool weighted = a.header.model != Model::grw;
  out << "x,density,se" << kCrlf;
  std::vector<double> values(a.records.size());
  for (std::size_t j = 0; j < grid.size(); j += stride) {
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      const Snapshot& s = a.records[i].at(time);
      values[i] = (weighted ? s.raw_norm2 : 1.0) * std::norm(s.state[j]);
    }
    const auto e = estimate_mean(values);
    out << format_double(grid.x(j)) << ',' << format_double(e.mean) << ',' << format_double(e.se)
        << kCrlf;
  }
  require(static_cast<bool>(out), ErrorCode::io_failure, "CSV write failed");
}

}  // namespace collapse::io

#endif  // COLLAPSE_RUN_HPP_
