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

#ifndef COLLAPSE_MASTER_HPP_
#define COLLAPSE_MASTER_HPP_

// Lindblad evolution of position-space density matrices for the GRW and Diosi
// models, and density matrices estimated from trajectory ensembles.
//
// Entries are stored as M_ij = rho(x_i, x_j) dx, i.e. the density operator in
// the orthonormal grid basis, so that trace = sum_i M_ii.

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "collapse/diosi.hpp"
#include "collapse/error.hpp"
#include "collapse/grid.hpp"

namespace collapse {

inline constexpr std::size_t kMaxMasterGridPoints = 128;

class DensityMatrix {
 public:
  DensityMatrix(Grid grid, Eigen::MatrixXcd entries)
      : grid_(std::move(grid)), entries_(std::move(entries)) {
    require(grid_.size() <= kMaxMasterGridPoints, ErrorCode::invalid_parameter,
            "density matrices are limited to 128 grid points");
    require(entries_.rows() == static_cast<Eigen::Index>(grid_.size()) &&
                entries_.cols() == entries_.rows(),
            ErrorCode::grid_mismatch, "density matrix shape does not match grid");
  }

  /// |psi><psi| for a state on the grid.
  static DensityMatrix pure(const WaveFunction& psi) {
    const auto n = static_cast<Eigen::Index>(psi.size());
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = psi[static_cast<std::size_t>(i)];
    Eigen::MatrixXcd m = v * v.adjoint() * psi.grid().dx();
    return DensityMatrix(psi.grid(), std::move(m));
  }

  const Grid& grid() const noexcept { return grid_; }
  const Eigen::MatrixXcd& entries() const noexcept { return entries_; }

  /// Kernel value rho(x_i, x_j).
  Complex kernel(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) / grid_.dx();
  }

  double trace() const { return entries_.trace().real(); }

  double hermiticity_defect() const { return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff(); }

  double min_eigenvalue() const {
    const Eigen::MatrixXcd herm = 0.5 * (entries_ + entries_.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
  }

 private:
  Grid grid_;
  Eigen::MatrixXcd entries_;
};

/// Matrix of H = -1/2 d^2/dx^2 + V in the grid basis; the kinetic part is the
/// spectral (Fourier) Laplacian, matching the split-step propagator.
inline Eigen::MatrixXcd hamiltonian_matrix(const Grid& grid, const HamiltonianSpec& h) {
  h.validate(grid);
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXcd hm = Eigen::MatrixXcd::Zero(n, n);
  if (h.kinetic) {
    Amplitudes col(grid.size());
    for (Eigen::Index j = 0; j < n; ++j) {
      std::fill(col.begin(), col.end(), Complex{});
      col[static_cast<std::size_t>(j)] = 1.0;
      grid.fft().forward(col);
      for (std::size_t m = 0; m < grid.size(); ++m) {
        const double k = grid.wavenumber(m);
        col[m] *= 0.5 * k * k;
      }
      grid.fft().inverse(col);
      for (Eigen::Index i = 0; i < n; ++i) hm(i, j) = col[static_cast<std::size_t>(i)];
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) hm(i, i) += h.potential[static_cast<std::size_t>(i)];
  return hm;
}

/// Off-diagonal decay rate of the GRW master equation, mu (1 - exp(-alpha d^2 / 4)).
inline double grw_decoherence_rate(double mu, double alpha, double separation) {
  return -mu * std::expm1(-0.25 * alpha * separation * separation);
}

/// Off-diagonal decay rate of the Diosi master equation, (lambda / 2) d^2.
inline double diosi_decoherence_rate(double lambda, double separation) {
  return 0.5 * lambda * separation * separation;
}

namespace detail {

inline Eigen::MatrixXcd evolve_rk4(const Eigen::MatrixXcd& rho0, const Eigen::MatrixXcd& hm,
                                   bool has_h, const Eigen::MatrixXd& rates, double t,
                                   std::size_t steps) {
  const Complex minus_i(0.0, -1.0);
  auto generator = [&](const Eigen::MatrixXcd& m) -> Eigen::MatrixXcd {
    Eigen::MatrixXcd out = -(rates.cast<Complex>().cwiseProduct(m));
    if (has_h) out.noalias() += minus_i * (hm * m - m * hm);
    return out;
  };
  const double dt = t / static_cast<double>(steps);
  Eigen::MatrixXcd rho = rho0;
  for (std::size_t s = 0; s < steps; ++s) {
    const Eigen::MatrixXcd k1 = generator(rho);
    const Eigen::MatrixXcd k2 = generator(rho + 0.5 * dt * k1);
    const Eigen::MatrixXcd k3 = generator(rho + 0.5 * dt * k2);
    const Eigen::MatrixXcd k4 = generator(rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return rho;
}

/// Fixed-step RK4 for d rho/dt = -i[H, rho] - R o rho, validated by
/// repeating the integration with half the step.
inline DensityMatrix evolve_master(const DensityMatrix& rho0, const HamiltonianSpec& h,
                                   const std::function<double(double)>& rate, double t,
                                   double dt) {
  require(t >= 0.0, ErrorCode::invalid_parameter, "evolution time must be >= 0");
  require(dt > 0.0, ErrorCode::invalid_parameter, "time step must be positive");
  const Grid& grid = rho0.grid();
  const auto n = static_cast<Eigen::Index>(grid.size());
  const bool has_h = h.kinetic || h.has_potential();
  const Eigen::MatrixXcd hm = hamiltonian_matrix(grid, h);
  Eigen::MatrixXd rates(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      rates(i, j) = rate(grid.x(static_cast<std::size_t>(i)) - grid.x(static_cast<std::size_t>(j)));
  if (t == 0.0) return rho0;

  const std::size_t steps =
      static_cast<std::size_t>(std::ceil(t / dt - 1e-12));
  const double step = t / static_cast<double>(steps);
  // |generator| <= 2 |H| + max rate; |H| is the spectral radius (H is Hermitian).
  double hnorm = 0.0;
  if (has_h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hm, Eigen::EigenvaluesOnly);
    hnorm = solver.eigenvalues().cwiseAbs().maxCoeff();
  }
  const double gen_norm = 2.0 * hnorm + rates.maxCoeff();
  require(step * gen_norm <= 0.1, ErrorCode::step_too_large,
          "dt * |generator| exceeds 0.1; need dt <= " + std::to_string(0.1 / gen_norm));

  const Eigen::MatrixXcd coarse = evolve_rk4(rho0.entries(), hm, has_h, rates, t, steps);
  const Eigen::MatrixXcd fine = evolve_rk4(rho0.entries(), hm, has_h, rates, t, 2 * steps);
  const double diff = (coarse - fine).cwiseAbs().maxCoeff();
  require(diff <= 1e-6, ErrorCode::step_too_large,
          "step-halving disagreement " + std::to_string(diff));
  return DensityMatrix(grid, coarse);
}

}  // namespace detail

inline DensityMatrix evolve_grw_master(const DensityMatrix& rho0, const HamiltonianSpec& h,
                                       double mu, double alpha, double t, double dt) {
  require(mu > 0.0 && alpha > 0.0, ErrorCode::invalid_parameter, "mu, alpha must be positive");
  return detail::evolve_master(
      rho0, h, [=](double d) { return grw_decoherence_rate(mu, alpha, d); }, t, dt);
}

inline DensityMatrix evolve_diosi_master(const DensityMatrix& rho0, const HamiltonianSpec& h,
                                         double lambda, double t, double dt) {
  require(lambda > 0.0, ErrorCode::invalid_parameter, "lambda must be positive");
  return detail::evolve_master(
      rho0, h, [=](double d) { return diosi_decoherence_rate(lambda, d); }, t, dt);
}

/// Ensemble mean (1/N) sum w_i |phi_i><phi_i| together with the entrywise
/// standard errors of its real and imaginary parts.
struct EnsembleDensity {
  DensityMatrix mean;
  Eigen::MatrixXd se_real;
  Eigen::MatrixXd se_imag;
};

inline EnsembleDensity ensemble_density_with_error(const WeightedEnsemble& ensemble) {
  require(ensemble.size() > 0, ErrorCode::invalid_parameter, "empty ensemble");
  const Grid& grid = ensemble.states.front().grid();
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double count = static_cast<double>(ensemble.size());
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXd sq_re = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd sq_im = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t s = 0; s < ensemble.size(); ++s) {
    const WaveFunction& phi = ensemble.states[s];
    require(phi.grid() == grid, ErrorCode::grid_mismatch, "ensemble states on different grids");
    const Eigen::MatrixXcd outer = DensityMatrix::pure(phi).entries() * ensemble.weights[s];
    sum += outer;
    sq_re += outer.real().cwiseAbs2();
    sq_im += outer.imag().cwiseAbs2();
  }
  Eigen::MatrixXcd mean = sum / count;
  Eigen::MatrixXd se_re = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd se_im = Eigen::MatrixXd::Zero(n, n);
  if (ensemble.size() > 1) {
    const Eigen::MatrixXd var_re =
        ((sq_re / count - mean.real().cwiseAbs2()) * (count / (count - 1.0))).cwiseMax(0.0);
    const Eigen::MatrixXd var_im =
        ((sq_im / count - mean.imag().cwiseAbs2()) * (count / (count - 1.0))).cwiseMax(0.0);
    se_re = (var_re / count).cwiseSqrt();
    se_im = (var_im / count).cwiseSqrt();
  }
  // Symmetrize so the estimate is Hermitian to the last bit.
  mean = 0.5 * (mean + mean.adjoint()).eval();
  return {DensityMatrix(grid, std::move(mean)), std::move(se_re), std::move(se_im)};
}

/// For Diosi ensembles this is the Q-average of the raw |psi><psi|; for GRW
/// (all weights 1) the plain average of |phi><phi|.
inline DensityMatrix ensemble_density(const WeightedEnsemble& ensemble) {
  return ensemble_density_with_error(ensemble).mean;
}

}  // namespace collapse

#endif  // COLLAPSE_MASTER_HPP_
