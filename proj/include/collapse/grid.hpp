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

#ifndef COLLAPSE_GRID_HPP_
#define COLLAPSE_GRID_HPP_

// Discretized one-dimensional Hilbert space: uniform periodic grid, wave
// functions on it, the split-step Schrodinger propagator and the exact
// diagonal collapse multiplications shared by the GRW and Diosi models.
//
// Conventions: hbar = 1, mass = 1, H = -1/2 d^2/dx^2 + V, propagator
// exp(-i t H). Quadrature is the rectangle rule sum_j |psi_j|^2 dx.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "collapse/error.hpp"
#include "collapse/fft.hpp"

namespace collapse {

using Complex = std::complex<double>;
using Amplitudes = std::vector<Complex>;

/// Uniform grid x_j = x_min + j dx, j = 0..n-1, dx = (x_max - x_min) / n,
/// periodic with period x_max - x_min.
class Grid {
 public:
  Grid(std::size_t n_points, double x_min, double x_max)
      : n_(n_points), x_min_(x_min), x_max_(x_max) {
    require(n_points >= 8 && (n_points & (n_points - 1)) == 0,
            ErrorCode::invalid_parameter, "grid size must be a power of two >= 8");
    require(std::isfinite(x_min) && std::isfinite(x_max) && x_max > x_min,
            ErrorCode::invalid_parameter, "grid bounds must be finite with x_max > x_min");
    dx_ = (x_max - x_min) / static_cast<double>(n_points);
    plan_ = std::make_shared<const FftPlan>(n_points);
  }

  std::size_t size() const noexcept { return n_; }
  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  double dx() const noexcept { return dx_; }
  double length() const noexcept { return x_max_ - x_min_; }
  double x(std::size_t j) const noexcept { return x_min_ + static_cast<double>(j) * dx_; }

  /// Angular wavenumber of FFT bin j (Nyquist bin mapped to the negative side).
  double wavenumber(std::size_t j) const noexcept {
    const auto n = static_cast<long long>(n_);
    auto m = static_cast<long long>(j);
    if (m >= n / 2) m -= n;
    return 2.0 * std::numbers::pi * static_cast<double>(m) / length();
  }

  double max_abs_x() const noexcept {
    return std::max(std::abs(x_min_), std::abs(x(n_ - 1)));
  }

  const FftPlan& fft() const noexcept { return *plan_; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.n_ == b.n_ && a.x_min_ == b.x_min_ && a.x_max_ == b.x_max_;
  }

 private:
  std::size_t n_;
  double x_min_;
  double x_max_;
  double dx_ = 0.0;
  std::shared_ptr<const FftPlan> plan_;
};

namespace kernel {

inline double squared_norm(std::span<const Complex> psi, double dx) {
  double sum = 0.0;
  for (const auto& v : psi) sum += v.real() * v.real() + v.imag() * v.imag();
  return sum * dx;
}

inline Complex inner(std::span<const Complex> a, std::span<const Complex> b, double dx) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    // conj(a) * b
    re += a[j].real() * b[j].real() + a[j].imag() * b[j].imag();
    im += a[j].real() * b[j].imag() - a[j].imag() * b[j].real();
  }
  return {re * dx, im * dx};
}

inline void scale(std::span<Complex> psi, double factor) {
  for (auto& v : psi) v *= factor;
}

/// psi_j <- (alpha/pi)^(1/4) exp(-(alpha/2)(x_j - center)^2) psi_j
inline void apply_gaussian_hit(std::span<Complex> psi, const Grid& grid, double center,
                               double alpha) {
  require(alpha > 0.0 && std::isfinite(alpha), ErrorCode::invalid_parameter,
          "hitting parameter alpha must be positive");
  const double prefactor = std::pow(alpha / std::numbers::pi, 0.25);
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double d = grid.x(j) - center;
    psi[j] *= prefactor * std::exp(-0.5 * alpha * d * d);
  }
}

/// Exact collapse flow exp(sqrt(lambda) x dxi - lambda x^2 dt).
inline void apply_collapse_flow(std::span<Complex> psi, const Grid& grid, double lambda,
                                double dxi, double dt) {
  require(lambda > 0.0 && std::isfinite(lambda), ErrorCode::invalid_parameter,
          "collapse intensity lambda must be positive");
  require(dt >= 0.0, ErrorCode::invalid_parameter, "collapse flow needs dt >= 0");
  const double xm = grid.max_abs_x();
  require(lambda * xm * xm * dt <= 700.0, ErrorCode::step_too_large,
          "lambda * x_max^2 * dt exceeds 700; shrink the step or the window");
  if (dxi == 0.0 && dt == 0.0) return;
  const double root = std::sqrt(lambda);
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double x = grid.x(j);
    psi[j] *= std::exp(root * x * dxi - lambda * x * x * dt);
  }
}

}  // namespace kernel

enum class StateLabel { raw, normalized };

/// Complex amplitudes on a grid. Immutable once constructed; operations
/// return new states.
class WaveFunction {
 public:
  WaveFunction(Grid grid, Amplitudes amplitudes, StateLabel label = StateLabel::raw)
      : grid_(std::move(grid)), amplitudes_(std::move(amplitudes)), label_(label) {
    require(amplitudes_.size() == grid_.size(), ErrorCode::grid_mismatch,
            "amplitude count does not match grid size");
    if (label_ == StateLabel::normalized) {
      const double n2 = kernel::squared_norm(amplitudes_, grid_.dx());
      require(std::abs(n2 - 1.0) <= 1e-10, ErrorCode::invalid_parameter,
              "state labelled normalized has squared norm " + std::to_string(n2));
    }
  }

  const Grid& grid() const noexcept { return grid_; }
  std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }
  StateLabel label() const noexcept { return label_; }
  std::size_t size() const noexcept { return amplitudes_.size(); }
  const Complex& operator[](std::size_t j) const { return amplitudes_[j]; }

  Amplitudes copy_amplitudes() const { return amplitudes_; }

  friend bool operator==(const WaveFunction& a, const WaveFunction& b) {
    return a.grid_ == b.grid_ && a.label_ == b.label_ && a.amplitudes_ == b.amplitudes_;
  }

 private:
  Grid grid_;
  Amplitudes amplitudes_;
  StateLabel label_;
};

/// H = -1/2 d^2/dx^2 + V on the grid. `kinetic = false` together with a zero
/// potential is the H = 0 mode used by the exact-law identities.
struct HamiltonianSpec {
  std::vector<double> potential;
  bool kinetic = true;

  static HamiltonianSpec free_particle(const Grid& grid) {
    return {std::vector<double>(grid.size(), 0.0), true};
  }

  static HamiltonianSpec zero(const Grid& grid) {
    return {std::vector<double>(grid.size(), 0.0), false};
  }

  template <class Fn>
  static HamiltonianSpec with_potential(const Grid& grid, Fn&& v) {
    HamiltonianSpec h{std::vector<double>(grid.size()), true};
    for (std::size_t j = 0; j < grid.size(); ++j) h.potential[j] = v(grid.x(j));
    return h;
  }

  bool has_potential() const {
    return std::any_of(potential.begin(), potential.end(), [](double v) { return v != 0.0; });
  }

  /// True when the Strang split is exact (one of the two parts vanishes).
  bool split_is_exact() const { return !kinetic || !has_potential(); }

  void validate(const Grid& grid) const {
    require(potential.size() == grid.size(), ErrorCode::grid_mismatch,
            "potential length does not match grid");
    for (double v : potential)
      require(std::isfinite(v), ErrorCode::invalid_parameter, "potential must be finite");
  }
};

/// Collapse operator A = sqrt(lambda) x.
struct CollapseSpec {
  double lambda = 1.0;

  void validate() const {
    require(lambda > 0.0 && std::isfinite(lambda), ErrorCode::invalid_parameter,
            "lambda must be positive");
  }
};

inline double norm2(const WaveFunction& psi) {
  return kernel::squared_norm(psi.amplitudes(), psi.grid().dx());
}

inline Complex inner(const WaveFunction& psi, const WaveFunction& chi) {
  require(psi.grid() == chi.grid(), ErrorCode::grid_mismatch, "inner product across grids");
  return kernel::inner(psi.amplitudes(), chi.amplitudes(), psi.grid().dx());
}

inline WaveFunction normalize(const WaveFunction& psi) {
  const double n2 = norm2(psi);
  require(n2 > 1e-300 && std::isfinite(n2), ErrorCode::degenerate_state,
          "cannot normalize a numerically vanishing state");
  Amplitudes a = psi.copy_amplitudes();
  kernel::scale(a, 1.0 / std::sqrt(n2));
  return WaveFunction(psi.grid(), std::move(a), StateLabel::normalized);
}

/// Normalized Gaussian packet with |phi|^2 ~ N(center, sigma^2) and plane-wave
/// factor exp(i momentum x).
inline WaveFunction make_gaussian_packet(const Grid& grid, double center, double sigma,
                                         double momentum) {
  require(sigma > 0.0 && std::isfinite(sigma), ErrorCode::invalid_parameter,
          "packet width sigma must be positive");
  const double s = std::sqrt(2.0) * sigma;
  const double outside = 0.5 * std::erfc((center - grid.x_min()) / s) +
                         0.5 * std::erfc((grid.x_max() - center) / s);
  require(outside <= 1e-8, ErrorCode::grid_too_small,
          "packet mass outside the window is " + std::to_string(outside));
  Amplitudes a(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double d = grid.x(j) - center;
    a[j] = std::exp(-d * d / (4.0 * sigma * sigma)) * std::polar(1.0, momentum * grid.x(j));
  }
  return normalize(WaveFunction(grid, std::move(a)));
}

inline WaveFunction gaussian_hit(const WaveFunction& psi, double center, double alpha) {
  Amplitudes a = psi.copy_amplitudes();
  kernel::apply_gaussian_hit(a, psi.grid(), center, alpha);
  return WaveFunction(psi.grid(), std::move(a), StateLabel::raw);
}

inline WaveFunction collapse_flow(const WaveFunction& psi, const CollapseSpec& c, double dxi,
                                  double dt) {
  c.validate();
  require(dt >= 0.0, ErrorCode::invalid_parameter, "collapse flow needs dt >= 0");
  Amplitudes a = psi.copy_amplitudes();
  kernel::apply_collapse_flow(a, psi.grid(), c.lambda, dxi, dt);
  return WaveFunction(psi.grid(), std::move(a), StateLabel::raw);
}

/// One symmetric split step exp(-i V dt/2) exp(-i K dt) exp(-i V dt/2) with the
/// kinetic factor applied in Fourier space. Phase tables are built once per dt.
class SplitStepPropagator {
 public:
  SplitStepPropagator(const Grid& grid, const HamiltonianSpec& h, double dt)
      : grid_(grid), dt_(dt), kinetic_(h.kinetic), potential_(h.has_potential()) {
    h.validate(grid);
    require(dt >= 0.0 && std::isfinite(dt), ErrorCode::invalid_parameter,
            "time step must be >= 0");
    if (potential_) {
      half_potential_.resize(grid.size());
      for (std::size_t j = 0; j < grid.size(); ++j)
        half_potential_[j] = std::polar(1.0, -0.5 * dt * h.potential[j]);
    }
    if (kinetic_) {
      kinetic_phase_.resize(grid.size());
      for (std::size_t j = 0; j < grid.size(); ++j) {
        const double k = grid.wavenumber(j);
        kinetic_phase_[j] = std::polar(1.0, -0.5 * k * k * dt);
      }
    }
  }

  double dt() const noexcept { return dt_; }

  void apply(std::span<Complex> psi) const {
    if (dt_ == 0.0) return;
    if (potential_) multiply(psi, half_potential_);
    if (kinetic_) {
      grid_.fft().forward(psi);
      multiply(psi, kinetic_phase_);
      grid_.fft().inverse(psi);
    }
    if (potential_) multiply(psi, half_potential_);
  }

  WaveFunction step(const WaveFunction& psi) const {
    require(psi.grid() == grid_, ErrorCode::grid_mismatch, "propagator grid mismatch");
    if (dt_ == 0.0) return psi;
    Amplitudes a = psi.copy_amplitudes();
    apply(a);
    return WaveFunction(grid_, std::move(a), StateLabel::raw);
  }

 private:
  static void multiply(std::span<Complex> psi, const std::vector<Complex>& factor) {
    for (std::size_t j = 0; j < psi.size(); ++j) {
      const double ar = psi[j].real(), ai = psi[j].imag();
      const double br = factor[j].real(), bi = factor[j].imag();
      psi[j] = {ar * br - ai * bi, ar * bi + ai * br};
    }
  }

  Grid grid_;
  double dt_;
  bool kinetic_;
  bool potential_;
  std::vector<Complex> half_potential_;
  std::vector<Complex> kinetic_phase_;
};

/// exp(-i dt H) psi by one symmetric split step.
inline WaveFunction schrodinger_step(const WaveFunction& psi, const HamiltonianSpec& h,
                                     double dt) {
  require(dt >= 0.0, ErrorCode::invalid_parameter, "schrodinger_step needs dt >= 0");
  if (dt == 0.0) return psi;
  return SplitStepPropagator(psi.grid(), h, dt).step(psi);
}

/// Number of equal split steps used to cover `duration` with steps <= max_dt.
/// A single step suffices when the split is exact.
inline std::size_t split_step_count(const HamiltonianSpec& h, double duration, double max_dt) {
  if (duration <= 0.0) return 0;
  if (h.split_is_exact()) return 1;
  return static_cast<std::size_t>(std::ceil(duration / max_dt - 1e-12));
}

/// In-place exp(-i duration H) psi using ceil(duration / max_dt) split steps.
inline void propagate(std::span<Complex> psi, const Grid& grid, const HamiltonianSpec& h,
                      double duration, double max_dt) {
  const std::size_t steps = split_step_count(h, duration, max_dt);
  if (steps == 0) return;
  if (!h.kinetic && !h.has_potential()) return;
  const SplitStepPropagator prop(grid, h, duration / static_cast<double>(steps));
  for (std::size_t s = 0; s < steps; ++s) prop.apply(psi);
}

/// d^order/dx^order by multiplication with (i k)^order in Fourier space. The
/// Nyquist bin is zeroed for odd orders.
inline Amplitudes spectral_derivative(std::span<const Complex> psi, const Grid& grid,
                                      int order) {
  require(order >= 0, ErrorCode::invalid_parameter, "derivative order must be >= 0");
  Amplitudes a(psi.begin(), psi.end());
  if (order == 0) return a;
  grid.fft().forward(a);
  const std::size_t n = grid.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (order % 2 == 1 && j == n / 2) {
      a[j] = 0.0;
      continue;
    }
    a[j] *= std::pow(Complex(0.0, grid.wavenumber(j)), order);
  }
  grid.fft().inverse(a);
  return a;
}

/// Fraction of |psi|^2 within the outer 10% of the window (5% at each end).
inline double boundary_mass_fraction(std::span<const Complex> psi, const Grid& grid) {
  const std::size_t n = grid.size();
  const std::size_t edge = std::max<std::size_t>(1, n / 20);
  double outer = 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double p = std::norm(psi[j]);
    total += p;
    if (j < edge || j >= n - edge) outer += p;
  }
  return total > 0.0 ? outer / total : 0.0;
}

inline constexpr double kBoundaryMassLimit = 1e-6;

struct PositionMoments {
  double mean = 0.0;
  double second = 0.0;
  double variance() const { return second - mean * mean; }
};

/// <x> and <x^2> of the normalized density |psi|^2 / norm2.
inline PositionMoments position_moments(std::span<const Complex> psi, const Grid& grid) {
  double w = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double p = std::norm(psi[j]);
    const double x = grid.x(j);
    w += p;
    m1 += p * x;
    m2 += p * x * x;
  }
  require(w > 0.0, ErrorCode::degenerate_state, "moments of a vanishing state");
  return {m1 / w, m2 / w};
}

}  // namespace collapse

#endif  // COLLAPSE_GRID_HPP_
