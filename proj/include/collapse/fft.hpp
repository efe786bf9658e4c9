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

#ifndef COLLAPSE_FFT_HPP_
#define COLLAPSE_FFT_HPP_

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "collapse/error.hpp"

namespace collapse {

/// In-place iterative radix-2 FFT for a fixed power-of-two size.
///
/// The plan is immutable after construction and may be shared between
/// threads. Forward transform is unnormalized; inverse divides by n, so
/// inverse(forward(v)) == v up to roundoff.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n), bitrev_(n), twiddle_(n / 2) {
    require(n >= 2 && (n & (n - 1)) == 0, ErrorCode::invalid_parameter,
            "FFT size must be a power of two >= 2");
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < n) ++log2n;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < log2n; ++b) r |= ((i >> b) & 1u) << (log2n - 1 - b);
      bitrev_[i] = r;
    }
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) /
                           static_cast<double>(n);
      twiddle_[k] = {std::cos(angle), std::sin(angle)};
    }
  }

  std::size_t size() const noexcept { return n_; }

  void forward(std::span<std::complex<double>> data) const { transform(data, false); }

  void inverse(std::span<std::complex<double>> data) const {
    transform(data, true);
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : data) v *= scale;
  }

 private:
  void transform(std::span<std::complex<double>> data, bool inverse) const {
    require(data.size() == n_, ErrorCode::invalid_parameter, "FFT size mismatch");
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j = bitrev_[i];
      if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          const std::complex<double> w = twiddle_[k * stride];
          const double wr = w.real();
          const double wi = inverse ? -w.imag() : w.imag();
          const std::complex<double> u = data[start + k];
          const std::complex<double> a = data[start + k + half];
          // Plain product; std::complex operator* adds NaN recovery we never need.
          const std::complex<double> v{a.real() * wr - a.imag() * wi,
                                       a.real() * wi + a.imag() * wr};
          data[start + k] = u + v;
          data[start + k + half] = u - v;
        }
      }
    }
  }

  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  std::vector<std::complex<double>> twiddle_;
};

}  // namespace collapse

#endif  // COLLAPSE_FFT_HPP_
