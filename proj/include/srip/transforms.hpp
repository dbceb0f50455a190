#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "srip/error.hpp"

namespace srip {

using Complex = std::complex<double>;

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

constexpr std::size_t next_power_of_two(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Precomputed radix-2 twiddles and bit-reversal permutation for one length.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    require(is_power_of_two(n), ErrorKind::bad_length,
            "FFT length " + std::to_string(n) + " is not a power of two");
    twiddles_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddles_[k] = {std::cos(angle), std::sin(angle)};
    }
    reversed_.resize(n);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b)
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      reversed_[i] = r;
    }
  }

  std::size_t size() const noexcept { return n_; }

  /// In-place unnormalized DFT: X_k = sum_j x_j exp(-2 pi i jk / n).
  void forward(std::span<Complex> x) const { run(x, false); }

  /// In-place inverse DFT including the 1/n factor.
  void inverse(std::span<Complex> x) const {
    run(x, true);
    const double s = 1.0 / static_cast<double>(n_);
    for (auto& v : x) v *= s;
  }

 private:
  void run(std::span<Complex> x, bool conjugate) const {
    require(x.size() == n_, ErrorKind::bad_length, "FFT input length does not match plan");
    for (std::size_t i = 0; i < n_; ++i)
      if (i < reversed_[i]) std::swap(x[i], x[reversed_[i]]);
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          Complex w = twiddles_[k * stride];
          if (conjugate) w = std::conj(w);
          const Complex a = x[start + k];
          const Complex b = w * x[start + k + half];
          x[start + k] = a + b;
          x[start + k + half] = a - b;
        }
      }
    }
  }

  std::size_t n_;
  std::vector<Complex> twiddles_;
  std::vector<std::size_t> reversed_;
};

inline std::vector<Complex> fft(std::vector<Complex> x) {
  FftPlan(x.size()).forward(x);
  return x;
}

inline std::vector<Complex> inverse_fft(std::vector<Complex> x) {
  FftPlan(x.size()).inverse(x);
  return x;
}

/// In-place unnormalized Walsh-Hadamard transform in natural (Sylvester) order,
/// i.e. multiplication by H with H_ij = (-1)^popcount(i & j).
inline void fwht_in_place(std::span<double> x) {
  require(is_power_of_two(x.size()), ErrorKind::bad_length,
          "FWHT length " + std::to_string(x.size()) + " is not a power of two");
  for (std::size_t len = 1; len < x.size(); len <<= 1) {
    for (std::size_t start = 0; start < x.size(); start += 2 * len) {
      for (std::size_t k = start; k < start + len; ++k) {
        const double a = x[k];
        const double b = x[k + len];
        x[k] = a + b;
        x[k + len] = a - b;
      }
    }
  }
}

inline std::vector<double> fwht(std::vector<double> x) {
  fwht_in_place(x);
  return x;
}

}  // namespace srip
