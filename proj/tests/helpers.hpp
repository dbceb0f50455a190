#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "srip/srip.hpp"

namespace testing_util {

inline srip::Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  srip::Rng rng = srip::make_rng(seed);
  srip::Matrix m(rows, cols);
  for (auto& v : m.entries()) v = srip::standard_normal(rng);
  return m;
}

inline std::vector<double> gaussian_vector(std::size_t n, std::uint64_t seed) {
  srip::Rng rng = srip::make_rng(seed);
  return srip::normal_vector(n, rng);
}

inline std::vector<double> unit_vector(std::size_t n, std::uint64_t seed) {
  auto v = gaussian_vector(n, seed);
  const double s = srip::norm2(v);
  for (auto& x : v) x /= s;
  return v;
}

inline srip::Subspace coordinate_subspace(std::size_t n, std::vector<std::size_t> axes) {
  srip::Matrix u(n, axes.size());
  for (std::size_t j = 0; j < axes.size(); ++j) u(axes[j], j) = 1.0;
  return srip::Subspace::from_basis(u);
}

inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

inline srip::Matrix random_orthogonal(std::size_t n, std::uint64_t seed) {
  srip::Rng rng = srip::make_rng(seed);
  return srip::random_orthonormal_frame(n, n, rng);
}

}  // namespace testing_util
