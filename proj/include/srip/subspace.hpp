#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "srip/error.hpp"
#include "srip/linalg.hpp"
#include "srip/matrix.hpp"
#include "srip/random.hpp"

namespace srip {

/// A linear subspace of R^N held as an N x d column-orthonormal basis.
class Subspace {
 public:
  static constexpr double kOrthonormalTolerance = 1e-10;

  /// Wraps a basis that must already be column-orthonormal.
  static Subspace from_basis(Matrix basis) {
    require(basis.cols() >= 1 && basis.cols() <= basis.rows(), ErrorKind::bad_parameters,
            "subspace dimension must satisfy 1 <= d <= N");
    const Matrix gram = transpose_times(basis, basis);
    require(max_abs_difference(gram, Matrix::identity(basis.cols())) <= kOrthonormalTolerance,
            ErrorKind::bad_parameters, "basis columns are not orthonormal");
    return Subspace(std::move(basis));
  }

  /// Span of the columns of `generators`, which must have full column rank.
  static Subspace span_of(const Matrix& generators) { return Subspace(orthonormalize(generators)); }

  std::size_t ambient_dim() const noexcept { return basis_.rows(); }
  std::size_t dim() const noexcept { return basis_.cols(); }
  const Matrix& basis() const noexcept { return basis_; }

  /// N x N orthogonal projector U Uᵀ.
  Matrix projector() const { return basis_ * basis_.transposed(); }

  /// ‖U Uᵀ x‖².
  double projected_energy(std::span<const double> x) const {
    const auto c = multiply_transposed(basis_, x);
    return dot(c, c);
  }

  std::vector<double> project(std::span<const double> x) const {
    return multiply(basis_, std::span<const double>(multiply_transposed(basis_, x)));
  }

 private:
  explicit Subspace(Matrix basis) : basis_(std::move(basis)) {}
  Matrix basis_;
};

enum class AffinityMethod { trace, frobenius_cross_gram, projected_basis };

struct PrincipalDecomposition {
  std::vector<double> lambdas;  // cosines of principal angles, non-increasing, in [0, 1]
  Matrix basis1;                // N x d1
  Matrix basis2;                // N x d2
};

namespace detail {

inline void require_same_ambient(const Subspace& a, const Subspace& b) {
  require(a.ambient_dim() == b.ambient_dim(), ErrorKind::dimension_mismatch,
          "subspaces live in R^" + std::to_string(a.ambient_dim()) + " and R^" +
              std::to_string(b.ambient_dim()));
}

}  // namespace detail

/// Squared affinity tr(P1 P2) by one of three equivalent routes.
inline double affinity_squared(const Subspace& x1, const Subspace& x2,
                               AffinityMethod method = AffinityMethod::frobenius_cross_gram) {
  detail::require_same_ambient(x1, x2);
  switch (method) {
    case AffinityMethod::trace: {
      const Matrix p1 = x1.projector();
      const Matrix p2 = x2.projector();
      // tr(P1 P2) = sum_ij (P1)_ij (P2)_ji and both are symmetric.
      double t = 0.0;
      auto a = p1.entries();
      auto b = p2.entries();
      for (std::size_t i = 0; i < a.size(); ++i) t += a[i] * b[i];
      return t;
    }
    case AffinityMethod::frobenius_cross_gram: {
      const double f = frobenius_norm(transpose_times(x1.basis(), x2.basis()));
      return f * f;
    }
    case AffinityMethod::projected_basis: {
      const double f = frobenius_norm(x1.projector() * x2.basis());
      return f * f;
    }
  }
  return 0.0;
}

inline double affinity(const Subspace& x1, const Subspace& x2,
                       AffinityMethod method = AffinityMethod::frobenius_cross_gram) {
  return std::sqrt(std::max(0.0, affinity_squared(x1, x2, method)));
}

/// (1/2)‖P1 − P2‖²_F, evaluated from the projectors directly.
inline double distance_squared(const Subspace& x1, const Subspace& x2) {
  detail::require_same_ambient(x1, x2);
  const double f = frobenius_norm(x1.projector() - x2.projector());
  return 0.5 * f * f;
}

inline double distance(const Subspace& x1, const Subspace& x2) {
  return std::sqrt(distance_squared(x1, x2));
}

/// Principal orthonormal bases: bases whose cross-Gram matrix is diagonal with
/// the cosines of the principal angles on the diagonal.
inline PrincipalDecomposition principal_decomposition(const Subspace& x1, const Subspace& x2) {
  detail::require_same_ambient(x1, x2);
  const Matrix cross = transpose_times(x1.basis(), x2.basis());  // d1 x d2
  SvdResult s = svd(cross);
  const std::size_t k = s.singular_values.size();

  // Extend the thin factors to square orthogonal matrices.
  auto complete = [](const Matrix& thin, std::size_t full) {
    detail::Columns cols = detail::to_columns(thin);
    std::vector<bool> missing(full, false);
    cols.resize(full, std::vector<double>(thin.rows(), 0.0));
    for (std::size_t j = thin.cols(); j < full; ++j) missing[j] = true;
    detail::complete_orthonormal(cols, missing);
    return detail::from_columns(cols, thin.rows());
  };
  const Matrix left = complete(s.left_vectors, x1.dim());
  const Matrix right = complete(s.right_vectors, x2.dim());

  PrincipalDecomposition out;
  out.lambdas.resize(k);
  for (std::size_t i = 0; i < k; ++i) out.lambdas[i] = std::clamp(s.singular_values[i], 0.0, 1.0);
  out.basis1 = x1.basis() * left;
  out.basis2 = x2.basis() * right;
  return out;
}

/// Smallest subspace containing both inputs.
inline Subspace sum(const Subspace& x1, const Subspace& x2) {
  detail::require_same_ambient(x1, x2);
  return Subspace::from_basis(orthonormalize(hconcat(x1.basis(), x2.basis()), RankPolicy::truncate));
}

/// Sum of an arbitrary non-empty collection.
inline Subspace sum(const std::vector<Subspace>& parts) {
  require(!parts.empty(), ErrorKind::bad_parameters, "sum of an empty collection");
  Matrix all = parts.front().basis();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    detail::require_same_ambient(parts.front(), parts[i]);
    all = hconcat(all, parts[i].basis());
  }
  return Subspace::from_basis(orthonormalize(all, RankPolicy::truncate));
}

/// Image of `x` under an orthogonal N x N map (used for invariance checks).
inline Subspace transform(const Matrix& orthogonal, const Subspace& x) {
  return Subspace::from_basis(orthonormalize(orthogonal * x.basis()));
}

/// N x k matrix with orthonormal columns, Haar-distributed (QR of a Gaussian
/// matrix with the sign of diag(R) fixed).
inline Matrix random_orthonormal_frame(std::size_t n, std::size_t k, Rng& rng) {
  require(k <= n, ErrorKind::bad_parameters, "frame wider than the ambient space");
  Matrix g(n, k);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (auto& v : g.entries()) v = dist(rng);
  return orthonormalize(g);
}

inline Subspace random_subspace(std::size_t n, std::size_t d, Rng& rng) {
  require(d >= 1 && d <= n, ErrorKind::bad_parameters, "subspace dimension must satisfy 1 <= d <= N");
  return Subspace::from_basis(random_orthonormal_frame(n, d, rng));
}

/// Random pair (X1, X2) in R^N whose principal cosines are exactly `lambdas`.
///
/// With a Haar frame q: u1_i = q_i, u2_i = λ_i q_i + sqrt(1 − λ_i²) q_{d1+i}, and
/// X2's remaining `d2_extra` columns are further unused frame columns.
inline std::pair<Subspace, Subspace> random_pair_with_angles(std::size_t n, std::vector<double> lambdas,
                                                             std::size_t d2_extra, std::uint64_t seed) {
  const std::size_t d1 = lambdas.size();
  require(d1 >= 1, ErrorKind::bad_parameters, "at least one principal cosine is required");
  for (double l : lambdas)
    require(l >= 0.0 && l <= 1.0, ErrorKind::bad_parameters, "principal cosines must lie in [0, 1]");
  require(2 * d1 + d2_extra <= n, ErrorKind::bad_parameters,
          "2*len(lambdas) + d2_extra exceeds the ambient dimension");
  std::stable_sort(lambdas.begin(), lambdas.end(), std::greater<>());

  Rng rng = make_rng(seed);
  const Matrix q = random_orthonormal_frame(n, 2 * d1 + d2_extra, rng);
  Matrix u1(n, d1);
  Matrix u2(n, d1 + d2_extra);
  for (std::size_t i = 0; i < d1; ++i) {
    const double c = lambdas[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (std::size_t r = 0; r < n; ++r) {
      u1(r, i) = q(r, i);
      u2(r, i) = c * q(r, i) + s * q(r, d1 + i);
    }
  }
  for (std::size_t j = 0; j < d2_extra; ++j)
    for (std::size_t r = 0; r < n; ++r) u2(r, d1 + j) = q(r, 2 * d1 + j);
  return {Subspace::from_basis(std::move(u1)), Subspace::from_basis(std::move(u2))};
}

}  // namespace srip
