#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "srip/error.hpp"
#include "srip/matrix.hpp"

namespace srip {

/// Relative tolerance (against the largest singular value) below which a
/// singular value counts as zero.
inline constexpr double kRankTolerance = 1e-10;

struct SvdResult {
  Matrix left_vectors;                // m x k, orthonormal columns
  std::vector<double> singular_values;  // k values, non-increasing
  Matrix right_vectors;               // n x k, orthonormal columns
};

struct QrResult {
  Matrix q;  // m x n, orthonormal columns
  Matrix r;  // n x n, upper triangular with non-negative diagonal
};

struct SymmetricEigenResult {
  std::vector<double> eigenvalues;  // ascending
  Matrix eigenvectors;              // column j pairs with eigenvalues[j]
};

enum class RankPolicy { strict, truncate };

namespace detail {

using Columns = std::vector<std::vector<double>>;

inline Columns to_columns(const Matrix& a) {
  Columns c(a.cols(), std::vector<double>(a.rows()));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c[j][i] = a(i, j);
  return c;
}

inline Matrix from_columns(const Columns& c, std::size_t rows) {
  Matrix a(rows, c.size());
  for (std::size_t j = 0; j < c.size(); ++j)
    for (std::size_t i = 0; i < rows; ++i) a(i, j) = c[j][i];
  return a;
}

// Fills the columns flagged in `missing` with unit vectors orthogonal to every
// other column. Candidates are the standard basis vectors; the one with the
// largest residual after two Gram-Schmidt passes wins.
inline void complete_orthonormal(Columns& q, const std::vector<bool>& missing) {
  if (q.empty()) return;
  const std::size_t m = q.front().size();
  std::vector<bool> valid(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) valid[j] = !missing[j];
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (valid[j]) continue;
    std::vector<double> best;
    double best_norm = -1.0;
    for (std::size_t k = 0; k < m; ++k) {
      std::vector<double> v(m, 0.0);
      v[k] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < q.size(); ++i) {
          if (!valid[i]) continue;
          const double p = dot(q[i], v);
          for (std::size_t t = 0; t < m; ++t) v[t] -= p * q[i][t];
        }
      const double nv = norm2(v);
      if (nv > best_norm) {
        best_norm = nv;
        best = std::move(v);
      }
      if (best_norm > 0.7) break;
    }
    for (auto& x : best) x /= best_norm;
    q[j] = std::move(best);
    valid[j] = true;
  }
}

}  // namespace detail

/// Thin SVD by one-sided (Hestenes) Jacobi rotations.
inline SvdResult svd(const Matrix& a) {
  require(a.all_finite(), ErrorKind::non_finite, "svd input contains NaN or Inf");
  if (a.rows() < a.cols()) {
    SvdResult t = svd(a.transposed());
    return {std::move(t.right_vectors), std::move(t.singular_values), std::move(t.left_vectors)};
  }
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  detail::Columns u = detail::to_columns(a);
  detail::Columns v(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;

  constexpr double tol = 1e-15;
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = dot(u[p], u[p]);
        const double beta = dot(u[q], u[q]);
        const double gamma = dot(u[p], u[q]);
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double up = u[p][i];
          const double uq = u[q][i];
          u[p][i] = c * up - s * uq;
          u[q][i] = s * up + c * uq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v[p][i];
          const double vq = v[q][i];
          v[p][i] = c * vp - s * vq;
          v[q][i] = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2(u[j]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  SvdResult out;
  out.singular_values.resize(n);
  detail::Columns uc(n), vc(n);
  std::vector<bool> missing(n, false);
  const double smax = n ? sigma[order.front()] : 0.0;
  const double floor = smax * static_cast<double>(m) * std::numeric_limits<double>::epsilon();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.singular_values[k] = sigma[j];
    vc[k] = v[j];
    uc[k] = u[j];
    if (sigma[j] > floor && sigma[j] > 0.0) {
      for (auto& x : uc[k]) x /= sigma[j];
    } else {
      missing[k] = true;
    }
  }
  detail::complete_orthonormal(uc, missing);
  out.left_vectors = detail::from_columns(uc, m);
  out.right_vectors = detail::from_columns(vc, n);
  return out;
}

inline std::vector<double> singular_values(const Matrix& a) { return svd(a).singular_values; }

/// Thin Householder QR of a tall (rows >= cols) matrix. Signs are fixed so that
/// diag(R) >= 0, which makes Q unique for full-rank input.
inline QrResult householder_qr(const Matrix& a) {
  require(a.all_finite(), ErrorKind::non_finite, "qr input contains NaN or Inf");
  require(a.rows() >= a.cols(), ErrorKind::dimension_mismatch, "thin QR needs rows >= cols");
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  detail::Columns w = detail::to_columns(a);
  detail::Columns reflectors(n);

  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> v(w[k].begin() + static_cast<std::ptrdiff_t>(k), w[k].end());
    const double xnorm = norm2(v);
    if (xnorm == 0.0) continue;
    const double alpha = v[0] > 0 ? -xnorm : xnorm;
    v[0] -= alpha;
    const double vnorm = norm2(v);
    if (vnorm == 0.0) continue;
    for (auto& x : v) x /= vnorm;
    for (std::size_t j = k; j < n; ++j) {
      double p = 0.0;
      for (std::size_t i = k; i < m; ++i) p += v[i - k] * w[j][i];
      for (std::size_t i = k; i < m; ++i) w[j][i] -= 2.0 * p * v[i - k];
    }
    reflectors[k] = std::move(v);
  }

  QrResult out;
  out.r = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i) out.r(i, j) = w[j][i];

  detail::Columns q(n, std::vector<double>(m, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    q[j][j] = 1.0;
    for (std::size_t kk = n; kk-- > 0;) {
      const auto& v = reflectors[kk];
      if (v.empty()) continue;
      double p = 0.0;
      for (std::size_t i = kk; i < m; ++i) p += v[i - kk] * q[j][i];
      for (std::size_t i = kk; i < m; ++i) q[j][i] -= 2.0 * p * v[i - kk];
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (out.r(j, j) < 0.0) {
      for (auto& x : q[j]) x = -x;
      for (std::size_t c = j; c < n; ++c) out.r(j, c) = -out.r(j, c);
    }
  }
  out.q = detail::from_columns(q, m);
  return out;
}

/// Number of singular values above kRankTolerance times the largest one.
inline std::size_t numerical_rank(const std::vector<double>& sv) {
  if (sv.empty() || sv.front() <= 0.0) return 0;
  const double cut = kRankTolerance * sv.front();
  return static_cast<std::size_t>(
      std::count_if(sv.begin(), sv.end(), [cut](double s) { return s > cut; }));
}

/// Orthonormal basis for the column span of `a`.
///
/// Full-rank input goes through Householder QR. Under RankPolicy::truncate a
/// rank-deficient input is reduced to its leading left singular vectors, so
/// the column count equals the numerical rank.
inline Matrix orthonormalize(const Matrix& a, RankPolicy policy = RankPolicy::strict) {
  require(a.all_finite(), ErrorKind::non_finite, "orthonormalize input contains NaN or Inf");
  if (a.cols() <= a.rows()) {
    QrResult qr = householder_qr(a);
    const std::size_t rank = numerical_rank(singular_values(qr.r));
    if (rank == a.cols()) return std::move(qr.q);
    require(policy == RankPolicy::truncate, ErrorKind::rank_deficient,
            "numerical rank " + std::to_string(rank) + " < " + std::to_string(a.cols()) + " columns");
  }
  SvdResult s = svd(a);
  const std::size_t rank = numerical_rank(s.singular_values);
  require(policy == RankPolicy::truncate, ErrorKind::rank_deficient,
          "numerical rank " + std::to_string(rank) + " < " + std::to_string(a.cols()) + " columns");
  return s.left_vectors.left_columns(rank);
}

/// Eigen-decomposition of a real symmetric matrix: Householder reduction to
/// tridiagonal form followed by the implicit QL iteration.
inline SymmetricEigenResult symmetric_eigen(const Matrix& s) {
  require(s.rows() == s.cols(), ErrorKind::dimension_mismatch, "symmetric_eigen needs a square matrix");
  require(s.all_finite(), ErrorKind::non_finite, "symmetric_eigen input contains NaN or Inf");
  const std::size_t n = s.rows();
  SymmetricEigenResult out;
  if (n == 0) return out;
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) v(i, j) = 0.5 * (s(i, j) + s(j, i));
  std::vector<double> d(n), e(n, 0.0);

  // Tridiagonalize.
  for (std::size_t j = 0; j < n; ++j) d[j] = v(n - 1, j);
  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
        v(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        v(j, i) = f;
        g = e[j] + v(j, j) * f;
        for (std::size_t k = j + 1; k <= i - 1; ++k) {
          g += v(k, j) * d[k];
          e[k] += v(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k <= i - 1; ++k) v(k, j) -= (f * e[k] + g * d[k]);
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
      }
    }
    d[i] = h;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    v(n - 1, i) = v(i, i);
    v(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = v(k, i + 1) / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
        for (std::size_t k = 0; k <= i; ++k) v(k, j) -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = v(n - 1, j);
    v(n - 1, j) = 0.0;
  }
  v(n - 1, n - 1) = 1.0;
  e[0] = 0.0;

  // Implicit QL on the tridiagonal matrix.
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m == n) m = n - 1;
    if (m > l) {
      int iterations = 0;
      do {
        require(++iterations < 200, ErrorKind::non_finite, "QL iteration did not converge");
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double sn = 0.0, s2 = 0.0;
        for (std::size_t i = m; i-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = sn;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = sn * r;
          sn = e[i] / r;
          c = p / r;
          p = c * d[i] - sn * g;
          d[i + 1] = h + sn * (c * g + sn * d[i]);
          for (std::size_t k = 0; k < n; ++k) {
            h = v(k, i + 1);
            v(k, i + 1) = sn * v(k, i) + c * h;
            v(k, i) = c * v(k, i) - sn * h;
          }
        }
        p = -sn * s2 * c3 * el1 * e[l] / dl1;
        e[l] = sn * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = d[order[k]];
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

}  // namespace srip
