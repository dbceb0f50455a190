#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "srip/error.hpp"
#include "srip/linalg.hpp"
#include "srip/matrix.hpp"
#include "srip/random.hpp"
#include "srip/subspace.hpp"
#include "srip/transforms.hpp"

namespace srip {

enum class Family {
  gaussian,
  rademacher,
  uniform_subgaussian,
  partial_fourier,
  partial_hadamard,
  partial_circulant,
  partial_toeplitz,
  student_t,
  laplace_log_concave,
  // Deterministic stubs for tests and sanity runs.
  identity,
  zero,
};

/// The random families, in declaration order.
inline constexpr std::array<Family, 9> kRandomFamilies = {
    Family::gaussian,          Family::rademacher,       Family::uniform_subgaussian,
    Family::partial_fourier,   Family::partial_hadamard, Family::partial_circulant,
    Family::partial_toeplitz,  Family::student_t,        Family::laplace_log_concave,
};

inline std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::rademacher: return "rademacher";
    case Family::uniform_subgaussian: return "uniform_subgaussian";
    case Family::partial_fourier: return "partial_fourier";
    case Family::partial_hadamard: return "partial_hadamard";
    case Family::partial_circulant: return "partial_circulant";
    case Family::partial_toeplitz: return "partial_toeplitz";
    case Family::student_t: return "student_t";
    case Family::laplace_log_concave: return "laplace_log_concave";
    case Family::identity: return "identity";
    case Family::zero: return "zero";
  }
  return "unknown";
}

inline Family family_from_string(std::string_view name) {
  for (Family f : kRandomFamilies)
    if (to_string(f) == name) return f;
  if (name == "identity") return Family::identity;
  if (name == "zero") return Family::zero;
  fail(ErrorKind::bad_parameters, "unknown ensemble family '" + std::string(name) + "'");
}

constexpr bool is_structured(Family f) noexcept {
  return f == Family::partial_fourier || f == Family::partial_hadamard || f == Family::partial_circulant ||
         f == Family::partial_toeplitz;
}

/// Families whose rows have i.i.d. entries (the ones with a row-tail diagnostic).
constexpr bool has_iid_entries(Family f) noexcept {
  return f == Family::gaussian || f == Family::rademacher || f == Family::uniform_subgaussian ||
         f == Family::student_t || f == Family::laplace_log_concave || f == Family::zero;
}

enum class RowSelection { random, prefix };

struct EnsembleParams {
  double nu = 5.0;                  // student_t degrees of freedom
  bool real_generator = false;      // partial_circulant: real Gaussian generator instead of complex
  bool sign_randomization = true;   // D_ε for partial_fourier / partial_hadamard / partial_circulant
  bool unit_scale = false;          // test mode: drop the 1/sqrt(n)-type normalization
  RowSelection rows = RowSelection::random;

  friend bool operator==(const EnsembleParams&, const EnsembleParams&) = default;
};

struct EnsembleSpec {
  Family family = Family::gaussian;
  std::size_t n = 1;  // target dimension
  std::size_t N = 1;  // ambient dimension
  EnsembleParams params;
  std::uint64_t seed = 0;

  friend bool operator==(const EnsembleSpec&, const EnsembleSpec&) = default;
};

inline void validate(const EnsembleSpec& spec) {
  require(spec.n >= 1 && spec.n <= spec.N, ErrorKind::bad_parameters,
          "need 1 <= n <= N, got n=" + std::to_string(spec.n) + " N=" + std::to_string(spec.N));
  if (spec.family == Family::partial_hadamard)
    require(is_power_of_two(spec.N), ErrorKind::bad_parameters,
            "partial_hadamard needs a power-of-two N, got " + std::to_string(spec.N));
  if (spec.family == Family::student_t)
    require(spec.params.nu > 2.0, ErrorKind::bad_parameters, "student_t needs nu > 2 for finite variance");
}

namespace detail {

/// Unit-variance entry draws for the i.i.d. families.
class EntrySampler {
 public:
  EntrySampler(Family family, double nu)
      : family_(family), student_(nu > 2.0 ? nu : 3.0), student_scale_(nu > 2.0 ? std::sqrt((nu - 2.0) / nu) : 0.0) {}

  double operator()(Rng& rng) {
    switch (family_) {
      case Family::gaussian: return normal_(rng);
      case Family::rademacher: return (rng() >> 63) ? 1.0 : -1.0;
      case Family::uniform_subgaussian: return uniform_(rng);
      case Family::student_t: return student_scale_ * student_(rng);
      case Family::laplace_log_concave: {
        const double e = exponential_(rng) * std::numbers::sqrt2 / 2.0;
        return (rng() >> 63) ? e : -e;
      }
      case Family::zero: return 0.0;
      default: fail(ErrorKind::bad_parameters, "family has no i.i.d. entry law");
    }
  }

 private:
  Family family_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{-std::numbers::sqrt3, std::numbers::sqrt3};
  std::exponential_distribution<double> exponential_{1.0};
  std::student_t_distribution<double> student_;
  double student_scale_;
};

// Value of row r of the real orthonormal Fourier basis of length P, applied to
// a vector whose unnormalized DFT is z (without the 1/sqrt(P) factor).
//   r = 0, r = P/2        : Re z_r
//   0 < r < P/2           : sqrt2 Re z_r
//   P/2 < r < P, k = r-P/2: sqrt2 Im z_k
inline double real_fourier_coefficient(std::span<const Complex> z, std::size_t r) {
  const std::size_t p = z.size();
  if (r == 0 || 2 * r == p) return z[r].real();
  if (2 * r < p) return std::numbers::sqrt2 * z[r].real();
  return std::numbers::sqrt2 * z[r - p / 2].imag();
}

// Dense entry (r, j) of the same basis, without the 1/sqrt(P) factor.
inline double real_fourier_entry(std::size_t p, std::size_t r, std::size_t j) {
  const auto angle = [p](std::size_t k, std::size_t jj) {
    // Reduce jk mod P before converting so the angle stays accurate.
    return 2.0 * std::numbers::pi * static_cast<double>((k * jj) % p) / static_cast<double>(p);
  };
  if (r == 0) return 1.0;
  if (2 * r == p) return (j % 2 == 0) ? 1.0 : -1.0;
  if (2 * r < p) return std::numbers::sqrt2 * std::cos(angle(r, j));
  return -std::numbers::sqrt2 * std::sin(angle(r - p / 2, j));
}

}  // namespace detail

/// A realized n x N projection. Unstructured families hold the dense matrix;
/// structured families hold sign flips, sampled rows and transform data and
/// apply in O(N log N).
class ProjectionOperator {
 public:
  const EnsembleSpec& spec() const noexcept { return spec_; }
  std::size_t rows() const noexcept { return spec_.n; }
  std::size_t cols() const noexcept { return spec_.N; }
  bool structured() const noexcept { return !std::holds_alternative<Dense>(realization_); }
  const std::vector<double>& signs() const noexcept { return signs_; }

  /// Φx.
  std::vector<double> apply(std::span<const double> x) const {
    require(x.size() == spec_.N, ErrorKind::dimension_mismatch,
            "vector of length " + std::to_string(x.size()) + " for an operator on R^" + std::to_string(spec_.N));
    return std::visit([&](const auto& r) { return apply_impl(r, x); }, realization_);
  }

  /// Φ applied to every column of `u` (N x d), giving n x d.
  Matrix apply(const Matrix& u) const {
    require(u.rows() == spec_.N, ErrorKind::dimension_mismatch,
            "basis with " + std::to_string(u.rows()) + " rows for an operator on R^" + std::to_string(spec_.N));
    if (const auto* dense = std::get_if<Dense>(&realization_)) return dense->phi * u;
    Matrix out(spec_.n, u.cols());
    for (std::size_t j = 0; j < u.cols(); ++j) {
      const auto col = u.column(j);
      out.set_column(j, apply(std::span<const double>(col)));
    }
    return out;
  }

  /// Explicit n x N matrix, built entry by entry from the realization's
  /// definition rather than through the fast transform.
  Matrix densify() const {
    Matrix out = std::visit([&](const auto& r) { return densify_impl(r); }, realization_);
    if (!signs_.empty())
      for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) *= signs_[j];
    return out;
  }

  /// Operator backed by an arbitrary dense matrix (tests, custom maps).
  static ProjectionOperator from_dense(Matrix phi) {
    require(phi.rows() >= 1 && phi.cols() >= 1, ErrorKind::bad_parameters, "empty operator");
    ProjectionOperator op;
    op.spec_.family = Family::identity;
    op.spec_.n = phi.rows();
    op.spec_.N = phi.cols();
    op.realization_ = Dense{std::move(phi)};
    return op;
  }

  /// Partial circulant with an explicit first row `generator`, keeping the
  /// listed rows. Complex generators emit (Re, Im) pairs per row.
  static ProjectionOperator circulant(std::vector<Complex> generator, std::vector<std::size_t> kept_rows,
                                      bool complex_output, double scale, std::vector<double> signs = {}) {
    const std::size_t n_amb = generator.size();
    require(n_amb >= 1, ErrorKind::bad_parameters, "empty circulant generator");
    for (auto r : kept_rows) require(r < n_amb, ErrorKind::bad_parameters, "circulant row index out of range");
    require(signs.empty() || signs.size() == n_amb, ErrorKind::dimension_mismatch, "sign vector length");
    ProjectionOperator op;
    op.spec_.family = Family::partial_circulant;
    op.spec_.N = n_amb;
    op.spec_.n = complex_output ? 2 * kept_rows.size() : kept_rows.size();
    op.spec_.params.real_generator = !complex_output;
    op.spec_.params.sign_randomization = !signs.empty();
    op.signs_ = std::move(signs);
    op.realization_ = make_circulant(std::move(generator), std::move(kept_rows), complex_output, scale,
                                     op.spec_.n);
    return op;
  }

  friend ProjectionOperator sample(const EnsembleSpec& spec);

 private:
  struct Dense {
    Matrix phi;
  };
  struct Fourier {
    std::size_t padded;
    std::vector<std::size_t> rows;
    double scale;
    std::shared_ptr<const FftPlan> plan;
  };
  struct Hadamard {
    std::vector<std::size_t> rows;
    double scale;
  };
  // Circulant of size `length` with first row `first_row`, realized through a
  // cyclic (or folded linear) convolution of size plan->size().
  struct Circulant {
    std::size_t length;
    std::vector<Complex> first_row;
    std::vector<Complex> spectrum;
    std::shared_ptr<const FftPlan> plan;
    std::vector<std::size_t> rows;
    bool complex_output;
    double scale;
    std::size_t out_dim;
    // Toeplitz diagonals t_{-(N-1)}..t_{N-1} when this circulant embeds a Toeplitz matrix.
    std::vector<double> toeplitz;
  };

  static Circulant make_circulant(std::vector<Complex> first_row, std::vector<std::size_t> rows,
                                  bool complex_output, double scale, std::size_t out_dim) {
    const std::size_t len = first_row.size();
    const std::size_t conv = is_power_of_two(len) ? len : next_power_of_two(2 * len - 1);
    auto plan = std::make_shared<const FftPlan>(conv);
    // C(a) x = b ⊛ x with b_m = a_{-m mod len}.
    std::vector<Complex> b(conv, Complex{});
    for (std::size_t m = 0; m < len; ++m) b[m] = first_row[(len - m) % len];
    plan->forward(b);
    return Circulant{len, std::move(first_row), std::move(b), std::move(plan), std::move(rows),
                     complex_output, scale, out_dim, {}};
  }

  std::vector<double> signed_input(std::span<const double> x) const {
    std::vector<double> v(x.begin(), x.end());
    if (!signs_.empty())
      for (std::size_t j = 0; j < v.size(); ++j) v[j] *= signs_[j];
    return v;
  }

  std::vector<double> apply_impl(const Dense& r, std::span<const double> x) const { return multiply(r.phi, x); }

  std::vector<double> apply_impl(const Fourier& r, std::span<const double> x) const {
    std::vector<Complex> z(r.padded, Complex{});
    for (std::size_t j = 0; j < x.size(); ++j) z[j] = signs_.empty() ? x[j] : x[j] * signs_[j];
    r.plan->forward(z);
    std::vector<double> y(r.rows.size());
    for (std::size_t t = 0; t < r.rows.size(); ++t) y[t] = r.scale * detail::real_fourier_coefficient(z, r.rows[t]);
    return y;
  }

  std::vector<double> apply_impl(const Hadamard& r, std::span<const double> x) const {
    std::vector<double> z = signed_input(x);
    fwht_in_place(z);
    std::vector<double> y(r.rows.size());
    for (std::size_t t = 0; t < r.rows.size(); ++t) y[t] = r.scale * z[r.rows[t]];
    return y;
  }

  std::vector<double> apply_impl(const Circulant& r, std::span<const double> x) const {
    const std::size_t conv = r.plan->size();
    std::vector<Complex> z(conv, Complex{});
    for (std::size_t j = 0; j < x.size(); ++j) z[j] = signs_.empty() ? x[j] : x[j] * signs_[j];
    r.plan->forward(z);
    for (std::size_t k = 0; k < conv; ++k) z[k] *= r.spectrum[k];
    r.plan->inverse(z);
    auto cyclic = [&](std::size_t j) {
      Complex v = z[j];
      if (conv != r.length && j + r.length < conv) v += z[j + r.length];
      return v;
    };
    std::vector<double> y(r.out_dim);
    if (r.complex_output) {
      for (std::size_t t = 0; t < r.rows.size(); ++t) {
        const Complex v = cyclic(r.rows[t]);
        if (2 * t < r.out_dim) y[2 * t] = r.scale * v.real();
        if (2 * t + 1 < r.out_dim) y[2 * t + 1] = r.scale * v.imag();
      }
    } else {
      for (std::size_t t = 0; t < r.rows.size(); ++t) y[t] = r.scale * cyclic(r.rows[t]).real();
    }
    return y;
  }

  Matrix densify_impl(const Dense& r) const { return r.phi; }

  Matrix densify_impl(const Fourier& r) const {
    Matrix out(r.rows.size(), spec_.N);
    for (std::size_t t = 0; t < r.rows.size(); ++t)
      for (std::size_t j = 0; j < spec_.N; ++j) out(t, j) = r.scale * detail::real_fourier_entry(r.padded, r.rows[t], j);
    return out;
  }

  Matrix densify_impl(const Hadamard& r) const {
    Matrix out(r.rows.size(), spec_.N);
    for (std::size_t t = 0; t < r.rows.size(); ++t)
      for (std::size_t j = 0; j < spec_.N; ++j)
        out(t, j) = r.scale * ((std::popcount(r.rows[t] & j) % 2) ? -1.0 : 1.0);
    return out;
  }

  Matrix densify_impl(const Circulant& r) const {
    Matrix out(r.out_dim, spec_.N);
    const std::size_t n_amb = spec_.N;
    auto entry = [&](std::size_t row, std::size_t col) -> Complex {
      if (!r.toeplitz.empty()) return r.toeplitz[col + n_amb - 1 - row];
      return r.first_row[(col + r.length - row) % r.length];
    };
    for (std::size_t t = 0; t < r.rows.size(); ++t) {
      for (std::size_t j = 0; j < n_amb; ++j) {
        const Complex v = r.scale * entry(r.rows[t], j);
        if (r.complex_output) {
          if (2 * t < r.out_dim) out(2 * t, j) = v.real();
          if (2 * t + 1 < r.out_dim) out(2 * t + 1, j) = v.imag();
        } else {
          out(t, j) = v.real();
        }
      }
    }
    return out;
  }

  EnsembleSpec spec_;
  std::variant<Dense, Fourier, Hadamard, Circulant> realization_;
  std::vector<double> signs_;
};

/// Realizes `spec`. Every family is normalized so that E‖Φx‖² = ‖x‖²
/// (unless params.unit_scale is set). Random draws happen in a fixed order:
/// sign flips, then row indices, then matrix entries or generator.
inline ProjectionOperator sample(const EnsembleSpec& spec) {
  validate(spec);
  const std::size_t n = spec.n;
  const std::size_t N = spec.N;
  const bool unit = spec.params.unit_scale;
  Rng rng = make_rng(spec.seed);

  ProjectionOperator op;
  op.spec_ = spec;

  auto pick_rows = [&](std::size_t population, std::size_t count) {
    if (spec.params.rows == RowSelection::prefix) {
      std::vector<std::size_t> r(count);
      std::iota(r.begin(), r.end(), 0);
      return r;
    }
    return sample_without_replacement(population, count, rng);
  };
  auto draw_signs = [&] {
    if (!spec.params.sign_randomization) return;
    op.signs_.resize(N);
    for (auto& s : op.signs_) s = (rng() >> 63) ? 1.0 : -1.0;
  };

  switch (spec.family) {
    case Family::gaussian:
    case Family::rademacher:
    case Family::uniform_subgaussian:
    case Family::student_t:
    case Family::laplace_log_concave: {
      detail::EntrySampler draw(spec.family, spec.params.nu);
      Matrix phi(n, N);
      const double scale = unit ? 1.0 : 1.0 / std::sqrt(static_cast<double>(n));
      for (auto& v : phi.entries()) v = scale * draw(rng);
      op.realization_ = ProjectionOperator::Dense{std::move(phi)};
      break;
    }
    case Family::identity: {
      Matrix phi(n, N);
      for (std::size_t i = 0; i < n; ++i) phi(i, i) = 1.0;
      op.realization_ = ProjectionOperator::Dense{std::move(phi)};
      break;
    }
    case Family::zero:
      op.realization_ = ProjectionOperator::Dense{Matrix(n, N)};
      break;
    case Family::partial_fourier: {
      draw_signs();
      const std::size_t padded = next_power_of_two(N);
      auto rows = pick_rows(padded, n);
      // Orthonormal rows carry 1/sqrt(P); sampling n of P rows needs sqrt(P/n).
      const double scale = 1.0 / std::sqrt(static_cast<double>(padded)) *
                           (unit ? 1.0 : std::sqrt(static_cast<double>(padded) / static_cast<double>(n)));
      op.realization_ =
          ProjectionOperator::Fourier{padded, std::move(rows), scale, std::make_shared<const FftPlan>(padded)};
      break;
    }
    case Family::partial_hadamard: {
      draw_signs();
      auto rows = pick_rows(N, n);
      const double scale = 1.0 / std::sqrt(static_cast<double>(N)) *
                           (unit ? 1.0 : std::sqrt(static_cast<double>(N) / static_cast<double>(n)));
      op.realization_ = ProjectionOperator::Hadamard{std::move(rows), scale};
      break;
    }
    case Family::partial_circulant: {
      draw_signs();
      const bool complex_output = !spec.params.real_generator;
      const std::size_t kept = complex_output ? (n + 1) / 2 : n;
      auto rows = pick_rows(N, kept);
      std::vector<Complex> a(N);
      std::normal_distribution<double> normal(0.0, 1.0);
      if (complex_output) {
        // Standard circular: E|a|² = 1, so Re and Im parts each carry 1/2.
        for (auto& v : a) {
          const double re = normal(rng);
          const double im = normal(rng);
          v = Complex(re, im) / std::numbers::sqrt2;
        }
      } else {
        for (auto& v : a) v = normal(rng);
      }
      // Each real output coordinate has variance ‖x‖²/2 (complex) or ‖x‖² (real).
      const double per_coordinate = complex_output ? 0.5 : 1.0;
      const double scale = unit ? 1.0 : 1.0 / std::sqrt(per_coordinate * static_cast<double>(n));
      op.realization_ = ProjectionOperator::make_circulant(std::move(a), std::move(rows), complex_output, scale, n);
      break;
    }
    case Family::partial_toeplitz: {
      auto rows = pick_rows(N, n);
      std::normal_distribution<double> normal(0.0, 1.0);
      std::vector<double> diagonals(2 * N - 1);  // t_{k-j} at index k - j + N - 1
      for (auto& v : diagonals) v = normal(rng);
      // Embed into a circulant of length 2^ceil(log2(2N)).
      const std::size_t len = next_power_of_two(2 * N);
      std::vector<Complex> first_row(len, Complex{});
      for (std::size_t m = 0; m < N; ++m) first_row[m] = diagonals[m + N - 1];
      for (std::size_t m = 1; m < N; ++m) first_row[len - m] = diagonals[N - 1 - m];
      const double scale = unit ? 1.0 : 1.0 / std::sqrt(static_cast<double>(n));
      auto circ = ProjectionOperator::make_circulant(std::move(first_row), std::move(rows), false, scale, n);
      circ.toeplitz = std::move(diagonals);
      op.realization_ = std::move(circ);
      break;
    }
  }
  return op;
}

/// Absolute floor on the smallest singular value of ΦU below which the image
/// no longer has the dimension of the input.
inline constexpr double kCollapseTolerance = 1e-10;

/// Span of Φ·basis(X), re-orthonormalized.
inline Subspace apply_to_subspace(const ProjectionOperator& op, const Subspace& x) {
  require(op.cols() == x.ambient_dim(), ErrorKind::dimension_mismatch,
          "operator on R^" + std::to_string(op.cols()) + " applied to a subspace of R^" +
              std::to_string(x.ambient_dim()));
  require(op.rows() >= x.dim(), ErrorKind::rank_collapse,
          "target dimension " + std::to_string(op.rows()) + " is below subspace dimension " +
              std::to_string(x.dim()));
  const Matrix image = op.apply(x.basis());
  const auto sv = singular_values(image);
  require(sv.back() >= kCollapseTolerance && numerical_rank(sv) == sv.size(), ErrorKind::rank_collapse,
          "smallest singular value of ΦU is " + std::to_string(sv.back()));
  return Subspace::from_basis(orthonormalize(image));
}

/// Empirical survival function of ‖P x‖² for unscaled rows x of an i.i.d.
/// family and a fixed random rank-d projection P.
struct TailCurve {
  std::size_t d = 0;
  std::size_t trials = 0;
  std::vector<double> thresholds;  // log-spaced, starting at d
  std::vector<double> survival;    // P̂(‖Px‖² > t) at each threshold
  std::vector<double> top_values;  // largest samples, descending (used by the fit)
  double fitted_exponent = std::numeric_limits<double>::quiet_NaN();
};

struct TailOptions {
  std::size_t grid_points = 48;
  double fit_fraction = 3e-3;  // share of the sample (largest values) used by the exponent fit
  std::size_t min_fit_points = 10;
};

/// Tail index η̂ from a log-log regression of the empirical survival
/// rank/trials against the order statistics in the extreme tail.
inline double fit_tail_exponent(std::span<const double> top_values, std::size_t trials) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < top_values.size(); ++i) {
    if (!(top_values[i] > 0.0)) break;
    lx.push_back(std::log(top_values[i]));
    ly.push_back(std::log(static_cast<double>(i + 1) / static_cast<double>(trials)));
  }
  if (lx.size() < 3) return std::numeric_limits<double>::quiet_NaN();
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return -sxy / sxx;
}

inline TailCurve tail_diagnostic(const EnsembleSpec& spec, std::size_t d, std::size_t trials,
                                 const TailOptions& options = {}) {
  require(has_iid_entries(spec.family), ErrorKind::bad_parameters,
          "tail diagnostic needs an i.i.d.-entry family, got " + std::string(to_string(spec.family)));
  require(d >= 1 && d <= spec.N, ErrorKind::bad_parameters, "need 1 <= d <= N");
  require(trials >= 1, ErrorKind::bad_parameters, "need at least one trial");
  if (spec.family == Family::student_t)
    require(spec.params.nu > 2.0, ErrorKind::bad_parameters, "student_t needs nu > 2");

  Rng frame_rng = make_rng(derive_seed(spec.seed, 0));
  const Matrix u = random_orthonormal_frame(spec.N, d, frame_rng);
  Rng rng = make_rng(derive_seed(spec.seed, 1));
  detail::EntrySampler draw(spec.family, spec.params.nu);

  std::vector<double> values(trials);
  std::vector<double> x(spec.N);
  std::vector<double> proj(d);
  for (std::size_t t = 0; t < trials; ++t) {
    for (auto& v : x) v = draw(rng);
    std::fill(proj.begin(), proj.end(), 0.0);
    for (std::size_t i = 0; i < spec.N; ++i) {
      const auto r = u.row(i);
      for (std::size_t k = 0; k < d; ++k) proj[k] += r[k] * x[i];
    }
    values[t] = dot(proj, proj);
  }
  std::sort(values.begin(), values.end(), std::greater<>());

  TailCurve curve;
  curve.d = d;
  curve.trials = trials;
  const double lo = static_cast<double>(d);
  const double hi = std::max(10.0 * lo, values.front());
  for (std::size_t g = 0; g < options.grid_points; ++g) {
    const double frac = options.grid_points > 1 ? static_cast<double>(g) / static_cast<double>(options.grid_points - 1) : 0.0;
    const double t = lo * std::pow(hi / lo, frac);
    // values are descending: count of entries > t.
    const auto above = std::partition_point(values.begin(), values.end(), [t](double v) { return v > t; });
    curve.thresholds.push_back(t);
    curve.survival.push_back(static_cast<double>(above - values.begin()) / static_cast<double>(trials));
  }
  const std::size_t k = std::min(trials, std::max(options.min_fit_points,
                                                  static_cast<std::size_t>(options.fit_fraction * static_cast<double>(trials))));
  curve.top_values.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k));
  curve.fitted_exponent = fit_tail_exponent(curve.top_values, trials);
  return curve;
}

}  // namespace srip
