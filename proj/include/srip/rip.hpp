#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "srip/ensembles.hpp"
#include "srip/error.hpp"
#include "srip/linalg.hpp"
#include "srip/random.hpp"
#include "srip/subspace.hpp"

namespace srip {

/// Upper end of the near-isometry defect for which the affinity bound applies.
inline constexpr double kHypothesisDelta = 0.25;

/// Empirical constants for |aff_Y² − aff_X²| <= C (d − aff_X²) δ, calibrated once
/// on the seeded sweeps pair_bound_sweep(PairBoundSweepConfig{}) (max ratio 1.67)
/// and line_bound_sweep(LineBoundSweepConfig{}) (max ratio 1.85), then frozen at 1.5x
/// the observed maximum. Later runs are regressions against them.
inline constexpr double kPairBoundConstant = 2.5;
inline constexpr double kLineBoundConstant = 3.0;
/// Ceiling for the calibrated constants themselves.
inline constexpr double kConstantSanityCeiling = 32.0;
/// No trial, hypothesis or not, may exceed this multiple of the constant.
inline constexpr double kRegressionFactor = 10.0;

/// Below this the affinity ratio is 0/0 and is replaced by an exact check.
inline constexpr double kDegenerateDenominator = 1e-12;
inline constexpr double kIsometryDelta = 1e-12;

struct NearIsometryReport {
  double s_min_sq = 0.0;
  double s_max_sq = 0.0;
  double delta = 0.0;  // max(s_max² − 1, 1 − s_min²)
  std::size_t subspace_dim = 0;
  bool hypothesis_holds = false;  // delta < 1/4
};

inline NearIsometryReport near_isometry_from_image(const Matrix& image, std::size_t dim) {
  const auto sv = singular_values(image);
  NearIsometryReport r;
  r.subspace_dim = dim;
  r.s_max_sq = sv.empty() ? 0.0 : sv.front() * sv.front();
  // Fewer rows than columns: the missing singular values are zero.
  r.s_min_sq = (sv.size() < dim || sv.empty()) ? 0.0 : sv.back() * sv.back();
  r.delta = std::max({r.s_max_sq - 1.0, 1.0 - r.s_min_sq, 0.0});
  r.hypothesis_holds = r.delta < kHypothesisDelta;
  return r;
}

/// Squared extreme singular values of ΦU for an orthonormal basis U of `x`.
inline NearIsometryReport measure_near_isometry(const ProjectionOperator& op, const Subspace& x) {
  require(op.cols() == x.ambient_dim(), ErrorKind::dimension_mismatch,
          "operator on R^" + std::to_string(op.cols()) + " measured on a subspace of R^" +
              std::to_string(x.ambient_dim()));
  return near_isometry_from_image(op.apply(x.basis()), x.dim());
}

enum class Degeneracy {
  none,
  nested,    // one subspace contains the other: ratio is 0/0
  isometry,  // δ = 0: the change itself must vanish
};

struct PairBoundRecord {
  std::size_t d_min = 0;
  std::size_t d_max = 0;
  double delta = 0.0;
  bool hypothesis_holds = false;
  double aff_x_sq = 0.0;
  double aff_y_sq = 0.0;
  double aff_change = 0.0;  // |aff_Y² − aff_X²|
  double dist_x_sq = 0.0;
  double dist_y_sq = 0.0;
  std::optional<double> bound_ratio;  // aff_change / ((d_min − aff_X²) δ)
  std::optional<double> dist_ratio;   // |D_Y² − D_X²| / (δ D_X²)
  Degeneracy degeneracy = Degeneracy::none;
  bool exact_preservation = true;  // only meaningful for degenerate records
};

namespace detail {

inline double half_dim_sum(std::size_t a, std::size_t b) { return 0.5 * static_cast<double>(a + b); }

}  // namespace detail

/// Affinity and distance change of a pair under Φ, normalized by the defect
/// δ of Φ on the sum of the two subspaces.
inline PairBoundRecord verify_pair_bound(const ProjectionOperator& op, const Subspace& x1, const Subspace& x2) {
  detail::require_same_ambient(x1, x2);
  require(op.cols() == x1.ambient_dim(), ErrorKind::dimension_mismatch, "operator and subspaces disagree on N");
  PairBoundRecord r;
  r.d_min = std::min(x1.dim(), x2.dim());
  r.d_max = std::max(x1.dim(), x2.dim());
  const NearIsometryReport iso = measure_near_isometry(op, sum(x1, x2));
  r.delta = iso.delta;
  r.hypothesis_holds = iso.hypothesis_holds;

  const Subspace y1 = apply_to_subspace(op, x1);
  const Subspace y2 = apply_to_subspace(op, x2);
  r.aff_x_sq = affinity_squared(x1, x2);
  r.aff_y_sq = affinity_squared(y1, y2);
  r.aff_change = std::abs(r.aff_y_sq - r.aff_x_sq);
  r.dist_x_sq = detail::half_dim_sum(x1.dim(), x2.dim()) - r.aff_x_sq;
  r.dist_y_sq = detail::half_dim_sum(y1.dim(), y2.dim()) - r.aff_y_sq;

  const double denominator = static_cast<double>(r.d_min) - r.aff_x_sq;
  if (denominator < kDegenerateDenominator) {
    r.degeneracy = Degeneracy::nested;
    r.exact_preservation = std::abs(r.aff_y_sq - static_cast<double>(r.d_min)) <= 1e-8;
  } else if (r.delta < kIsometryDelta) {
    r.degeneracy = Degeneracy::isometry;
    r.exact_preservation = r.aff_change <= 1e-9;
  } else {
    r.bound_ratio = r.aff_change / (denominator * r.delta);
    r.dist_ratio = std::abs(r.dist_y_sq - r.dist_x_sq) / (r.delta * r.dist_x_sq);
  }
  return r;
}

struct LineBoundRecord {
  double delta = 0.0;
  bool hypothesis_holds = false;
  double aff_x_sq = 0.0;  // aff²(X2, u)
  double aff_y_sq = 0.0;  // aff²(Y2, Φu)
  double lhs = 0.0;       // |aff_y_sq − aff_x_sq|
  std::optional<double> bound_ratio;  // lhs / ((1 − aff_x_sq) δ)
  Degeneracy degeneracy = Degeneracy::none;
  bool exact_preservation = true;
};

/// One-dimensional case: the line through `u` against the subspace X2.
inline LineBoundRecord verify_line_bound(const ProjectionOperator& op, const Subspace& x2, std::span<const double> u) {
  require(u.size() == x2.ambient_dim(), ErrorKind::dimension_mismatch, "vector and subspace disagree on N");
  require(op.cols() == x2.ambient_dim(), ErrorKind::dimension_mismatch, "operator and subspace disagree on N");
  const double unorm = norm2(u);
  require(unorm > 0.0, ErrorKind::bad_parameters, "u must be non-zero");
  std::vector<double> unit(u.begin(), u.end());
  for (auto& v : unit) v /= unorm;

  Matrix line(unit.size(), 1);
  line.set_column(0, unit);
  const Subspace x1 = Subspace::from_basis(std::move(line));

  LineBoundRecord r;
  const NearIsometryReport iso = measure_near_isometry(op, sum(x1, x2));
  r.delta = iso.delta;
  r.hypothesis_holds = iso.hypothesis_holds;

  const Subspace y2 = apply_to_subspace(op, x2);
  const std::vector<double> phi_u = op.apply(std::span<const double>(unit));
  const double phi_u_sq = dot(phi_u, phi_u);
  require(phi_u_sq > kCollapseTolerance * kCollapseTolerance, ErrorKind::rank_collapse, "Φu vanishes");
  r.aff_x_sq = x2.projected_energy(unit);
  r.aff_y_sq = y2.projected_energy(phi_u) / phi_u_sq;
  r.lhs = std::abs(r.aff_y_sq - r.aff_x_sq);

  const double denominator = 1.0 - r.aff_x_sq;
  if (denominator < kDegenerateDenominator) {
    r.degeneracy = Degeneracy::nested;
    r.exact_preservation = std::abs(r.aff_y_sq - 1.0) <= 1e-8;
  } else if (r.delta < kIsometryDelta) {
    r.degeneracy = Degeneracy::isometry;
    r.exact_preservation = r.lhs <= 1e-9;
  } else {
    r.bound_ratio = r.lhs / (denominator * r.delta);
  }
  return r;
}

struct PairDiscrepancy {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t d_i = 0;
  std::size_t d_j = 0;
  double aff_x_sq = 0.0;
  double aff_y_sq = 0.0;
  double numerator = 0.0;    // |aff_Y² − aff_X²|
  double denominator = 0.0;  // max(d_i, d_j) − aff_X²
  double ratio = 0.0;
  double min_normalized_ratio = 0.0;  // same change over min(d_i, d_j) − aff_X²
  double dist_ratio = 0.0;            // |D_Y² − D_X²| / D_X²
};

struct DiscrepancyReport {
  std::vector<PairDiscrepancy> pairwise;
  std::vector<std::pair<std::size_t, std::size_t>> excluded;  // identical subspaces
  double delta_max = 0.0;                // Δ: max ratio
  double delta_min_normalized = 0.0;     // max min_normalized_ratio
  double distance_discrepancy = 0.0;     // max dist_ratio
  bool distance_bound_holds = true;      // distance_discrepancy <= Δ + 1e-9
};

/// Maximum discrepancy over all pairs of a collection of projected subspaces.
///
/// The distance-based quantity is bounded by Δ only when all dimensions are
/// equal; with unequal dimensions D_X² < max(d_i, d_j) − aff_X² and the
/// distance ratio can exceed Δ. distance_bound_holds records which case
/// occurred.
inline DiscrepancyReport discrepancy(const ProjectionOperator& op, const std::vector<Subspace>& subspaces) {
  require(subspaces.size() >= 2, ErrorKind::bad_parameters, "discrepancy needs at least two subspaces");
  for (const auto& s : subspaces)
    require(s.ambient_dim() == op.cols(), ErrorKind::dimension_mismatch, "subspace and operator disagree on N");

  std::vector<Subspace> images;
  images.reserve(subspaces.size());
  for (const auto& s : subspaces) images.push_back(apply_to_subspace(op, s));

  DiscrepancyReport report;
  for (std::size_t i = 0; i < subspaces.size(); ++i) {
    for (std::size_t j = i + 1; j < subspaces.size(); ++j) {
      PairDiscrepancy p;
      p.i = i;
      p.j = j;
      p.d_i = subspaces[i].dim();
      p.d_j = subspaces[j].dim();
      p.aff_x_sq = affinity_squared(subspaces[i], subspaces[j]);
      p.aff_y_sq = affinity_squared(images[i], images[j]);
      p.numerator = std::abs(p.aff_y_sq - p.aff_x_sq);
      p.denominator = static_cast<double>(std::max(p.d_i, p.d_j)) - p.aff_x_sq;
      if (p.denominator < kDegenerateDenominator) {
        report.excluded.emplace_back(i, j);
        continue;
      }
      p.ratio = p.numerator / p.denominator;
      const double min_den = static_cast<double>(std::min(p.d_i, p.d_j)) - p.aff_x_sq;
      p.min_normalized_ratio = min_den < kDegenerateDenominator ? 0.0 : p.numerator / min_den;
      const double dx = detail::half_dim_sum(p.d_i, p.d_j) - p.aff_x_sq;
      const double dy = detail::half_dim_sum(images[i].dim(), images[j].dim()) - p.aff_y_sq;
      p.dist_ratio = std::abs(dy - dx) / dx;
      report.delta_max = std::max(report.delta_max, p.ratio);
      report.delta_min_normalized = std::max(report.delta_min_normalized, p.min_normalized_ratio);
      report.distance_discrepancy = std::max(report.distance_discrepancy, p.dist_ratio);
      report.pairwise.push_back(p);
    }
  }
  report.distance_bound_holds = report.distance_discrepancy <= report.delta_max + 1e-9;
  return report;
}

struct JlTailCurve {
  std::vector<double> eps;
  std::vector<double> exceedance;  // P̂(|‖Φx‖² − 1| > ε)
  std::size_t trials = 0;
};

/// Monte-Carlo exceedance of the norm distortion of a fixed unit vector.
/// Trial t realizes the ensemble with seed derive_seed(spec.seed, t).
inline JlTailCurve jl_tail_estimate(const EnsembleSpec& spec, std::span<const double> x, std::vector<double> eps_grid,
                                    std::size_t trials, unsigned threads = 1) {
  validate(spec);
  require(trials >= 100, ErrorKind::bad_parameters, "jl_tail_estimate needs at least 100 trials");
  require(x.size() == spec.N, ErrorKind::dimension_mismatch, "vector length differs from N");
  require(std::abs(norm2(x) - 1.0) <= 1e-9, ErrorKind::bad_parameters, "x must be a unit vector");
  require(!eps_grid.empty(), ErrorKind::bad_parameters, "empty epsilon grid");

  std::vector<double> distortion(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    EnsembleSpec s = spec;
    s.seed = derive_seed(spec.seed, t);
    const auto y = sample(s).apply(x);
    distortion[t] = std::abs(dot(y, y) - 1.0);
  });

  JlTailCurve curve;
  curve.trials = trials;
  curve.eps = std::move(eps_grid);
  for (double e : curve.eps) {
    const auto hits = std::count_if(distortion.begin(), distortion.end(), [e](double v) { return v > e; });
    curve.exceedance.push_back(static_cast<double>(hits) / static_cast<double>(trials));
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Seeded sweeps used for calibration, the acceptance suite and the CLI.

struct PairBoundSweepConfig {
  std::size_t trials = 1000;
  std::size_t ambient = 256;
  std::size_t max_d2 = 4;
  std::size_t n_per_d2 = 32;  // n = n_per_d2 * d2
  Family family = Family::gaussian;
  std::uint64_t seed = 0x5eed2019;
  unsigned threads = 1;
};

struct PairBoundSweepRow {
  std::size_t trial = 0;
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::size_t n = 0;
  PairBoundRecord record;
};

/// Random pairs with principal cosines drawn uniformly from [0, 1]:
/// d1 uniform in [1, max_d2], d2 uniform in [d1, max_d2].
inline std::vector<PairBoundSweepRow> pair_bound_sweep(const PairBoundSweepConfig& cfg) {
  require(2 * cfg.max_d2 <= cfg.ambient, ErrorKind::bad_parameters, "ambient dimension too small for the sweep");
  std::vector<PairBoundSweepRow> rows(cfg.trials);
  parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
    Rng rng = make_rng(derive_seed(cfg.seed, 3 * t));
    std::uniform_int_distribution<std::size_t> pick_d1(1, cfg.max_d2);
    const std::size_t d1 = pick_d1(rng);
    std::uniform_int_distribution<std::size_t> pick_d2(d1, cfg.max_d2);
    const std::size_t d2 = pick_d2(rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> lambdas(d1);
    for (auto& l : lambdas) l = unit(rng);
    const auto [x1, x2] = random_pair_with_angles(cfg.ambient, lambdas, d2 - d1, derive_seed(cfg.seed, 3 * t + 1));

    EnsembleSpec spec;
    spec.family = cfg.family;
    spec.N = cfg.ambient;
    spec.n = std::min(cfg.ambient, cfg.n_per_d2 * d2);
    spec.seed = derive_seed(cfg.seed, 3 * t + 2);
    rows[t] = {t, d1, d2, spec.n, verify_pair_bound(sample(spec), x1, x2)};
  });
  return rows;
}

struct LineBoundSweepConfig {
  std::size_t trials = 10000;
  std::size_t ambient = 256;
  std::size_t d2 = 4;
  std::size_t n = 64;
  Family family = Family::gaussian;
  std::uint64_t seed = 0x5eed0006;
  unsigned threads = 1;
};

/// Random unit u with aff(X2, u) = λ, λ uniform in [0, 1], against a random X2.
inline std::vector<LineBoundRecord> line_bound_sweep(const LineBoundSweepConfig& cfg) {
  require(cfg.d2 + 1 <= cfg.ambient, ErrorKind::bad_parameters, "ambient dimension too small for the sweep");
  std::vector<LineBoundRecord> rows(cfg.trials);
  parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
    Rng rng = make_rng(derive_seed(cfg.seed, 3 * t));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double lambda = unit(rng);
    const auto [line, x2] = random_pair_with_angles(cfg.ambient, {lambda}, cfg.d2 - 1, derive_seed(cfg.seed, 3 * t + 1));
    EnsembleSpec spec;
    spec.family = cfg.family;
    spec.N = cfg.ambient;
    spec.n = cfg.n;
    spec.seed = derive_seed(cfg.seed, 3 * t + 2);
    const auto u = line.basis().column(0);
    rows[t] = verify_line_bound(sample(spec), x2, u);
  });
  return rows;
}

/// Median Δ over `trials` independent realizations against one fixed collection.
inline double median_discrepancy(EnsembleSpec spec, const std::vector<Subspace>& collection, std::size_t trials,
                                 unsigned threads = 1) {
  require(trials >= 1, ErrorKind::bad_parameters, "need at least one trial");
  std::vector<double> deltas(trials);
  const std::uint64_t base = spec.seed;
  parallel_for(trials, threads, [&](std::size_t t) {
    EnsembleSpec s = spec;
    s.seed = derive_seed(base, t);
    deltas[t] = discrepancy(sample(s), collection).delta_max;
  });
  std::sort(deltas.begin(), deltas.end());
  return trials % 2 ? deltas[trials / 2] : 0.5 * (deltas[trials / 2 - 1] + deltas[trials / 2]);
}

}  // namespace srip
