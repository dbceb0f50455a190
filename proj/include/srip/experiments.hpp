#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "srip/ensembles.hpp"
#include "srip/error.hpp"
#include "srip/linalg.hpp"
#include "srip/matrix.hpp"
#include "srip/random.hpp"
#include "srip/subspace.hpp"

namespace srip {

// ---------------------------------------------------------------------------
// Union-of-subspaces data

struct UoSDataset {
  Matrix points;                    // N x M, one data point per column
  std::vector<std::size_t> labels;  // subspace index of each column, 0-based
  std::vector<Subspace> subspaces;
  double noise_sigma = 0.0;
};

/// Unit-norm points drawn uniformly from the unit sphere of each subspace,
/// perturbed by isotropic ambient noise and renormalized.
inline UoSDataset sample_uos(std::vector<Subspace> subspaces, const std::vector<std::size_t>& points_per,
                             double noise_sigma, std::uint64_t seed) {
  require(subspaces.size() >= 2, ErrorKind::bad_parameters, "need at least two subspaces");
  require(points_per.size() == subspaces.size(), ErrorKind::bad_parameters, "one point count per subspace");
  require(noise_sigma >= 0.0, ErrorKind::bad_parameters, "noise_sigma must be non-negative");
  const std::size_t n_amb = subspaces.front().ambient_dim();
  for (const auto& s : subspaces)
    require(s.ambient_dim() == n_amb, ErrorKind::dimension_mismatch, "subspaces differ in ambient dimension");
  const std::size_t total = std::accumulate(points_per.begin(), points_per.end(), std::size_t{0});
  require(total >= 1, ErrorKind::bad_parameters, "dataset would be empty");

  Rng rng = make_rng(seed);
  UoSDataset ds;
  ds.points = Matrix(n_amb, total);
  ds.labels.reserve(total);
  ds.noise_sigma = noise_sigma;
  std::size_t col = 0;
  for (std::size_t l = 0; l < subspaces.size(); ++l) {
    const Matrix& u = subspaces[l].basis();
    for (std::size_t p = 0; p < points_per[l]; ++p, ++col) {
      std::vector<double> g;
      double gn = 0.0;
      do {
        g = normal_vector(u.cols(), rng);
        gn = norm2(g);
      } while (gn == 0.0);
      for (auto& v : g) v /= gn;
      std::vector<double> x = multiply(u, std::span<const double>(g));
      if (noise_sigma > 0.0) {
        const auto e = normal_vector(n_amb, rng);
        for (std::size_t i = 0; i < n_amb; ++i) x[i] += noise_sigma * e[i];
      }
      const double xn = norm2(x);
      for (auto& v : x) v /= xn;
      ds.points.set_column(col, x);
      ds.labels.push_back(l);
    }
  }
  ds.subspaces = std::move(subspaces);
  return ds;
}

inline UoSDataset synth_uos(std::size_t n_amb, std::size_t clusters, const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& points_per, double noise_sigma, std::uint64_t seed) {
  require(clusters >= 2, ErrorKind::bad_parameters, "need L >= 2");
  require(dims.size() == clusters && points_per.size() == clusters, ErrorKind::bad_parameters,
          "dims and points_per need one entry per subspace");
  Rng rng = make_rng(derive_seed(seed, 0));
  std::vector<Subspace> subspaces;
  for (std::size_t d : dims) {
    require(d >= 1 && d <= n_amb, ErrorKind::bad_parameters, "subspace dimension must satisfy 1 <= d <= N");
    subspaces.push_back(random_subspace(n_amb, d, rng));
  }
  return sample_uos(std::move(subspaces), points_per, noise_sigma, derive_seed(seed, 1));
}

/// Scales every non-zero column to unit norm.
inline Matrix normalize_columns(Matrix points) {
  for (std::size_t j = 0; j < points.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < points.rows(); ++i) s += points(i, j) * points(i, j);
    if (s == 0.0) continue;
    const double inv = 1.0 / std::sqrt(s);
    for (std::size_t i = 0; i < points.rows(); ++i) points(i, j) *= inv;
  }
  return points;
}

/// Φ applied to every data point, columns renormalized.
inline Matrix project_points(const ProjectionOperator& op, const Matrix& points) {
  return normalize_columns(op.apply(points));
}

// ---------------------------------------------------------------------------
// Clustering

struct ClusteringResult {
  std::vector<std::size_t> assignments;
  std::optional<double> error_rate;  // set when ground-truth labels were supplied
};

inline constexpr std::size_t kMaxClustersForMatching = 8;

/// Fraction of points misassigned under the best matching of cluster ids to
/// labels (brute force over all L! matchings).
inline double clustering_error(std::span<const std::size_t> assignments, std::span<const std::size_t> labels,
                               std::size_t clusters) {
  require(assignments.size() == labels.size(), ErrorKind::dimension_mismatch, "assignment and label counts differ");
  require(clusters >= 1 && clusters <= kMaxClustersForMatching, ErrorKind::bad_parameters,
          "permutation matching supports 1 <= L <= 8");
  if (assignments.empty()) return 0.0;
  std::vector<std::size_t> confusion(clusters * clusters, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(assignments[i] < clusters && labels[i] < clusters, ErrorKind::bad_parameters, "cluster id out of range");
    ++confusion[assignments[i] * clusters + labels[i]];
  }
  std::vector<std::size_t> perm(clusters);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t c = 0; c < clusters; ++c) hits += confusion[c * clusters + perm[c]];
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return 1.0 - static_cast<double>(best) / static_cast<double>(labels.size());
}

struct KMeansOptions {
  std::size_t restarts = 50;
  std::size_t max_iterations = 300;
  std::uint64_t seed = 0x75c0;
};

/// Lloyd's algorithm with k-means++ seeding; the restart with the lowest
/// inertia wins (earliest restart on ties). Rows of `x` are the points.
inline std::vector<std::size_t> kmeans(const Matrix& x, std::size_t k, const KMeansOptions& opt = {}) {
  const std::size_t m = x.rows();
  const std::size_t dim = x.cols();
  require(k >= 1 && k <= m, ErrorKind::bad_parameters, "need 1 <= k <= number of points");
  auto sq_dist = [&](std::size_t i, std::span<const double> c) {
    double s = 0.0;
    const auto r = x.row(i);
    for (std::size_t t = 0; t < dim; ++t) s += (r[t] - c[t]) * (r[t] - c[t]);
    return s;
  };

  Rng rng = make_rng(opt.seed);
  std::vector<std::size_t> best_assign(m, 0);
  double best_inertia = std::numeric_limits<double>::infinity();
  for (std::size_t restart = 0; restart < opt.restarts; ++restart) {
    Matrix centers(k, dim);
    std::uniform_int_distribution<std::size_t> first(0, m - 1);
    const std::size_t c0 = first(rng);
    std::copy(x.row(c0).begin(), x.row(c0).end(), centers.row(0).begin());
    std::vector<double> d2(m);
    for (std::size_t i = 0; i < m; ++i) d2[i] = sq_dist(i, centers.row(0));
    for (std::size_t c = 1; c < k; ++c) {
      const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
      std::size_t pick = 0;
      if (total > 0.0) {
        std::uniform_real_distribution<double> u(0.0, total);
        double target = u(rng);
        for (pick = 0; pick + 1 < m; ++pick) {
          target -= d2[pick];
          if (target <= 0.0) break;
        }
      } else {
        pick = first(rng);
      }
      std::copy(x.row(pick).begin(), x.row(pick).end(), centers.row(c).begin());
      for (std::size_t i = 0; i < m; ++i) d2[i] = std::min(d2[i], sq_dist(i, centers.row(c)));
    }

    std::vector<std::size_t> assign(m, k);
    double inertia = 0.0;
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
      bool changed = false;
      inertia = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        std::size_t arg = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
          const double dd = sq_dist(i, centers.row(c));
          if (dd < best) {
            best = dd;
            arg = c;
          }
        }
        inertia += best;
        if (assign[i] != arg) {
          assign[i] = arg;
          changed = true;
        }
      }
      if (!changed) break;
      Matrix sums(k, dim);
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < m; ++i) {
        ++counts[assign[i]];
        auto s = sums.row(assign[i]);
        const auto r = x.row(i);
        for (std::size_t t = 0; t < dim; ++t) s[t] += r[t];
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;  // empty cluster keeps its center
        auto dst = centers.row(c);
        const auto s = sums.row(c);
        for (std::size_t t = 0; t < dim; ++t) dst[t] = s[t] / static_cast<double>(counts[c]);
      }
    }
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_assign = assign;
    }
  }
  return best_assign;
}

struct TscOptions {
  KMeansOptions kmeans;
};

inline std::size_t default_neighbor_count(std::size_t d) { return std::max<std::size_t>(3, d + 1); }

namespace detail {

/// Component index per vertex, numbered by first appearance.
inline std::vector<std::size_t> connected_components(const Matrix& w) {
  const std::size_t m = w.rows();
  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp(m, unset), stack;
  std::size_t next = 0;
  for (std::size_t s = 0; s < m; ++s) {
    if (comp[s] != unset) continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < m; ++j)
        if (w(i, j) > 0.0 && comp[j] == unset) {
          comp[j] = next;
          stack.push_back(j);
        }
    }
    ++next;
  }
  return comp;
}

inline std::vector<std::size_t> merge_components(const Matrix& gram, std::vector<std::size_t> comp, std::size_t count,
                                                 std::size_t target) {
  const std::size_t m = comp.size();
  Matrix link(count, count);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (comp[i] != comp[j]) link(comp[i], comp[j]) = std::max(link(comp[i], comp[j]), gram(i, j));
  std::vector<std::size_t> parent(count);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<bool> alive(count, true);
  for (std::size_t left = count; left > target; --left) {
    std::size_t ba = 0, bb = 0;
    double best = -1.0;
    for (std::size_t a = 0; a < count; ++a)
      for (std::size_t b = a + 1; b < count; ++b)
        if (alive[a] && alive[b] && link(a, b) > best) {
          best = link(a, b);
          ba = a;
          bb = b;
        }
    alive[bb] = false;
    for (std::size_t c = 0; c < count; ++c) {
      link(ba, c) = link(c, ba) = std::max(link(ba, c), link(bb, c));
      if (parent[c] == bb) parent[c] = ba;
    }
  }
  std::vector<std::size_t> relabel(count, count), out(m);
  std::size_t next = 0;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t& r = relabel[parent[comp[i]]];
    if (r == count) r = next++;
    out[i] = r;
  }
  return out;
}

}  // namespace detail

/// Threshold-based subspace clustering.
///
/// Each point keeps its q neighbours of largest absolute inner product
/// (ties to the lower index); the adjacency W = Z + Zᵀ carries the raw |cos|
/// values. Clusters come from k-means on the row-normalized eigenvectors of
/// the L smallest eigenvalues of I − D^{-1/2} W D^{-1/2}. When the graph
/// splits into more than L components, those are merged by single linkage.
inline ClusteringResult tsc(const Matrix& points, std::size_t clusters, std::size_t q,
                            std::span<const std::size_t> labels = {}, const TscOptions& opt = {}) {
  const std::size_t m = points.cols();
  require(clusters >= 1 && clusters <= m, ErrorKind::bad_parameters, "need 1 <= L <= number of points");
  require(q >= 1 && q < m, ErrorKind::bad_parameters, "need 1 <= q < number of points");
  require(labels.empty() || labels.size() == m, ErrorKind::dimension_mismatch, "one label per point");
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < points.rows(); ++i) s += points(i, j) * points(i, j);
    require(std::abs(std::sqrt(s) - 1.0) <= 1e-8, ErrorKind::bad_parameters,
            "tsc expects unit-norm columns (column " + std::to_string(j) + ")");
  }

  ClusteringResult result;
  Matrix gram = transpose_times(points, points);
  for (auto& v : gram.entries()) v = std::abs(v);

  bool degenerate = true;
  for (std::size_t i = 0; i < m && degenerate; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (gram(i, j) < 1.0 - 1e-12) {
        degenerate = false;
        break;
      }
  if (degenerate) {
    // All points on one line: a single effective cluster.
    result.assignments.assign(m, 0);
  } else {
    Matrix w(m, m);
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) {
      std::iota(order.begin(), order.end(), 0);
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(q + 1), order.end(),
                        [&](std::size_t a, std::size_t b) {
                          if (a == i) return false;
                          if (b == i) return true;
                          if (gram(i, a) != gram(i, b)) return gram(i, a) > gram(i, b);
                          return a < b;
                        });
      for (std::size_t t = 0; t < q; ++t) {
        const std::size_t j = order[t];
        w(i, j) += gram(i, j);
        w(j, i) += gram(i, j);
      }
    }
    std::vector<std::size_t> comp = detail::connected_components(w);
    const std::size_t n_comp = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
    if (n_comp > clusters) {
      // Too many components for a meaningful embedding: merge by single linkage on |cos|.
      result.assignments = detail::merge_components(gram, std::move(comp), n_comp, clusters);
      if (!labels.empty()) result.error_rate = clustering_error(result.assignments, labels, clusters);
      return result;
    }
    std::vector<double> inv_sqrt_deg(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const auto r = w.row(i);
      const double deg = std::accumulate(r.begin(), r.end(), 0.0);
      inv_sqrt_deg[i] = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
    }
    Matrix lap(m, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        lap(i, j) = (i == j ? 1.0 : 0.0) - inv_sqrt_deg[i] * w(i, j) * inv_sqrt_deg[j];
    const SymmetricEigenResult eig = symmetric_eigen(lap);
    Matrix embedding(m, clusters);
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < clusters; ++c) {
        embedding(i, c) = eig.eigenvectors(i, c);
        s += embedding(i, c) * embedding(i, c);
      }
      if (s > 0.0)
        for (std::size_t c = 0; c < clusters; ++c) embedding(i, c) /= std::sqrt(s);
    }
    result.assignments = kmeans(embedding, clusters, opt.kmeans);
  }
  if (!labels.empty()) result.error_rate = clustering_error(result.assignments, labels, clusters);
  return result;
}

// ---------------------------------------------------------------------------
// Detection

/// Index of the projected subspace capturing the most energy of y; the
/// smallest index wins ties.
inline std::size_t ml_detect(const std::vector<Subspace>& projected, std::span<const double> y) {
  require(!projected.empty(), ErrorKind::bad_parameters, "no candidate subspaces");
  std::size_t best = 0;
  double best_energy = -1.0;
  for (std::size_t i = 0; i < projected.size(); ++i) {
    require(projected[i].ambient_dim() == y.size(), ErrorKind::dimension_mismatch,
            "observation length differs from the projected dimension");
    const double e = projected[i].projected_energy(y);
    if (e > best_energy) {
      best_energy = e;
      best = i;
    }
  }
  return best;
}

inline std::size_t ml_detect(const ProjectionOperator& op, const std::vector<Subspace>& subspaces,
                             std::span<const double> y) {
  require(y.size() == op.rows(), ErrorKind::dimension_mismatch, "observation length differs from n");
  std::vector<Subspace> projected;
  projected.reserve(subspaces.size());
  for (const auto& s : subspaces) projected.push_back(apply_to_subspace(op, s));
  return ml_detect(projected, y);
}

struct DetectionSummary {
  std::size_t draws = 0;
  std::size_t correct = 0;
  double accuracy() const { return draws ? static_cast<double>(correct) / static_cast<double>(draws) : 0.0; }
};

/// Noiseless draws x = U_k g from a uniformly chosen subspace k, observed as Φx.
inline DetectionSummary detection_trial(const ProjectionOperator& op, const std::vector<Subspace>& subspaces,
                                        std::size_t draws, std::uint64_t seed) {
  std::vector<Subspace> projected;
  for (const auto& s : subspaces) projected.push_back(apply_to_subspace(op, s));
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, subspaces.size() - 1);
  DetectionSummary out;
  out.draws = draws;
  for (std::size_t t = 0; t < draws; ++t) {
    const std::size_t k = pick(rng);
    const auto g = normal_vector(subspaces[k].dim(), rng);
    const auto x = multiply(subspaces[k].basis(), std::span<const double>(g));
    const auto y = op.apply(x);
    if (ml_detect(projected, y) == k) ++out.correct;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Timing

struct BenchRow {
  Family family = Family::gaussian;
  std::size_t n = 0;
  std::size_t N = 0;
  double mean_us = 0.0;    // per projected vector, averaged over repeats
  double median_us = 0.0;  // per projected vector, median over repeats
};

inline constexpr std::size_t kBenchWarmup = 3;

/// Wall time per projected vector for each spec. Single-threaded; the first
/// kBenchWarmup repeats are discarded.
inline std::vector<BenchRow> bench_projection(const std::vector<EnsembleSpec>& specs, std::size_t vectors,
                                              std::size_t repeats) {
  require(!specs.empty(), ErrorKind::bad_parameters, "no ensembles to benchmark");
  require(vectors >= 1 && repeats >= 1, ErrorKind::bad_parameters, "need at least one vector and one repeat");
  const std::size_t n_amb = specs.front().N;
  for (const auto& s : specs) require(s.N == n_amb, ErrorKind::bad_parameters, "benchmarked specs must share N");

  Rng rng = make_rng(0xbe7c);
  std::vector<std::vector<double>> inputs(vectors);
  for (auto& v : inputs) v = normal_vector(n_amb, rng);

  std::vector<BenchRow> rows;
  volatile double sink = 0.0;
  for (const auto& spec : specs) {
    const ProjectionOperator op = sample(spec);
    std::vector<double> per_vector;
    for (std::size_t r = 0; r < kBenchWarmup + repeats; ++r) {
      const auto start = std::chrono::steady_clock::now();
      double acc = 0.0;
      for (const auto& x : inputs) acc += op.apply(x).front();
      const auto stop = std::chrono::steady_clock::now();
      sink = sink + acc;
      if (r >= kBenchWarmup)
        per_vector.push_back(std::chrono::duration<double, std::micro>(stop - start).count() /
                             static_cast<double>(vectors));
    }
    std::sort(per_vector.begin(), per_vector.end());
    BenchRow row;
    row.family = spec.family;
    row.n = spec.n;
    row.N = spec.N;
    row.mean_us = std::accumulate(per_vector.begin(), per_vector.end(), 0.0) / static_cast<double>(per_vector.size());
    const std::size_t h = per_vector.size() / 2;
    row.median_us = per_vector.size() % 2 ? per_vector[h] : 0.5 * (per_vector[h - 1] + per_vector[h]);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace srip
