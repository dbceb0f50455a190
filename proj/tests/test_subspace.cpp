#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "helpers.hpp"

using namespace srip;
using testing_util::coordinate_subspace;

namespace {

constexpr AffinityMethod kMethods[] = {AffinityMethod::trace, AffinityMethod::frobenius_cross_gram,
                                       AffinityMethod::projected_basis};

Subspace line(std::vector<double> v) {
  Matrix u(v.size(), 1);
  u.set_column(0, v);
  return Subspace::span_of(u);
}

std::pair<Subspace, Subspace> random_pair(std::size_t n, std::size_t d1, std::size_t d2, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return {random_subspace(n, d1, rng), random_subspace(n, d2, rng)};
}

}  // namespace

TEST(Subspace, FromBasisValidates) {
  EXPECT_NO_THROW(Subspace::from_basis(Matrix::identity(3)));
  EXPECT_THROW(Subspace::from_basis(Matrix(3, 1, 1.0)), Error);
  EXPECT_THROW(Subspace::from_basis(Matrix::identity(3).transposed() * Matrix(3, 4, 0.0)), Error);
  const Subspace s = Subspace::span_of(Matrix(3, 1, std::vector<double>{0, 3, 4}));
  EXPECT_EQ(s.dim(), 1u);
  EXPECT_NEAR(s.basis()(2, 0), 0.8, 1e-15);
}

TEST(Affinity, SelfAffinityIsSqrtDim) {
  const Subspace x = coordinate_subspace(5, {0, 2, 4});
  for (auto m : kMethods) EXPECT_NEAR(affinity(x, x, m), std::sqrt(3.0), 1e-12);
}

TEST(Affinity, OrthogonalLines) {
  const Subspace a = coordinate_subspace(3, {0});
  const Subspace b = coordinate_subspace(3, {1});
  for (auto m : kMethods) EXPECT_NEAR(affinity(a, b, m), 0.0, 1e-15);
}

TEST(Affinity, LinesAtSixtyDegrees) {
  const double c = std::cos(std::numbers::pi / 3), s = std::sin(std::numbers::pi / 3);
  const Subspace a = line({1, 0, 0});
  const Subspace b = line({c, s, 0});
  for (auto m : kMethods) EXPECT_NEAR(affinity(a, b, m), 0.5, 1e-12);
}

TEST(Affinity, DimensionMismatch) {
  try {
    affinity(coordinate_subspace(3, {0}), coordinate_subspace(4, {0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dimension_mismatch);
  }
  EXPECT_THROW(distance(coordinate_subspace(3, {0}), coordinate_subspace(4, {0})), Error);
  EXPECT_THROW(principal_decomposition(coordinate_subspace(3, {0}), coordinate_subspace(4, {0})), Error);
  EXPECT_THROW(sum(coordinate_subspace(3, {0}), coordinate_subspace(4, {0})), Error);
}

TEST(Distance, Examples) {
  const Subspace x = coordinate_subspace(4, {1, 3});
  EXPECT_NEAR(distance(x, x), 0.0, 1e-15);
  EXPECT_NEAR(distance(coordinate_subspace(2, {0}), coordinate_subspace(2, {1})), 1.0, 1e-15);
  const double c = std::cos(std::numbers::pi / 3), s = std::sin(std::numbers::pi / 3);
  EXPECT_NEAR(distance(line({1, 0, 0}), line({c, s, 0})), std::sqrt(0.75), 1e-12);
}

TEST(Principal, IdenticalAndOrthogonal) {
  const Subspace x = coordinate_subspace(5, {0, 3});
  const auto same = principal_decomposition(x, x);
  ASSERT_EQ(same.lambdas.size(), 2u);
  EXPECT_NEAR(same.lambdas[0], 1.0, 1e-12);
  EXPECT_NEAR(same.lambdas[1], 1.0, 1e-12);
  const auto orth = principal_decomposition(coordinate_subspace(4, {0, 1}), coordinate_subspace(4, {2, 3}));
  EXPECT_EQ(orth.lambdas, (std::vector<double>{0.0, 0.0}));
}

TEST(Principal, RandomPairAgainstDenseOracle) {
  const auto [x1, x2] = random_pair(32, 4, 4, 11);
  const auto pd = principal_decomposition(x1, x2);
  const Matrix g = transpose_times(x1.basis(), x2.basis());
  Eigen::MatrixXd eg(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) eg(i, j) = g(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  Eigen::JacobiSVD<Eigen::MatrixXd> ref(eg);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(pd.lambdas[i], ref.singularValues()(static_cast<int>(i)), 1e-9);
}

TEST(Principal, InvariantsOnUnequalDimensions) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [x1, x2] = random_pair(24, 3, 6, 100 + seed);
    const auto pd = principal_decomposition(x1, x2);
    ASSERT_EQ(pd.lambdas.size(), 3u);
    EXPECT_TRUE(std::is_sorted(pd.lambdas.rbegin(), pd.lambdas.rend()));
    for (double l : pd.lambdas) {
      EXPECT_GE(l, 0.0);
      EXPECT_LE(l, 1.0);
    }
    ASSERT_EQ(pd.basis1.cols(), 3u);
    ASSERT_EQ(pd.basis2.cols(), 6u);
    const Matrix cross = transpose_times(pd.basis1, pd.basis2);
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      sum_sq += pd.lambdas[i] * pd.lambdas[i];
      for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(cross(i, j), i == j ? pd.lambdas[i] : 0.0, 1e-8);
    }
    EXPECT_NEAR(sum_sq, affinity_squared(x1, x2), 1e-8);
    // Bases still span the inputs.
    EXPECT_NEAR(affinity_squared(Subspace::from_basis(pd.basis1), x1), 3.0, 1e-9);
    EXPECT_NEAR(affinity_squared(Subspace::from_basis(pd.basis2), x2), 6.0, 1e-9);
  }
}

TEST(Sum, Examples) {
  const Subspace x = coordinate_subspace(5, {1, 2});
  const Subspace xx = sum(x, x);
  EXPECT_EQ(xx.dim(), 2u);
  EXPECT_NEAR(affinity_squared(xx, x), 2.0, 1e-12);
  const Subspace e12 = sum(coordinate_subspace(3, {0}), coordinate_subspace(3, {1}));
  EXPECT_EQ(e12.dim(), 2u);
  EXPECT_NEAR(affinity_squared(e12, coordinate_subspace(3, {0, 1})), 2.0, 1e-12);
}

TEST(Sum, SharedPrincipalDirection) {
  const auto [x1, x2] = random_pair_with_angles(16, {1.0, 0.3}, 0, 5);
  const Subspace s = sum(x1, x2);
  const Matrix both = hconcat(x1.basis(), x2.basis());
  EXPECT_EQ(numerical_rank(singular_values(both)), 3u);
  EXPECT_EQ(s.dim(), 3u);
  for (const Subspace* part : {&x1, &x2})
    for (std::size_t j = 0; j < part->dim(); ++j) {
      const auto u = part->basis().column(j);
      const auto p = s.project(u);
      EXPECT_LE(testing_util::relative_error(p, u), 1e-9);
    }
}

TEST(Sum, Collection) {
  std::vector<Subspace> parts{coordinate_subspace(6, {0}), coordinate_subspace(6, {1, 2}), coordinate_subspace(6, {0, 2})};
  EXPECT_EQ(sum(parts).dim(), 3u);
  EXPECT_THROW(sum(std::vector<Subspace>{}), Error);
}

TEST(RandomPairWithAngles, Examples) {
  const auto [a, b] = random_pair_with_angles(8, {1.0, 1.0}, 0, 1);
  EXPECT_NEAR(affinity(a, b), std::sqrt(2.0), 1e-9);
  const auto [c, d] = random_pair_with_angles(8, {0.0}, 0, 2);
  EXPECT_NEAR(affinity(c, d), 0.0, 1e-9);
  const auto [e, f] = random_pair_with_angles(64, {0.1, 0.9, 0.5}, 0, 3);
  EXPECT_NEAR(affinity(e, f), std::sqrt(0.81 + 0.25 + 0.01), 1e-9);
  const auto pd = principal_decomposition(e, f);
  EXPECT_NEAR(pd.lambdas[0], 0.9, 1e-9);
  EXPECT_NEAR(pd.lambdas[1], 0.5, 1e-9);
  EXPECT_NEAR(pd.lambdas[2], 0.1, 1e-9);
}

TEST(RandomPairWithAngles, ExtraDimensions) {
  const auto [x1, x2] = random_pair_with_angles(20, {0.7, 0.2}, 3, 4);
  EXPECT_EQ(x1.dim(), 2u);
  EXPECT_EQ(x2.dim(), 5u);
  const auto pd = principal_decomposition(x1, x2);
  EXPECT_NEAR(pd.lambdas[0], 0.7, 1e-9);
  EXPECT_NEAR(pd.lambdas[1], 0.2, 1e-9);
}

TEST(RandomPairWithAngles, RejectsBadInput) {
  EXPECT_THROW(random_pair_with_angles(8, {1.2}, 0, 1), Error);
  EXPECT_THROW(random_pair_with_angles(8, {-0.1}, 0, 1), Error);
  EXPECT_THROW(random_pair_with_angles(5, {0.5, 0.5}, 2, 1), Error);
  EXPECT_THROW(random_pair_with_angles(5, {}, 0, 1), Error);
  EXPECT_NO_THROW(random_pair_with_angles(6, {0.5, 0.5}, 2, 1));
}

TEST(RandomPairWithAngles, DeterministicInSeed) {
  const auto [a1, b1] = random_pair_with_angles(10, {0.4}, 1, 9);
  const auto [a2, b2] = random_pair_with_angles(10, {0.4}, 1, 9);
  EXPECT_EQ(a1.basis(), a2.basis());
  EXPECT_EQ(b1.basis(), b2.basis());
}

TEST(SubspaceProperties, SymmetryIdentityAndBounds) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng = make_rng(seed);
    const std::size_t d1 = 1 + seed % 5, d2 = 1 + (seed / 5) % 5;
    const Subspace x1 = random_subspace(20, d1, rng);
    const Subspace x2 = random_subspace(20, d2, rng);
    EXPECT_NEAR(affinity(x1, x2), affinity(x2, x1), 1e-10);
    EXPECT_NEAR(distance(x1, x2), distance(x2, x1), 1e-10);
    const double a2 = affinity_squared(x1, x2);
    EXPECT_LE(std::abs(distance_squared(x1, x2) + a2 - 0.5 * static_cast<double>(d1 + d2)), 1e-9);
    EXPECT_GE(a2, -1e-12);
    EXPECT_LE(a2, static_cast<double>(std::min(d1, d2)) + 1e-12);
  }
}

TEST(SubspaceProperties, AffinityMaximalIffNested) {
  const auto [x1, x2] = random_pair_with_angles(30, {1.0, 1.0}, 3, 21);
  EXPECT_NEAR(affinity(x1, x2), std::sqrt(2.0), 1e-9);
  const auto [y1, y2] = random_pair_with_angles(30, {1.0, 0.999}, 3, 22);
  EXPECT_LT(affinity(y1, y2), std::sqrt(2.0) - 1e-6);
}

TEST(SubspaceProperties, OrthogonalInvariance) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto [x1, x2] = random_pair(16, 3, 4, 300 + seed);
    const Matrix q = testing_util::random_orthogonal(16, 400 + seed);
    EXPECT_NEAR(affinity(transform(q, x1), transform(q, x2)), affinity(x1, x2), 1e-9);
  }
}

TEST(SubspaceProperties, MethodsAgreeOnManyPairs) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng = make_rng(derive_seed(77, seed));
    std::uniform_int_distribution<std::size_t> pick_n(8, 128), pick_d(1, 8);
    const std::size_t n = pick_n(rng);
    const Subspace x1 = random_subspace(n, pick_d(rng), rng);
    const Subspace x2 = random_subspace(n, pick_d(rng), rng);
    const double a = affinity_squared(x1, x2, AffinityMethod::trace);
    const double b = affinity_squared(x1, x2, AffinityMethod::frobenius_cross_gram);
    const double c = affinity_squared(x1, x2, AffinityMethod::projected_basis);
    ASSERT_LE(std::abs(a - b), 1e-9);
    ASSERT_LE(std::abs(b - c), 1e-9);
    ASSERT_LE(std::abs(a - c), 1e-9);
  }
}
