// Affinity of two planes before and after a random projection.
#include <cstdio>

#include "srip/srip.hpp"

int main() {
  using namespace srip;
  const auto [x1, x2] = random_pair_with_angles(512, {0.95, 0.3}, 2, 11);
  std::printf("ambient: aff^2 = %.4f  dist = %.4f\n", affinity_squared(x1, x2), distance(x1, x2));

  for (Family f : {Family::gaussian, Family::partial_fourier, Family::partial_circulant}) {
    for (std::size_t n : {16u, 64u, 256u}) {
      EnsembleSpec spec;
      spec.family = f;
      spec.n = n;
      spec.N = 512;
      spec.seed = 3;
      const auto r = verify_pair_bound(sample(spec), x1, x2);
      std::printf("%-18s n=%-4zu aff^2 change %.4f  delta %.3f\n", std::string(to_string(f)).c_str(), n,
                  r.aff_change, r.delta);
    }
  }
}
