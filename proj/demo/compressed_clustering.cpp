// Subspace clustering on sketched data, ambient vs compressed.
#include <cstdio>

#include "srip/srip.hpp"

int main() {
  using namespace srip;
  const auto ds = synth_uos(1024, 4, {6, 6, 6, 6}, {60, 60, 60, 60}, 0.01, 2024);
  const std::size_t q = default_neighbor_count(6);
  std::printf("ambient N=1024: error %.3f\n", *tsc(ds.points, 4, q, ds.labels).error_rate);

  for (std::size_t n : {12u, 24u, 48u, 96u}) {
    EnsembleSpec spec;
    spec.family = Family::partial_hadamard;
    spec.n = n;
    spec.N = 1024;
    spec.seed = 7;
    const Matrix y = normalize_columns(project_points(sample(spec), ds.points));
    std::printf("hadamard n=%-3zu: error %.3f\n", n, *tsc(y, 4, q, ds.labels).error_rate);
  }
}
