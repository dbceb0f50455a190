#include <cstdio>

#include "srip/srip.hpp"

int main() {
  using namespace srip;
  Rng rng = make_rng(5);
  auto x = normal_vector(256, rng);
  const double nx = norm2(x);
  for (auto& v : x) v /= nx;

  std::printf("%-20s %6s %10s %10s\n", "family", "n", "P(>0.25)", "P(>0.5)");
  for (Family f : kRandomFamilies)
    for (std::size_t n : {32u, 128u}) {
      EnsembleSpec spec;
      spec.family = f;
      spec.n = n;
      spec.N = 256;
      spec.seed = 9;
      const auto t = jl_tail_estimate(spec, x, {0.25, 0.5}, 2000);
      std::printf("%-20s %6zu %10.4f %10.4f\n", std::string(to_string(f)).c_str(), n, t.exceedance[0],
                  t.exceedance[1]);
    }
}
