// gamma_1 and gamma_2 over a range of sample counts.

#include <cstdio>

#include "eigsense/eigsense.hpp"

int main() {
  using namespace eigsense;
  constexpr Index m = 4, l = 8;
  std::printf("%10s %10s %10s %10s\n", "Ns", "gamma1", "gamma2", "ED");
  for (Index ns : {1000, 4000, 10000, 20000, 50000, 100000, 180000}) {
    std::printf("%10ld %10.5f %10.5f %10.5f\n", static_cast<long>(ns), mme_threshold(ns, m, l, 0.1),
                eme_threshold(ns, m, l, 0.1), energy_threshold(m, ns, 0.1));
  }
}
