#pragma once

#include "ldlab/vec.hpp"

namespace ldlab {

/// Halton low-discrepancy sequence, one prime base per coordinate.
/// Deterministic space-filling probe points for validation grids.
inline double halton(unsigned long long index, int base) {
  double f = 1.0, r = 0.0;
  unsigned long long i = index + 1;  // skip the origin
  while (i > 0) {
    f /= base;
    r += f * (i % static_cast<unsigned long long>(base));
    i /= static_cast<unsigned long long>(base);
  }
  return r;
}

inline Vec halton_point(unsigned long long index, const Vec& lo, const Vec& hi) {
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
  Vec x(lo.size());
  for (std::size_t k = 0; k < lo.size(); ++k)
    x[k] = lo[k] + (hi[k] - lo[k]) * halton(index, primes[k % 8]);
  return x;
}

}  // namespace ldlab
