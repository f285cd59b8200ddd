#pragma once

#include "nswx/core.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

namespace nswx::test {

inline double unit(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline Vector random_weights(std::mt19937_64& rng, int n) {
  Vector w(n);
  for (int i = 0; i < n; ++i) w(i) = -std::log(unit(rng));
  return w / w.sum();
}

/// Integer valuations in [lo, hi]; with lo = 0 it resamples until Assumption 1 holds.
inline Instance random_instance(std::mt19937_64& rng, int n, int m, int lo = 1, int hi = 10, bool equal = false) {
  for (;;) {
    Matrix v(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) v(i, j) = uniform_int(rng, lo, hi);
    }
    const Vector w = equal ? Vector(Vector::Constant(n, 1.0 / n)) : random_weights(rng, n);
    Instance inst = Instance::create(v, w);
    if (check_assumption1(inst)) return inst;
  }
}

/// Random convex combination of k agent-saturating matchings (requires n <= m).
inline FractionalSolution random_feasible_point(std::mt19937_64& rng, int n, int m, int k = 3) {
  Matrix b = Matrix::Zero(n, m);
  std::vector<int> cols(static_cast<std::size_t>(m));
  std::vector<double> alpha(static_cast<std::size_t>(k));
  double total = 0.0;
  for (double& a : alpha) total += (a = -std::log(unit(rng)));
  for (int t = 0; t < k; ++t) {
    std::iota(cols.begin(), cols.end(), 0);
    std::shuffle(cols.begin(), cols.end(), rng);
    for (int i = 0; i < n; ++i) b(i, cols[i]) += alpha[t] / total;
  }
  return FractionalSolution(b);
}

}  // namespace nswx::test
