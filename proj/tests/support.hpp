#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "wbary/measures.hpp"
#include "wbary/random.hpp"

namespace wbary::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline std::vector<double> random_weights(std::mt19937_64& rng, std::size_t m) {
  std::vector<double> w(m);
  double total = 0.0;
  for (double& v : w) {
    v = uniform(rng, 0.05, 1.0);
    total += v;
  }
  for (double& v : w) v /= total;
  return w;
}

inline DiscreteMeasure random_discrete(std::mt19937_64& rng, std::size_t dim, std::size_t m,
                                       double lo = 0.0, double hi = 1.0) {
  std::vector<double> pts(m * dim);
  for (double& x : pts) x = uniform(rng, lo, hi);
  return DiscreteMeasure(dim, std::move(pts), random_weights(rng, m));
}

// Strictly positive density on the grid, bounded in [lo, hi] before normalization.
inline GridDensity random_density(std::mt19937_64& rng, const BoxDomain& domain,
                                  std::vector<std::size_t> shape, double lo = 0.3,
                                  double hi = 2.0) {
  std::size_t cells = 1;
  for (auto s : shape) cells *= s;
  std::vector<double> v(cells);
  for (double& x : v) x = uniform(rng, lo, hi);
  GridDensity g(domain, std::move(shape), v);
  const double mass = g.mass();
  for (double& x : v) x /= mass;
  return g.with_values(std::move(v));
}

inline GridDensity density_1d(std::vector<double> values) {
  const std::size_t n = values.size();
  return GridDensity(BoxDomain::unit(1), {n}, std::move(values));
}

}  // namespace wbary::testing
