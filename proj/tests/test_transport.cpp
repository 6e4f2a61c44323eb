#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "support.hpp"
#include "wbary/constants.hpp"
#include "wbary/error.hpp"
#include "wbary/transport.hpp"

using namespace wbary;
using wbary::testing::random_discrete;

namespace {

// Brute force over permutations; equal-weight measures of the same size have
// a permutation among their optimal plans.
double permutation_oracle(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      c += squared_distance(a.point(i), b.point(perm[i]));
    }
    best = std::min(best, c / static_cast<double>(perm.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

DiscreteMeasure uniform_cloud(std::mt19937_64& rng, std::size_t dim, std::size_t m) {
  std::vector<double> pts(m * dim);
  for (double& x : pts) x = wbary::testing::uniform(rng, -1.0, 1.0);
  return DiscreteMeasure::uniform(dim, std::move(pts));
}

}  // namespace

TEST(W2Exact, DiracToDirac) {
  const auto c = w2_exact(DiscreteMeasure::dirac({0.0}), DiscreteMeasure::dirac({1.0}));
  EXPECT_DOUBLE_EQ(c.cost, 1.0);
  EXPECT_EQ(c.dense_plan(), std::vector<double>{1.0});
}

TEST(W2Exact, IdenticalMeasuresGiveDiagonalPlan) {
  std::mt19937_64 rng(5);
  const auto m = random_discrete(rng, 2, 7);
  const auto c = w2_exact(m, m);
  EXPECT_NEAR(c.cost, 0.0, 1e-15);
  const auto plan = c.dense_plan();
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 7; ++j) {
      EXPECT_NEAR(plan[i * 7 + j], i == j ? m.weight(i) : 0.0, 1e-15);
    }
  }
}

TEST(W2Exact, CrossedSquareCorners) {
  DiscreteMeasure mu(2, {0, 0, 1, 1}, {0.5, 0.5});
  DiscreteMeasure nu(2, {1, 0, 0, 1}, {0.5, 0.5});
  EXPECT_NEAR(w2_exact(mu, nu).cost, 1.0, 1e-14);
}

TEST(W2Exact, TranslationAddsSquaredShift) {
  std::mt19937_64 rng(9);
  const std::vector<double> shift{0.3, -1.2, 0.5};
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = random_discrete(rng, 3, 12);
    auto pts = m.points();
    for (std::size_t k = 0; k < pts.size(); ++k) pts[k] += shift[k % 3];
    const DiscreteMeasure moved(3, std::move(pts), m.weights());
    EXPECT_NEAR(w2_exact(m, moved).cost, 0.09 + 1.44 + 0.25, 1e-12);
  }
}

TEST(W2Exact, MatchesPermutationEnumeration) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t dim = 1 + trial % 3;
    const auto a = uniform_cloud(rng, dim, 6);
    const auto b = uniform_cloud(rng, dim, 6);
    EXPECT_NEAR(w2_exact(a, b).cost, permutation_oracle(a, b), 1e-12);
  }
}

TEST(W2Exact, CertificatesAreTight) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t dim = 1 + trial % 3;
    const auto a = random_discrete(rng, dim, 1 + trial % 23);
    const auto b = random_discrete(rng, dim, 1 + (trial * 7) % 29);
    const auto cert = w2_exact(a, b);
    const auto rep = check_certificate(cert, a, b);
    EXPECT_TRUE(rep.ok()) << "trial " << trial;
    EXPECT_GE(rep.min_dual_slack, -tol::kDualFeasibility);
    EXPECT_LE(rep.duality_gap, tol::kDualityGap);
    EXPECT_LE(rep.marginal_error, tol::kMarginal);
  }
}

TEST(W2Exact, DegenerateEqualMassSplits) {
  // Many ties in the north-west corner exercise degenerate pivots.
  DiscreteMeasure a(1, {0.0, 0.1, 0.2, 0.3}, {0.25, 0.25, 0.25, 0.25});
  DiscreteMeasure b(1, {0.0, 0.2}, {0.5, 0.5});
  const auto cert = w2_exact(a, b);
  EXPECT_NEAR(cert.cost, 0.25 * (0.0 + 0.01 + 0.0 + 0.01), 1e-15);
  EXPECT_TRUE(check_certificate(cert, a, b).ok());
}

TEST(W2Exact, DimensionMismatchThrows) {
  EXPECT_THROW(w2_exact(DiscreteMeasure::dirac({0.0}), DiscreteMeasure::dirac({0.0, 1.0})),
               InvalidArgument);
}

TEST(W21d, Examples) {
  EXPECT_DOUBLE_EQ(w2_1d(DiscreteMeasure::dirac({0.0}), DiscreteMeasure::dirac({1.0})), 1.0);
  DiscreteMeasure two(1, {0.0, 2.0}, {0.5, 0.5});
  EXPECT_DOUBLE_EQ(w2_1d(two, DiscreteMeasure::dirac({1.0})), 1.0);
  EXPECT_NEAR(w2_exact(two, DiscreteMeasure::dirac({1.0})).cost, 1.0, 1e-15);
}

TEST(W21d, UniformGridAgainstDirac) {
  // int_0^1 (x - 1/2)^2 dx = 1/12.
  const auto u = GridDensity::uniform(BoxDomain::unit(1), {10});
  EXPECT_NEAR(w2_1d(u, DiscreteMeasure::dirac({0.5})), 1.0 / 12.0, 1e-14);
}

TEST(W21d, AgreesWithNetworkSimplex) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_discrete(rng, 1, 1 + rng() % 50, -2.0, 3.0);
    const auto b = random_discrete(rng, 1, 1 + rng() % 50, -2.0, 3.0);
    EXPECT_NEAR(w2_1d(a, b), w2_exact(a, b).cost, 1e-8);
    EXPECT_NEAR(w2_monotone(a, b).cost, w2_exact(a, b).cost, 1e-12);
  }
}

TEST(W2Monotone, CertificateIsValid) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = random_discrete(rng, 1, 1 + rng() % 40);
    const auto b = random_discrete(rng, 1, 1 + rng() % 40);
    EXPECT_TRUE(check_certificate(w2_monotone(a, b), a, b).ok());
  }
}

TEST(W2Sorted1d, PotentialHasZeroMean) {
  std::mt19937_64 rng(47);
  auto a = random_discrete(rng, 1, 15);
  auto b = random_discrete(rng, 1, 9);
  std::vector<double> x = a.points(), y = b.points();
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::vector<double> phi(15);
  std::vector<double> psi;
  const double cost = w2_sorted_1d(x, a.weights(), y, b.weights(), phi, &psi);
  double m = 0.0;
  for (std::size_t i = 0; i < 15; ++i) m += phi[i] * a.weight(i);
  EXPECT_NEAR(m, 0.0, 1e-14);
  const DiscreteMeasure sa(1, x, a.weights());
  const DiscreteMeasure sb(1, y, b.weights());
  EXPECT_NEAR(cost, w2_exact(sa, sb).cost, 1e-12);
  // Dual value equals the cost and the pair is feasible.
  double dual = 0.0;
  for (std::size_t i = 0; i < 15; ++i) dual += phi[i] * a.weight(i);
  for (std::size_t j = 0; j < 9; ++j) dual += psi[j] * b.weight(j);
  EXPECT_NEAR(dual, cost, 1e-12);
  for (std::size_t i = 0; i < 15; ++i) {
    for (std::size_t j = 0; j < 9; ++j) {
      EXPECT_LE(phi[i] + psi[j], (x[i] - y[j]) * (x[i] - y[j]) + 1e-12);
    }
  }
}

TEST(CTransform, Examples) {
  const std::vector<double> zero{0.0};
  EXPECT_DOUBLE_EQ(c_transform(zero, zero, zero, 1)[0], 0.0);
  const std::vector<double> support{0.0, 1.0};
  const std::vector<double> phi{0.0, 0.0};
  const std::vector<double> query{0.5};
  EXPECT_DOUBLE_EQ(c_transform(support, phi, query, 1)[0], 0.25);
}

TEST(CTransform, DoubleTransformImprovesDual) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const auto mu = random_discrete(rng, 2, 8);
    const auto nu = random_discrete(rng, 2, 6);
    std::vector<double> phi(8);
    for (double& v : phi) v = wbary::testing::uniform(rng, -0.5, 0.5);
    const auto phic = c_transform(mu.points(), phi, nu.points(), 2);
    const auto phicc = c_transform(nu.points(), phic, mu.points(), 2);
    auto dual = [&](const std::vector<double>& f, const std::vector<double>& g) {
      double v = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) v += f[i] * mu.weight(i);
      for (std::size_t j = 0; j < g.size(); ++j) v += g[j] * nu.weight(j);
      return v;
    };
    EXPECT_GE(dual(phicc, phic), dual(phi, phic) - 1e-14);
    EXPECT_LE(dual(phicc, phic), w2_exact(mu, nu).cost + 1e-12);
  }
}

TEST(Assignment, MatchesEnumeration) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 6;
    std::vector<double> cost(n * n);
    for (double& c : cost) c = std::floor(wbary::testing::uniform(rng, 0.0, 5.0));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_perm;
    do {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) v += cost[i * n + perm[i]];
      if (v < best) {
        best = v;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    const auto got = solve_assignment(cost, n);
    EXPECT_EQ(got.value, best);
    // Integer costs produce many ties; the first optimum in lexicographic
    // order is the one the enumeration keeps.
    EXPECT_EQ(got.permutation, best_perm);
  }
}

TEST(AssignmentDistance, SingleMeasure) {
  std::mt19937_64 rng(63);
  const auto a = random_discrete(rng, 1, 5);
  const auto b = random_discrete(rng, 1, 4);
  const auto r = assignment_distance({a}, {b});
  EXPECT_NEAR(r.value, std::sqrt(w2_exact(a, b).cost), 1e-12);
  EXPECT_EQ(r.permutation, std::vector<std::size_t>{0});
}

TEST(AssignmentDistance, PermutedListsHaveZeroDistance) {
  std::mt19937_64 rng(65);
  std::vector<DiscreteMeasure> nus;
  for (int i = 0; i < 5; ++i) nus.push_back(random_discrete(rng, 2, 4 + i));
  std::vector<DiscreteMeasure> etas{nus[3], nus[0], nus[4], nus[1], nus[2]};
  const auto r = assignment_distance(nus, etas);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
  EXPECT_EQ(r.permutation, (std::vector<std::size_t>{1, 3, 4, 0, 2}));
}

TEST(AssignmentDistance, LengthMismatchThrows) {
  const auto d = DiscreteMeasure::dirac({0.0});
  EXPECT_THROW(assignment_distance({d}, {d, d}), InvalidArgument);
}
