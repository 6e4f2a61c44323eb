#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "wbary/error.hpp"
#include "wbary/penalties.hpp"

using namespace wbary;
using wbary::testing::density_1d;
using wbary::testing::random_density;

namespace {

std::vector<Penalty> all_penalties() {
  return {Penalty::quadratic(), Penalty::entropy(1e-6), Penalty::sobolev(1, 1e-6),
          Penalty::sobolev(2, 1e-6), Penalty::sobolev(1, 1e-6, Integrand::Entropy)};
}

// Central difference of eval along v, in the pairing used by grad.
double directional_fd(const Penalty& p, const GridDensity& f, const std::vector<double>& v,
                      double eps) {
  auto shifted = [&](double s) {
    auto x = f.values();
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += s * v[k];
    return *eval(p, f.with_values(std::move(x)));
  };
  return (shifted(eps) - shifted(-eps)) / (2.0 * eps);
}

}  // namespace

TEST(Eval, UniformDensity) {
  const auto u = GridDensity::uniform(BoxDomain::unit(1), {32});
  EXPECT_NEAR(*eval(Penalty::quadratic(), u), 0.5, 1e-15);
  EXPECT_NEAR(*eval(Penalty::entropy(1e-6), u), 0.0, 1e-15);
}

TEST(Eval, HalfSupportedQuadratic) {
  EXPECT_NEAR(*eval(Penalty::quadratic(), density_1d({2.0, 2.0, 0.0, 0.0})), 1.0, 1e-15);
}

TEST(Eval, OutsideDomainIsInfinite) {
  const auto f = density_1d({2.0, 0.0});
  EXPECT_FALSE(eval(Penalty::entropy(1e-3), f).has_value());
  EXPECT_FALSE(Penalty::entropy(1e-3).in_domain(f));
  EXPECT_TRUE(Penalty::quadratic().in_domain(f));
  EXPECT_THROW(grad(Penalty::entropy(1e-3), f), DomainViolation);
}

TEST(Eval, InvalidConstruction) {
  EXPECT_THROW(Penalty::entropy(0.0), InvalidArgument);
  EXPECT_THROW(Penalty::quadratic(-1.0), InvalidArgument);
  EXPECT_THROW(Penalty::sobolev(-1, 1e-6), InvalidArgument);
}

TEST(Eval, SobolevOfConstantHasNoDerivativeTerms) {
  const auto u = GridDensity::uniform(BoxDomain::unit(2), {6, 6});
  EXPECT_NEAR(sobolev_norm_sq(u, u.values(), 2), sobolev_norm_sq(u, u.values(), 0), 1e-12);
  EXPECT_NEAR(sobolev_norm_sq(u, u.values(), 0), 1.0, 1e-12);
}

TEST(Eval, SobolevFirstDifferenceOfLinearRamp) {
  // f_k = k on n cells of width h: sum of squared forward differences,
  // (1/h)^2 per interior edge, times cell volume h.
  const std::size_t n = 10;
  const double h = 1.0 / n;
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = static_cast<double>(k);
  const auto g = density_1d(v);
  double zeroth = 0.0;
  for (double x : v) zeroth += x * x * h;
  const double first = static_cast<double>(n - 1) / (h * h) * h;
  EXPECT_NEAR(sobolev_norm_sq(g, v, 1), zeroth + first, 1e-9);
}

TEST(Grad, UniformDensity) {
  const auto u = GridDensity::uniform(BoxDomain::unit(1), {16});
  for (double v : grad(Penalty::quadratic(), u)) EXPECT_NEAR(v, 1.0, 1e-15);
  for (double v : grad(Penalty::entropy(1e-6), u)) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(Grad, MatchesFiniteDifferences1d) {
  std::mt19937_64 rng(101);
  for (const auto& p : all_penalties()) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto f = random_density(rng, BoxDomain::unit(1), {64});
      const auto g = grad(p, f);
      for (int dir = 0; dir < 5; ++dir) {
        std::vector<double> v(64);
        for (double& x : v) x = wbary::testing::uniform(rng, -1.0, 1.0);
        const double exact = inner(f, g, v);
        const double fd = directional_fd(p, f, v, 1e-5);
        EXPECT_NEAR(fd, exact, 1e-5 * std::max(1.0, std::abs(exact))) << p.name();
      }
    }
  }
}

TEST(Grad, MatchesFiniteDifferences2dSobolev) {
  std::mt19937_64 rng(103);
  const BoxDomain box({0.0, 0.0}, {1.0, 2.0});
  for (int order : {1, 2}) {
    const auto p = Penalty::sobolev(order, 1e-6);
    const auto f = random_density(rng, box, {16, 16});
    const auto g = grad(p, f);
    for (int dir = 0; dir < 5; ++dir) {
      std::vector<double> v(256);
      for (double& x : v) x = wbary::testing::uniform(rng, -1.0, 1.0);
      const double exact = inner(f, g, v);
      EXPECT_NEAR(directional_fd(p, f, v, 1e-5), exact, 1e-5 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST(SobolevOperator, IsSymmetric) {
  std::mt19937_64 rng(105);
  const auto grid = GridDensity::uniform(BoxDomain::unit(2), {7, 5});
  std::vector<double> u(35), v(35);
  for (double& x : u) x = wbary::testing::uniform(rng, -1.0, 1.0);
  for (double& x : v) x = wbary::testing::uniform(rng, -1.0, 1.0);
  for (int order : {0, 1, 2}) {
    const auto su = sobolev_operator(grid, u, order);
    const auto sv = sobolev_operator(grid, v, order);
    EXPECT_NEAR(inner(grid, su, v), inner(grid, u, sv), 1e-9);
    EXPECT_NEAR(inner(grid, su, u), sobolev_norm_sq(grid, u, order), 1e-9);
  }
}

TEST(Bregman, VanishesOnDiagonal) {
  std::mt19937_64 rng(107);
  const auto f = random_density(rng, BoxDomain::unit(1), {20});
  for (const auto& p : all_penalties()) {
    EXPECT_NEAR(bregman_sym(p, f, f), 0.0, 1e-14);
    EXPECT_NEAR(bregman_nonsym(p, f, f), 0.0, 1e-12);
  }
}

TEST(Bregman, QuadraticConstantVersusRamp) {
  // g(x) = 2x sampled at cell centers; the midpoint rule loses h^2/3.
  const std::size_t n = 2000;
  std::vector<double> ramp(n);
  for (std::size_t k = 0; k < n; ++k) ramp[k] = 2.0 * (k + 0.5) / n;
  const auto f = GridDensity::uniform(BoxDomain::unit(1), {n});
  const auto g = density_1d(ramp);
  const double h = 1.0 / n;
  EXPECT_NEAR(bregman_sym(Penalty::quadratic(), f, g), 1.0 / 3.0 - h * h / 3.0, 1e-12);
}

TEST(Bregman, SymmetricSplitsIntoTwoNonsymmetric) {
  std::mt19937_64 rng(109);
  for (const auto& p : all_penalties()) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto f = random_density(rng, BoxDomain::unit(1), {40});
      const auto g = random_density(rng, BoxDomain::unit(1), {40});
      const double sym = bregman_sym(p, f, g);
      EXPECT_NEAR(sym, bregman_sym(p, g, f), 1e-12);
      EXPECT_GE(sym, 0.0);
      EXPECT_GE(bregman_nonsym(p, f, g), -1e-12);
      EXPECT_NEAR(sym, bregman_nonsym(p, f, g) + bregman_nonsym(p, g, f), 1e-9) << p.name();
    }
  }
}

TEST(Bregman, QuadraticIsHalfSquaredL2) {
  std::mt19937_64 rng(111);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = random_density(rng, BoxDomain::unit(1), {33});
    const auto g = random_density(rng, BoxDomain::unit(1), {33});
    double quad = 0.0;
    for (std::size_t k = 0; k < 33; ++k) {
      const double d = f.values()[k] - g.values()[k];
      quad += d * d / 33.0;
    }
    EXPECT_NEAR(l2_distance_sq(f, g), quad, 1e-12);
    EXPECT_NEAR(bregman_sym(Penalty::quadratic(), f, g), quad, 1e-12);
    EXPECT_NEAR(bregman_nonsym(Penalty::quadratic(), f, g), quad / 2.0, 1e-12);
  }
}

TEST(Bregman, EntropyIsKullbackLeibler) {
  std::mt19937_64 rng(113);
  const auto f = random_density(rng, BoxDomain::unit(1), {25});
  const auto g = random_density(rng, BoxDomain::unit(1), {25});
  double kl = 0.0;
  for (std::size_t k = 0; k < 25; ++k) {
    kl += f.values()[k] * std::log(f.values()[k] / g.values()[k]) / 25.0;
  }
  EXPECT_NEAR(bregman_nonsym(Penalty::entropy(1e-6), f, g), kl, 1e-12);
}

TEST(Bregman, MismatchedGridsThrow) {
  const auto a = GridDensity::uniform(BoxDomain::unit(1), {4});
  const auto b = GridDensity::uniform(BoxDomain::unit(1), {5});
  EXPECT_THROW(bregman_sym(Penalty::quadratic(), a, b), InvalidArgument);
}
