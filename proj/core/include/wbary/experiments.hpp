#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wbary/measures.hpp"
#include "wbary/penalties.hpp"
#include "wbary/solver.hpp"

namespace wbary {

/// Distribution P over absolutely continuous measures on a 1-D grid. A draw
/// is the base density moved by a random shift and log-scale about the
/// domain center, truncated to the domain, then mixed with the uniform
/// density so every draw is bounded below by mix / |domain|.
struct RandomMeasureModel {
  GridDensity base;
  double max_shift = 0.1;      // shift ~ U[-max_shift, max_shift]
  double max_log_scale = 0.2;  // log(scale) ~ U[-max_log_scale, max_log_scale]
  double mix = 0.05;           // weight of the uniform component
  std::uint64_t seed = 0;

  /// Gaussian truncated to [0, 1], with cell masses integrated exactly.
  static RandomMeasureModel gaussian(std::size_t cells = 128, double mean = 0.5,
                                     double sd = 0.15, std::uint64_t seed = 0);

  GridDensity draw(std::mt19937_64& rng) const;
  std::vector<GridDensity> draw(std::size_t count, std::mt19937_64& rng) const;
};

/// p iid draws from nu with weights 1/p. 1-D grids use the exact inverse
/// CDF (one uniform per draw); higher dimensions pick a cell by inverse CDF
/// over row-major cell masses and then a uniform point inside it.
DiscreteMeasure sample_empirical(const GridDensity& nu, std::size_t p, std::mt19937_64& rng);
DiscreteMeasure sample_empirical(const GridDensity& nu, std::size_t p, std::uint64_t seed);

/// K(nu) = int F (1 - F) / f over the support, exact for piecewise-constant f.
double k_functional(const GridDensity& nu);

struct StabilityCheck {
  double lhs = 0.0;  // d_E between the two penalized barycenters
  double rhs = 0.0;  // (2 / gamma) * assignment distance
  bool holds = false;
  bool converged = false;
};

/// Solves both problems on the given grid and compares the symmetric Bregman
/// divergence of the minimizers with the permutation bound. The slack added
/// to rhs is 10 * config.tol.
StabilityCheck check_stability(const std::vector<DiscreteMeasure>& nus,
                               const std::vector<DiscreteMeasure>& etas, double gamma,
                               const Penalty& penalty, const BoxDomain& domain,
                               const std::vector<std::size_t>& shape,
                               const SolverConfig& config);

struct ReportRow {
  std::string experiment;
  std::size_t n = 0;
  std::size_t p = 0;
  double gamma = 0.0;
  long replicate = -1;  // -1 marks an aggregate over replicates
  std::string metric;
  double value = 0.0;
};

/// Least-squares line log(y) = intercept + slope * log(x).
struct SlopeFit {
  std::string metric;
  double slope = 0.0;
  double std_error = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

SlopeFit fit_loglog(const std::string& metric, const std::vector<double>& x,
                    const std::vector<double>& y);

struct ReportCheck {
  std::string name;
  bool passed = false;
};

struct ExperimentReport {
  std::string experiment;
  std::vector<ReportRow> rows;
  std::vector<SlopeFit> slopes;
  std::vector<ReportCheck> checks;

  /// Throws InvalidArgument when absent.
  const SlopeFit& slope(const std::string& metric) const;
  bool check(const std::string& name) const;
  /// Values of every row with this metric, in row order.
  std::vector<double> values(const std::string& metric) const;
};

struct HarnessConfig {
  SolverConfig solver;
  std::size_t replicates = 50;
  std::size_t reference_size = 0;  // 0 selects 10 * max(n)
};

/// Randomized instances of the stability bound: nus are empirical samples
/// of model draws, etas move every atom by scale * U[-1, 1] (clamped to the
/// domain) and reverse the list order. Instance k uses scales[k % size].
ExperimentReport stability_experiment(const RandomMeasureModel& model, std::size_t n,
                                      std::size_t p, double gamma, const Penalty& penalty,
                                      const std::vector<double>& scales,
                                      std::size_t instances, const HarnessConfig& config);

/// Variance term E[d_E^2(mu_{P_n}, mu_P)] for each n, with mu_P proxied by
/// the penalized barycenter of reference_size draws.
ExperimentReport rate_variance(const RandomMeasureModel& model, double gamma,
                               const Penalty& penalty, const std::vector<std::size_t>& n_list,
                               const HarnessConfig& config);

/// W_2(mu^gamma, mu^0) and D_E(mu^gamma, mu^0) along gamma_list for one
/// reference sample, with mu^0 the exact quantile-average barycenter.
ExperimentReport rate_bias(const RandomMeasureModel& model, const std::vector<double>& gamma_list,
                           const Penalty& penalty, const HarnessConfig& config);

/// Stability, variance and bias terms of the L2 error of the barycenter of
/// empirical measures, for each p in p_list.
ExperimentReport decompose_error(const RandomMeasureModel& model, std::size_t n,
                                 const std::vector<std::size_t>& p_list, double gamma,
                                 const Penalty& penalty, const HarnessConfig& config);

/// Default penalty for decompose_error: first-order Sobolev with quadratic G.
Penalty decomposition_penalty(double alpha = 1e-6);

}  // namespace wbary
