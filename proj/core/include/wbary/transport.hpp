#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wbary/measures.hpp"

namespace wbary {

struct PlanEntry {
  std::size_t source;
  std::size_t target;
  double mass;
};

/// Optimal plan for the squared Euclidean cost together with a pair of
/// Kantorovich potentials. phi is normalized to have mean zero under the
/// source measure.
struct TransportCertificate {
  double cost = 0.0;  // W_2^2
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<PlanEntry> plan;  // sparse; entries with positive mass
  std::vector<double> phi;      // rows entries
  std::vector<double> psi;      // cols entries

  std::vector<double> dense_plan() const;  // rows x cols, row-major
  double dual_value(std::span<const double> mu_weights,
                    std::span<const double> nu_weights) const;
};

/// Worst-case residuals of a certificate against its two measures.
struct CertificateReport {
  double marginal_error = 0.0;  // max |row/col sum - weight|
  double min_dual_slack = 0.0;  // min_ij c_ij - phi_i - psi_j
  double duality_gap = 0.0;     // |cost - dual value|
  double plan_cost_error = 0.0; // |cost - sum pi_ij c_ij|
  bool ok() const;
};

double squared_distance(std::span<const double> x, std::span<const double> y);

CertificateReport check_certificate(const TransportCertificate& cert,
                                    const DiscreteMeasure& mu,
                                    const DiscreteMeasure& nu);

/// Exact W_2^2 between discrete measures by the network simplex method on
/// the bipartite transport polytope. Duals are read off the final basis and
/// then tightened by one round of c-transforms.
TransportCertificate w2_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Exact W_2^2 for 1-D inputs via the north-west corner basis on sorted
/// supports. Produces the same kind of certificate as w2_exact.
TransportCertificate w2_monotone(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Staircase solver on pre-sorted 1-D supports (x and y ascending). Writes
/// the source potential into phi (normalized to a-mean 0) and returns the
/// cost. psi and plan are filled when non-null.
double w2_sorted_1d(std::span<const double> x, std::span<const double> a,
                    std::span<const double> y, std::span<const double> b,
                    std::span<double> phi, std::vector<double>* psi = nullptr,
                    std::vector<PlanEntry>* plan = nullptr);

/// Exact W_2^2 by integrating the squared difference of quantile functions.
double w2_1d(const Measure& mu, const Measure& nu);
double w2_quantile(const QuantileTable& a, const QuantileTable& b);

/// phi^c(x) = min_y |x - y|^2 - phi(y) for every query point x. Points are
/// row-major with the given dimension.
std::vector<double> c_transform(std::span<const double> support,
                                std::span<const double> phi,
                                std::span<const double> query, std::size_t dim);

struct Assignment {
  double value = 0.0;
  std::vector<std::size_t> permutation;  // row i -> column permutation[i]
};

/// Minimum-sum assignment on an n x n row-major cost matrix. Among optimal
/// permutations (ties within rounding) the lexicographically smallest one is
/// returned. value is the raw sum in row order.
Assignment solve_assignment(std::span<const double> cost, std::size_t n);

/// n x n matrix of W_2 (not squared) between the two lists.
std::vector<double> pairwise_w2(const std::vector<DiscreteMeasure>& nus,
                                const std::vector<DiscreteMeasure>& etas);

/// (1/n) min_sigma sum_i W_2(nu_i, eta_sigma(i)) with an optimal sigma.
Assignment assignment_distance(const std::vector<DiscreteMeasure>& nus,
                               const std::vector<DiscreteMeasure>& etas);

}  // namespace wbary
