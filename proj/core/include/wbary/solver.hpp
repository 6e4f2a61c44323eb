#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wbary/measures.hpp"
#include "wbary/penalties.hpp"
#include "wbary/transport.hpp"

namespace wbary {

/// min over grid densities f of (1/n) sum_i W_2^2(f, nu_i) + gamma E(f).
/// The density f is transported as atoms at cell centers.
struct BarycenterProblem {
  std::vector<DiscreteMeasure> measures;
  double gamma = 0.0;
  std::optional<Penalty> penalty;
  BoxDomain domain = BoxDomain::unit(1);
  std::vector<std::size_t> shape{128};

  /// Throws InvalidArgument on empty data, gamma < 0, dimension mismatch or
  /// gamma > 0 without a penalty.
  void check() const;
  /// Floor enforced by the projection: the penalty's alpha, or 0.
  double floor() const;
};

enum class StepRule {
  Fixed,     // s_t = s0
  Decaying,  // s_t = s0 / sqrt(t)
  Adaptive,  // Barzilai-Borwein estimate, s0 for the first step
};

enum class Initialization { Uniform, Random };

struct SolverConfig {
  std::size_t max_iters = 2000;
  StepRule step_rule = StepRule::Adaptive;
  double step0 = 0.0;  // 0 selects diam(domain)^2
  double tol = 1e-7;
  std::uint64_t seed = 0;
  Initialization init = Initialization::Uniform;
  std::size_t max_halvings = 30;
};

struct BarycenterSolution {
  GridDensity density;
  std::vector<double> objective_trace;
  std::vector<TransportCertificate> certificates;
  bool converged = false;
  std::size_t iterations = 0;
};

/// Evaluates the objective and a subgradient. One-dimensional problems use
/// the sorted staircase solver with targets sorted once; higher dimensions
/// use the network simplex.
class BarycenterObjective {
 public:
  explicit BarycenterObjective(const BarycenterProblem& problem);

  struct Evaluation {
    double transport = 0.0;  // (1/n) sum_i W_2^2
    double penalty = 0.0;    // E(f), 0 when gamma == 0
    double value = 0.0;      // transport + gamma * penalty
    std::vector<double> subgradient;
  };

  /// Throws DomainViolation when f violates the penalty floor.
  Evaluation evaluate(const GridDensity& f) const;
  /// Objective only; +infinity outside the penalty domain.
  double value(const GridDensity& f) const;
  std::vector<TransportCertificate> certificates(const GridDensity& f) const;

  const BarycenterProblem& problem() const { return *problem_; }

 private:
  // Per-measure transport: cost and the source potential on every cell.
  double transport_one(std::size_t i, std::span<const double> mass,
                       std::span<double> phi) const;

  const BarycenterProblem* problem_;
  std::vector<double> centers_;  // 1-D only, ascending
  std::vector<std::vector<double>> sorted_points_;
  std::vector<std::vector<double>> sorted_weights_;
  std::vector<std::vector<std::size_t>> sorted_index_;
};

/// Objective J(f); +infinity outside the penalty domain.
double objective(const BarycenterProblem& problem, const GridDensity& f);

/// g = (1/n) sum_i phi_i + gamma grad E(f), with each phi_i the source-side
/// Kantorovich potential of f against nu_i, normalized to f-mean zero.
std::vector<double> subgradient(const BarycenterProblem& problem, const GridDensity& f);

/// Euclidean projection onto {f : f_k >= floor, sum_k f_k cell_volume = 1}.
/// Throws InvalidArgument when floor * count * cell_volume > 1.
std::vector<double> project_simplex(std::span<const double> values, double floor,
                                    double cell_volume);
GridDensity project_simplex(const GridDensity& grid, std::span<const double> values,
                            double floor);

/// Projected subgradient descent with monotone backtracking. Requires
/// gamma > 0; use barycenter_1d_exact for the unpenalized problem.
BarycenterSolution solve(const BarycenterProblem& problem, const SolverConfig& config);

/// Unpenalized 1-D barycenter with uniform weights: the pointwise average
/// of the quantile functions.
QuantileTable barycenter_1d_exact(const std::vector<QuantileTable>& tables);
QuantileTable barycenter_1d_exact(const std::vector<DiscreteMeasure>& measures);

}  // namespace wbary
