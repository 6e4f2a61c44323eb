#pragma once

#include <span>
#include <vector>

namespace wbary::detail {

struct LpSolution {
  std::vector<double> flow;  // m x n row-major
  std::vector<double> u;     // source potentials
  std::vector<double> v;     // sink potentials
};

// Balanced transport LP min <cost, flow> with row sums a and column sums b.
// All weights must be positive. Potentials satisfy u_i + v_j <= c_ij up to
// pricing tolerance and are tight on the basis.
LpSolution solve_transport_lp(std::span<const double> cost, std::span<const double> a,
                              std::span<const double> b);

}  // namespace wbary::detail
