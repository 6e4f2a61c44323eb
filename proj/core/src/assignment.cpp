#include <algorithm>
#include <cmath>
#include <limits>

#include "wbary/error.hpp"
#include "wbary/parallel.hpp"
#include "wbary/transport.hpp"

namespace wbary {

namespace {

// Kuhn augmenting path restricted to tight edges and free columns.
bool augment(std::size_t row, const std::vector<std::vector<std::size_t>>& adj,
             const std::vector<bool>& blocked, std::vector<bool>& seen,
             std::vector<std::size_t>& match_col) {
  constexpr std::size_t kFree = std::numeric_limits<std::size_t>::max();
  for (const std::size_t j : adj[row]) {
    if (blocked[j] || seen[j]) continue;
    seen[j] = true;
    if (match_col[j] == kFree || augment(match_col[j], adj, blocked, seen, match_col)) {
      match_col[j] = row;
      return true;
    }
  }
  return false;
}

bool has_perfect_matching(std::size_t first_row, std::size_t n,
                          const std::vector<std::vector<std::size_t>>& adj,
                          const std::vector<bool>& blocked) {
  constexpr std::size_t kFree = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> match_col(n, kFree);
  for (std::size_t i = first_row; i < n; ++i) {
    std::vector<bool> seen(n, false);
    if (!augment(i, adj, blocked, seen, match_col)) return false;
  }
  return true;
}

}  // namespace

Assignment solve_assignment(std::span<const double> cost, std::size_t n) {
  if (n == 0 || cost.size() != n * n) throw InvalidArgument("solve_assignment: shape mismatch");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto c = [&](std::size_t i, std::size_t j) { return cost[(i - 1) * n + (j - 1)]; };

  // Shortest augmenting path Hungarian method (1-based with a dummy column 0).
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0);
  std::vector<std::size_t> way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = c(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment out;
  out.permutation.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) out.permutation[p[j] - 1] = j - 1;

  // Optimal permutations are the perfect matchings on tight edges. When
  // more than n edges are tight, pick the lexicographically smallest one.
  double scale = 1.0;
  for (double x : cost) scale = std::max(scale, std::abs(x));
  const double eps = 1e-12 * scale * static_cast<double>(n);
  std::vector<std::vector<std::size_t>> adj(n);
  std::size_t tight = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      if (c(i, j) - u[i] - v[j] <= eps) {
        adj[i - 1].push_back(j - 1);
        ++tight;
      }
    }
  }
  if (tight > n) {
    std::vector<bool> blocked(n, false);
    std::vector<std::size_t> lex(n);
    bool complete = true;
    for (std::size_t i = 0; i < n && complete; ++i) {
      bool placed = false;
      for (const std::size_t j : adj[i]) {
        if (blocked[j]) continue;
        blocked[j] = true;
        // Rows below i must still be matchable on the remaining columns.
        if (has_perfect_matching(i + 1, n, adj, blocked)) {
          lex[i] = j;
          placed = true;
          break;
        }
        blocked[j] = false;
      }
      complete = placed;
    }
    if (complete) out.permutation = lex;
  }

  for (std::size_t i = 0; i < n; ++i) out.value += cost[i * n + out.permutation[i]];
  return out;
}

std::vector<double> pairwise_w2(const std::vector<DiscreteMeasure>& nus,
                                const std::vector<DiscreteMeasure>& etas) {
  const std::size_t n = nus.size();
  if (etas.size() != n) throw InvalidArgument("assignment_distance: list length mismatch");
  std::vector<double> matrix(n * n);
  parallel_for(n * n, [&](std::size_t k) {
    const auto& a = nus[k / n];
    const auto& b = etas[k % n];
    if (a.dim() != b.dim()) throw InvalidArgument("assignment_distance: dimension mismatch");
    const double sq = a.dim() == 1 ? w2_1d(a, b) : w2_exact(a, b).cost;
    matrix[k] = std::sqrt(std::max(sq, 0.0));
  });
  return matrix;
}

Assignment assignment_distance(const std::vector<DiscreteMeasure>& nus,
                               const std::vector<DiscreteMeasure>& etas) {
  if (nus.size() != etas.size()) throw InvalidArgument("assignment_distance: list length mismatch");
  if (nus.empty()) throw InvalidArgument("assignment_distance: empty lists");
  const auto matrix = pairwise_w2(nus, etas);
  auto result = solve_assignment(matrix, nus.size());
  result.value /= static_cast<double>(nus.size());
  return result;
}

}  // namespace wbary
