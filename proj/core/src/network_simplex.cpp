// Primal network simplex for the uncapacitated bipartite transport problem.
//
// Nodes 0..m-1 are sources, m..m+n-1 are sinks and node m+n is an
// artificial root joined to every node by an artificial arc. The spanning
// tree is kept strongly feasible through the leaving-arc rule, which rules
// out cycling on degenerate pivots. After each pivot the tree structure and
// node potentials are rebuilt from the root; the graphs here are small
// enough that this costs less than pricing.

#include "network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wbary/error.hpp"

namespace wbary::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPricingEps = 1e-13;

class TransportSimplex {
 public:
  TransportSimplex(std::span<const double> cost, std::span<const double> a,
                   std::span<const double> b)
      : m_(a.size()),
        n_(b.size()),
        nodes_(m_ + n_),
        real_arcs_(m_ * n_),
        cost_(real_arcs_ + nodes_),
        flow_(real_arcs_ + nodes_, 0.0),
        source_(real_arcs_ + nodes_),
        target_(real_arcs_ + nodes_),
        in_tree_(real_arcs_ + nodes_, false),
        parent_(nodes_ + 1),
        pred_(nodes_ + 1),
        forward_(nodes_ + 1),
        depth_(nodes_ + 1),
        pi_(nodes_ + 1),
        incident_(nodes_ + 1) {
    double max_cost = 0.0;
    for (std::size_t e = 0; e < real_arcs_; ++e) {
      cost_[e] = cost[e];
      source_[e] = e / n_;
      target_[e] = m_ + e % n_;
      max_cost = std::max(max_cost, std::abs(cost[e]));
    }
    const double artificial = (max_cost + 1.0) * static_cast<double>(nodes_ + 1);
    const std::size_t root = nodes_;
    for (std::size_t u = 0; u < nodes_; ++u) {
      const std::size_t e = real_arcs_ + u;
      in_tree_[e] = true;
      incident_[u].push_back(e);
      incident_[root].push_back(e);
      if (u < m_) {
        source_[e] = u;
        target_[e] = root;
        flow_[e] = a[u];
        cost_[e] = 0.0;
      } else {
        source_[e] = root;
        target_[e] = u;
        flow_[e] = b[u - m_];
        cost_[e] = artificial;
      }
    }
    rebuild_tree();
    block_ = std::max<std::size_t>(
        static_cast<std::size_t>(std::sqrt(static_cast<double>(real_arcs_))), 10);
  }

  void run() {
    const std::size_t max_pivots = 50 * (real_arcs_ + nodes_) + 1000;
    std::size_t pivots = 0;
    while (find_entering_arc()) {
      if (++pivots > max_pivots) {
        throw InternalError("network simplex: pivot limit reached");
      }
      pivot();
    }
  }

  double flow(std::size_t e) const { return flow_[e]; }
  double potential(std::size_t u) const { return pi_[u]; }
  std::size_t artificial_arc(std::size_t u) const { return real_arcs_ + u; }

 private:
  double reduced_cost(std::size_t e) const {
    return cost_[e] + pi_[source_[e]] - pi_[target_[e]];
  }

  // Block search pricing over the real arcs.
  bool find_entering_arc() {
    double best = 0.0;
    std::size_t count = block_;
    std::size_t e = next_arc_;
    bool found = false;
    for (std::size_t scanned = 0; scanned < real_arcs_; ++scanned) {
      if (!in_tree_[e]) {
        const double rc = reduced_cost(e);
        const double scale = std::max({std::abs(cost_[e]), std::abs(pi_[source_[e]]),
                                       std::abs(pi_[target_[e]]), 1.0});
        if (rc < -kPricingEps * scale && rc < best) {
          best = rc;
          in_arc_ = e;
          found = true;
        }
      }
      if (++e == real_arcs_) e = 0;
      if (--count == 0) {
        if (found) {
          next_arc_ = e;
          return true;
        }
        count = block_;
      }
    }
    if (found) next_arc_ = e;
    return found;
  }

  void pivot() {
    // Join node of the cycle closed by in_arc_.
    std::size_t u = source_[in_arc_];
    std::size_t v = target_[in_arc_];
    while (u != v) {
      if (depth_[u] >= depth_[v]) {
        u = parent_[u];
      } else {
        v = parent_[v];
      }
    }
    const std::size_t join = u;

    // Leaving arc: flow is pushed from first to second along in_arc_.
    const std::size_t first = source_[in_arc_];
    const std::size_t second = target_[in_arc_];
    double delta = kInf;
    std::size_t u_out = nodes_ + 1;
    for (std::size_t w = first; w != join; w = parent_[w]) {
      const double d = forward_[w] ? flow_[pred_[w]] : kInf;
      if (d < delta) {
        delta = d;
        u_out = w;
      }
    }
    for (std::size_t w = second; w != join; w = parent_[w]) {
      const double d = forward_[w] ? kInf : flow_[pred_[w]];
      if (d <= delta) {
        delta = d;
        u_out = w;
      }
    }
    if (u_out > nodes_ || !std::isfinite(delta)) {
      throw InternalError("network simplex: unbounded pivot");
    }

    if (delta > 0.0) {
      flow_[in_arc_] += delta;
      for (std::size_t w = first; w != join; w = parent_[w]) {
        flow_[pred_[w]] += forward_[w] ? -delta : delta;
      }
      for (std::size_t w = second; w != join; w = parent_[w]) {
        flow_[pred_[w]] += forward_[w] ? delta : -delta;
      }
    }
    const std::size_t out_arc = pred_[u_out];
    flow_[out_arc] = std::max(flow_[out_arc], 0.0);
    if (out_arc == in_arc_) return;

    in_tree_[out_arc] = false;
    in_tree_[in_arc_] = true;
    erase_incident(source_[out_arc], out_arc);
    erase_incident(target_[out_arc], out_arc);
    incident_[source_[in_arc_]].push_back(in_arc_);
    incident_[target_[in_arc_]].push_back(in_arc_);
    rebuild_tree();
  }

  void erase_incident(std::size_t node, std::size_t arc) {
    auto& list = incident_[node];
    const auto it = std::find(list.begin(), list.end(), arc);
    *it = list.back();
    list.pop_back();
  }

  // Breadth-first pass from the root: parents, depths and potentials that
  // make every tree arc's reduced cost zero.
  void rebuild_tree() {
    const std::size_t root = nodes_;
    queue_.clear();
    queue_.push_back(root);
    parent_[root] = root;
    depth_[root] = 0;
    pi_[root] = 0.0;
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const std::size_t u = queue_[head];
      for (const std::size_t e : incident_[u]) {
        if (e == pred_[u] && u != root) continue;
        const std::size_t w = source_[e] == u ? target_[e] : source_[e];
        parent_[w] = u;
        pred_[w] = e;
        depth_[w] = depth_[u] + 1;
        forward_[w] = source_[e] == w;
        pi_[w] = forward_[w] ? pi_[u] - cost_[e] : pi_[u] + cost_[e];
        queue_.push_back(w);
      }
    }
  }

  std::size_t m_;
  std::size_t n_;
  std::size_t nodes_;
  std::size_t real_arcs_;
  std::vector<double> cost_;
  std::vector<double> flow_;
  std::vector<std::size_t> source_;
  std::vector<std::size_t> target_;
  std::vector<bool> in_tree_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> pred_;
  std::vector<bool> forward_;
  std::vector<std::size_t> depth_;
  std::vector<double> pi_;
  std::vector<std::vector<std::size_t>> incident_;
  std::vector<std::size_t> queue_;
  std::size_t block_ = 10;
  std::size_t next_arc_ = 0;
  std::size_t in_arc_ = 0;
};

}  // namespace

LpSolution solve_transport_lp(std::span<const double> cost, std::span<const double> a,
                              std::span<const double> b) {
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  if (cost.size() != m * n) throw InvalidArgument("transport LP: cost shape mismatch");
  TransportSimplex simplex(cost, a, b);
  simplex.run();

  LpSolution out;
  out.flow.resize(m * n);
  double total = 0.0;
  for (double w : a) total += w;
  for (std::size_t u = 0; u < m + n; ++u) {
    if (simplex.flow(simplex.artificial_arc(u)) > 1e-9 * std::max(total, 1.0)) {
      throw InternalError("network simplex: infeasible transport problem");
    }
  }
  for (std::size_t e = 0; e < m * n; ++e) out.flow[e] = simplex.flow(e);
  out.u.resize(m);
  out.v.resize(n);
  for (std::size_t i = 0; i < m; ++i) out.u[i] = -simplex.potential(i);
  for (std::size_t j = 0; j < n; ++j) out.v[j] = simplex.potential(m + j);
  return out;
}

}  // namespace wbary::detail
