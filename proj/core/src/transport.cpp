#include "wbary/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "network_simplex.hpp"
#include "wbary/constants.hpp"
#include "wbary/error.hpp"

namespace wbary {

namespace {

// Remaining masses closer than this count as exhausted together.
constexpr double kStaircaseTie = 1e-14;

std::vector<std::size_t> sorted_order(const DiscreteMeasure& m) {
  std::vector<std::size_t> order(m.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& x = m.points();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  return order;
}

// Shift (phi, psi) -> (phi - s, psi + s) so that phi has a-mean zero.
void normalize_potentials(std::span<double> phi, std::span<double> psi,
                          std::span<const double> a) {
  double s = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    s += a[i] * phi[i];
    total += a[i];
  }
  if (total > 0.0) s /= total;
  for (double& p : phi) p -= s;
  for (double& p : psi) p += s;
}

}  // namespace

std::vector<double> TransportCertificate::dense_plan() const {
  std::vector<double> out(rows * cols, 0.0);
  for (const auto& e : plan) out[e.source * cols + e.target] += e.mass;
  return out;
}

double TransportCertificate::dual_value(std::span<const double> mu_weights,
                                        std::span<const double> nu_weights) const {
  double v = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) v += mu_weights[i] * phi[i];
  for (std::size_t j = 0; j < psi.size(); ++j) v += nu_weights[j] * psi[j];
  return v;
}

bool CertificateReport::ok() const {
  return marginal_error <= tol::kMarginal && min_dual_slack >= -tol::kDualFeasibility &&
         duality_gap <= tol::kDualityGap && plan_cost_error <= tol::kDualityGap;
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    s += d * d;
  }
  return s;
}

CertificateReport check_certificate(const TransportCertificate& cert,
                                    const DiscreteMeasure& mu,
                                    const DiscreteMeasure& nu) {
  if (cert.rows != mu.size() || cert.cols != nu.size() || cert.phi.size() != mu.size() ||
      cert.psi.size() != nu.size()) {
    throw InvalidArgument("certificate shape does not match the measures");
  }
  CertificateReport report;
  std::vector<double> row(mu.size(), 0.0);
  std::vector<double> col(nu.size(), 0.0);
  double plan_cost = 0.0;
  for (const auto& e : cert.plan) {
    row[e.source] += e.mass;
    col[e.target] += e.mass;
    plan_cost += e.mass * squared_distance(mu.point(e.source), nu.point(e.target));
  }
  for (std::size_t i = 0; i < mu.size(); ++i) {
    report.marginal_error = std::max(report.marginal_error, std::abs(row[i] - mu.weight(i)));
  }
  for (std::size_t j = 0; j < nu.size(); ++j) {
    report.marginal_error = std::max(report.marginal_error, std::abs(col[j] - nu.weight(j)));
  }
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) {
      slack = std::min(slack, squared_distance(mu.point(i), nu.point(j)) - cert.phi[i] -
                                  cert.psi[j]);
    }
  }
  report.min_dual_slack = slack;
  report.duality_gap = std::abs(cert.cost - cert.dual_value(mu.weights(), nu.weights()));
  report.plan_cost_error = std::abs(cert.cost - plan_cost);
  return report;
}

TransportCertificate w2_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) throw InvalidArgument("w2_exact: dimension mismatch");
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();

  // Zero-weight atoms stay out of the LP; their potentials come from the
  // c-transform pass below.
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < m; ++i) {
    if (mu.weight(i) > 0.0) rows.push_back(i);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (nu.weight(j) > 0.0) cols.push_back(j);
  }
  if (rows.empty() || cols.empty()) throw InvalidArgument("w2_exact: measure without mass");

  std::vector<double> cost(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = squared_distance(mu.point(i), nu.point(j));
  }
  std::vector<double> lp_cost(rows.size() * cols.size());
  std::vector<double> a(rows.size());
  std::vector<double> b(cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    a[r] = mu.weight(rows[r]);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      lp_cost[r * cols.size() + c] = cost[rows[r] * n + cols[c]];
    }
  }
  for (std::size_t c = 0; c < cols.size(); ++c) b[c] = nu.weight(cols[c]);

  const auto lp = detail::solve_transport_lp(lp_cost, a, b);

  TransportCertificate cert;
  cert.rows = m;
  cert.cols = n;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double f = lp.flow[r * cols.size() + c];
      if (f > 0.0) {
        cert.plan.push_back({rows[r], cols[c], f});
        cert.cost += f * lp_cost[r * cols.size() + c];
      }
    }
  }

  // psi = phi^c over the LP rows, then phi = psi^c over every column.
  std::vector<double> phi_lp(lp.u);
  cert.psi.assign(n, std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      cert.psi[j] = std::min(cert.psi[j], cost[rows[r] * n + j] - phi_lp[r]);
    }
  }
  cert.phi.assign(m, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cert.phi[i] = std::min(cert.phi[i], cost[i * n + j] - cert.psi[j]);
    }
  }
  normalize_potentials(cert.phi, cert.psi, mu.weights());
  return cert;
}

double w2_sorted_1d(std::span<const double> x, std::span<const double> a,
                    std::span<const double> y, std::span<const double> b,
                    std::span<double> phi, std::vector<double>* psi,
                    std::vector<PlanEntry>* plan) {
  const std::size_t m = x.size();
  const std::size_t n = y.size();
  if (m == 0 || n == 0 || a.size() != m || b.size() != n || phi.size() != m) {
    throw InvalidArgument("w2_sorted_1d: shape mismatch");
  }
  std::vector<double> local_psi;
  std::vector<double>& v = psi ? *psi : local_psi;
  v.assign(n, 0.0);
  if (plan) plan->clear();

  // North-west corner walk: each step advances one index (or both on a tie),
  // and the potentials are tight along the visited cells. For the convex
  // cost |x - y|^2 on sorted supports the plan is optimal.
  std::size_t i = 0;
  std::size_t j = 0;
  double ra = a[0];
  double rb = b[0];
  double cost = 0.0;
  phi[0] = 0.0;
  v[0] = (x[0] - y[0]) * (x[0] - y[0]);
  for (;;) {
    const double f = std::min(ra, rb);
    const double c = (x[i] - y[j]) * (x[i] - y[j]);
    if (f > 0.0) {
      cost += f * c;
      if (plan) plan->push_back({i, j, f});
    }
    ra -= f;
    rb -= f;
    if (i + 1 == m && j + 1 == n) break;
    if (i + 1 < m && j + 1 < n && std::abs(ra - rb) <= kStaircaseTie) {
      // Row and column run out together. Either zero-flow edge completes the
      // tree; average the two resulting potentials, which is again optimal.
      const double row_first = (x[i + 1] - y[j]) * (x[i + 1] - y[j]) - v[j];
      const double col_psi = (x[i] - y[j + 1]) * (x[i] - y[j + 1]) - phi[i];
      const double corner = (x[i + 1] - y[j + 1]) * (x[i + 1] - y[j + 1]);
      const double col_first = corner - col_psi;
      ++i;
      ++j;
      ra = a[i];
      rb = b[j];
      phi[i] = 0.5 * (row_first + col_first);
      v[j] = corner - phi[i];
      continue;
    }
    const bool advance_row = j + 1 == n || (i + 1 < m && ra <= rb);
    if (advance_row) {
      ++i;
      ra = a[i];
      phi[i] = (x[i] - y[j]) * (x[i] - y[j]) - v[j];
    } else {
      ++j;
      rb = b[j];
      v[j] = (x[i] - y[j]) * (x[i] - y[j]) - phi[i];
    }
  }
  normalize_potentials(phi, v, a);
  return cost;
}

TransportCertificate w2_monotone(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != 1 || nu.dim() != 1) throw InvalidArgument("w2_monotone needs 1-D measures");
  const auto ord_mu = sorted_order(mu);
  const auto ord_nu = sorted_order(nu);
  std::vector<double> x(mu.size());
  std::vector<double> a(mu.size());
  std::vector<double> y(nu.size());
  std::vector<double> b(nu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    x[k] = mu.points()[ord_mu[k]];
    a[k] = mu.weight(ord_mu[k]);
  }
  for (std::size_t k = 0; k < nu.size(); ++k) {
    y[k] = nu.points()[ord_nu[k]];
    b[k] = nu.weight(ord_nu[k]);
  }
  std::vector<double> phi(mu.size());
  std::vector<double> psi;
  std::vector<PlanEntry> plan;
  TransportCertificate cert;
  cert.cost = w2_sorted_1d(x, a, y, b, phi, &psi, &plan);
  cert.rows = mu.size();
  cert.cols = nu.size();
  cert.phi.resize(mu.size());
  cert.psi.resize(nu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) cert.phi[ord_mu[k]] = phi[k];
  for (std::size_t k = 0; k < nu.size(); ++k) cert.psi[ord_nu[k]] = psi[k];
  for (auto& e : plan) {
    cert.plan.push_back({ord_mu[e.source], ord_nu[e.target], e.mass});
  }
  return cert;
}

double w2_quantile(const QuantileTable& qa, const QuantileTable& qb) {
  if (!qa.well_formed() || !qb.well_formed()) {
    throw InvalidArgument("w2_quantile: malformed quantile table");
  }
  // Value of segment k of q at probability t (linear within the segment).
  auto value = [](const QuantileTable& q, std::size_t k, double t) {
    if (q.start[k] == q.end[k]) return q.start[k];
    const double t0 = q.breakpoints[k];
    const double t1 = q.breakpoints[k + 1];
    return q.start[k] + (q.end[k] - q.start[k]) * ((t - t0) / (t1 - t0));
  };
  double total = 0.0;
  std::size_t ia = 0;
  std::size_t ib = 0;
  double lo = 0.0;
  while (ia < qa.segments() && ib < qb.segments()) {
    const double hi = std::min(qa.breakpoints[ia + 1], qb.breakpoints[ib + 1]);
    const double len = hi - lo;
    if (len > 0.0) {
      const double d0 = value(qa, ia, lo) - value(qb, ib, lo);
      const double d1 = value(qa, ia, hi) - value(qb, ib, hi);
      total += len * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
    }
    lo = hi;
    if (qa.breakpoints[ia + 1] <= hi) ++ia;
    if (qb.breakpoints[ib + 1] <= hi) ++ib;
  }
  return total;
}

double w2_1d(const Measure& mu, const Measure& nu) {
  return w2_quantile(quantile_table(mu), quantile_table(nu));
}

std::vector<double> c_transform(std::span<const double> support,
                                std::span<const double> phi,
                                std::span<const double> query, std::size_t dim) {
  if (dim == 0 || support.size() != phi.size() * dim || query.size() % dim != 0) {
    throw InvalidArgument("c_transform: shape mismatch");
  }
  const std::size_t ny = phi.size();
  const std::size_t nx = query.size() / dim;
  std::vector<double> out(nx, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < nx; ++i) {
    const auto x = query.subspan(i * dim, dim);
    for (std::size_t j = 0; j < ny; ++j) {
      out[i] = std::min(out[i], squared_distance(x, support.subspan(j * dim, dim)) - phi[j]);
    }
  }
  return out;
}

}  // namespace wbary
