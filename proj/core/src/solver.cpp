#include "wbary/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "wbary/error.hpp"
#include "wbary/parallel.hpp"
#include "wbary/random.hpp"

namespace wbary {

void BarycenterProblem::check() const {
  if (measures.empty()) throw InvalidArgument("barycenter: no input measures");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InvalidArgument("barycenter: gamma must be finite and >= 0");
  }
  if (gamma > 0.0 && !penalty) throw InvalidArgument("barycenter: gamma > 0 needs a penalty");
  if (shape.size() != domain.dim()) {
    throw InvalidArgument("barycenter: grid shape does not match the domain dimension");
  }
  for (std::size_t s : shape) {
    if (s == 0) throw InvalidArgument("barycenter: empty grid axis");
  }
  for (const auto& m : measures) {
    if (m.dim() != domain.dim()) throw InvalidArgument("barycenter: measure dimension mismatch");
    if (m.size() == 0) throw InvalidArgument("barycenter: measure without atoms");
  }
}

double BarycenterProblem::floor() const { return penalty ? penalty->alpha() : 0.0; }

BarycenterObjective::BarycenterObjective(const BarycenterProblem& problem)
    : problem_(&problem) {
  problem.check();
  if (problem.domain.dim() != 1) return;
  const auto grid = GridDensity::uniform(problem.domain, problem.shape);
  centers_.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) centers_[k] = grid.cell_center(k)[0];
  const std::size_t n = problem.measures.size();
  sorted_points_.resize(n);
  sorted_weights_.resize(n);
  sorted_index_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = problem.measures[i];
    auto& order = sorted_index_[i];
    order.resize(m.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return m.points()[a] < m.points()[b];
    });
    for (std::size_t k : order) {
      sorted_points_[i].push_back(m.points()[k]);
      sorted_weights_[i].push_back(m.weight(k));
    }
  }
}

namespace {

DiscreteMeasure cell_atoms(const GridDensity& f) {
  std::vector<double> points;
  points.reserve(f.size() * f.dim());
  std::vector<double> weights(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const auto c = f.cell_center(k);
    points.insert(points.end(), c.begin(), c.end());
    weights[k] = f.values()[k] * f.cell_volume();
  }
  return DiscreteMeasure(f.dim(), std::move(points), std::move(weights));
}

void require_grid(const BarycenterProblem& p, const GridDensity& f) {
  if (f.shape() != p.shape || !(f.domain() == p.domain)) {
    throw InvalidArgument("barycenter: density is not on the problem grid");
  }
}

}  // namespace

double BarycenterObjective::transport_one(std::size_t i, std::span<const double> mass,
                                          std::span<double> phi) const {
  const auto& p = *problem_;
  if (p.domain.dim() == 1) {
    return w2_sorted_1d(centers_, mass, sorted_points_[i], sorted_weights_[i], phi);
  }
  const auto grid = GridDensity::uniform(p.domain, p.shape);
  std::vector<double> points;
  points.reserve(grid.size() * grid.dim());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto c = grid.cell_center(k);
    points.insert(points.end(), c.begin(), c.end());
  }
  const DiscreteMeasure source(grid.dim(), std::move(points),
                               std::vector<double>(mass.begin(), mass.end()));
  const auto cert = w2_exact(source, p.measures[i]);
  std::copy(cert.phi.begin(), cert.phi.end(), phi.begin());
  return cert.cost;
}

BarycenterObjective::Evaluation BarycenterObjective::evaluate(const GridDensity& f) const {
  const auto& p = *problem_;
  require_grid(p, f);
  const std::size_t n = p.measures.size();
  const std::size_t cells = f.size();
  std::vector<double> mass(cells);
  for (std::size_t k = 0; k < cells; ++k) mass[k] = f.values()[k] * f.cell_volume();

  std::vector<double> costs(n);
  std::vector<std::vector<double>> phis(n, std::vector<double>(cells));
  parallel_for(n, [&](std::size_t i) { costs[i] = transport_one(i, mass, phis[i]); });

  Evaluation ev;
  ev.subgradient.assign(cells, 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    ev.transport += costs[i];
    for (std::size_t k = 0; k < cells; ++k) ev.subgradient[k] += phis[i][k];
  }
  ev.transport *= inv_n;
  for (double& g : ev.subgradient) g *= inv_n;
  if (p.gamma > 0.0) {
    const auto value = eval(*p.penalty, f);
    if (!value) throw DomainViolation("barycenter: density outside the penalty domain");
    ev.penalty = *value;
    const auto g = grad(*p.penalty, f);
    for (std::size_t k = 0; k < cells; ++k) ev.subgradient[k] += p.gamma * g[k];
  }
  ev.value = ev.transport + p.gamma * ev.penalty;
  return ev;
}

double BarycenterObjective::value(const GridDensity& f) const {
  const auto& p = *problem_;
  if (p.gamma > 0.0 && !p.penalty->in_domain(f)) {
    return std::numeric_limits<double>::infinity();
  }
  return evaluate(f).value;
}

std::vector<TransportCertificate> BarycenterObjective::certificates(const GridDensity& f) const {
  const auto& p = *problem_;
  require_grid(p, f);
  const auto source = cell_atoms(f);
  std::vector<TransportCertificate> out(p.measures.size());
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = p.domain.dim() == 1 ? w2_monotone(source, p.measures[i])
                                 : w2_exact(source, p.measures[i]);
  });
  return out;
}

double objective(const BarycenterProblem& problem, const GridDensity& f) {
  return BarycenterObjective(problem).value(f);
}

std::vector<double> subgradient(const BarycenterProblem& problem, const GridDensity& f) {
  return BarycenterObjective(problem).evaluate(f).subgradient;
}

std::vector<double> project_simplex(std::span<const double> values, double floor,
                                    double cell_volume) {
  const std::size_t count = values.size();
  if (count == 0) throw InvalidArgument("project_simplex: empty grid");
  if (!(cell_volume > 0.0)) throw InvalidArgument("project_simplex: cell_volume must be > 0");
  if (!(floor >= 0.0)) throw InvalidArgument("project_simplex: floor must be >= 0");
  const double target = 1.0 / cell_volume;  // required sum of values
  const double floor_sum = floor * static_cast<double>(count);
  if (floor_sum > target * (1.0 + 1e-12)) {
    throw InvalidArgument("project_simplex: infeasible floor (alpha * cells * volume > 1)");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("project_simplex: non-finite value");
  }

  // out_k = max(floor, v_k - tau); with the j largest values above the floor,
  // tau = (sum of those j values + (count - j) floor - target) / j.
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double prefix = 0.0;
  double tau = sorted[0] - floor;
  for (std::size_t j = 1; j <= count; ++j) {
    prefix += sorted[j - 1];
    const double t =
        (prefix + static_cast<double>(count - j) * floor - target) / static_cast<double>(j);
    if (sorted[j - 1] - t > floor) tau = t;
  }
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = std::max(floor, values[k] - tau);
  return out;
}

GridDensity project_simplex(const GridDensity& grid, std::span<const double> values,
                            double floor) {
  if (values.size() != grid.size()) throw InvalidArgument("project_simplex: size mismatch");
  return grid.with_values(project_simplex(values, floor, grid.cell_volume()));
}

namespace {

GridDensity initial_density(const BarycenterProblem& problem, const SolverConfig& config) {
  const auto uniform = GridDensity::uniform(problem.domain, problem.shape);
  const double floor = problem.floor();
  if (config.init == Initialization::Uniform) {
    return project_simplex(uniform, uniform.values(), floor);
  }
  auto rng = make_stream(config.seed, 0);
  std::vector<double> values(uniform.size());
  for (double& v : values) v = 2.0 * uniform.values()[0] * uniform01(rng);
  return project_simplex(uniform, values, floor);
}

double l1_distance(const GridDensity& f, const GridDensity& g) {
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) s += std::abs(f.values()[k] - g.values()[k]);
  return s * f.cell_volume();
}

}  // namespace

BarycenterSolution solve(const BarycenterProblem& problem, const SolverConfig& config) {
  problem.check();
  if (!(problem.gamma > 0.0)) {
    throw InvalidArgument("solve: gamma must be > 0 (use barycenter_1d_exact for gamma = 0)");
  }
  if (config.max_iters == 0) throw InvalidArgument("solve: max_iters must be >= 1");
  if (!(config.tol > 0.0)) throw InvalidArgument("solve: tol must be > 0");
  if (config.step0 < 0.0) throw InvalidArgument("solve: step0 must be > 0");

  const BarycenterObjective objective(problem);
  const double floor = problem.floor();
  const double s0 = config.step0 > 0.0 ? config.step0 : std::pow(problem.domain.diameter(), 2);

  BarycenterSolution sol{initial_density(problem, config), {}, {}, false, 0};
  auto current = objective.evaluate(sol.density);
  sol.objective_trace.push_back(current.value);

  std::vector<double> prev_step;  // f_t - f_{t-1}
  std::vector<double> prev_grad;
  double bb_step = s0;
  std::vector<double> trial(sol.density.size());

  for (std::size_t t = 1; t <= config.max_iters; ++t) {
    double step = s0;
    if (config.step_rule == StepRule::Decaying) step = s0 / std::sqrt(static_cast<double>(t));
    if (config.step_rule == StepRule::Adaptive) step = bb_step;

    bool accepted = false;
    double movement = 0.0;
    std::optional<GridDensity> next;
    BarycenterObjective::Evaluation next_eval;
    for (std::size_t h = 0; h <= config.max_halvings; ++h, step *= 0.5) {
      for (std::size_t k = 0; k < trial.size(); ++k) {
        trial[k] = sol.density.values()[k] - step * current.subgradient[k];
      }
      auto candidate = project_simplex(sol.density, trial, floor);
      movement = l1_distance(candidate, sol.density);
      if (movement == 0.0) break;
      auto ev = objective.evaluate(candidate);
      if (ev.value <= current.value) {
        next = std::move(candidate);
        next_eval = std::move(ev);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No decrease along the projected arc down to the smallest step.
      sol.converged = movement < config.tol;
      break;
    }

    const double decrease = current.value - next_eval.value;
    const std::size_t cells = trial.size();
    std::vector<double> ds(cells);
    double ss = 0.0;
    double sy = 0.0;
    for (std::size_t k = 0; k < cells; ++k) {
      ds[k] = next->values()[k] - sol.density.values()[k];
      const double dy = next_eval.subgradient[k] - current.subgradient[k];
      ss += ds[k] * ds[k];
      sy += ds[k] * dy;
    }
    bb_step = sy > 0.0 ? std::clamp(ss / sy, 1e-12 * s0, 1e6 * s0) : std::min(2.0 * step, s0);

    sol.density = std::move(*next);
    current = std::move(next_eval);
    sol.objective_trace.push_back(current.value);
    sol.iterations = t;
    if (decrease < config.tol && movement < config.tol) {
      sol.converged = true;
      break;
    }
  }

  sol.density = sol.density.with_floor(floor);
  sol.certificates = objective.certificates(sol.density);
  return sol;
}

QuantileTable barycenter_1d_exact(const std::vector<QuantileTable>& tables) {
  if (tables.empty()) throw InvalidArgument("barycenter_1d_exact: no input measures");
  for (const auto& q : tables) {
    if (!q.well_formed()) throw InvalidArgument("barycenter_1d_exact: malformed quantile table");
  }
  std::vector<double> cuts;
  for (const auto& q : tables) cuts.insert(cuts.end(), q.breakpoints.begin(), q.breakpoints.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.front() = 0.0;
  cuts.back() = 1.0;

  auto value = [](const QuantileTable& q, std::size_t k, double t) {
    if (q.start[k] == q.end[k]) return q.start[k];
    const double t0 = q.breakpoints[k];
    const double t1 = q.breakpoints[k + 1];
    return q.start[k] + (q.end[k] - q.start[k]) * ((t - t0) / (t1 - t0));
  };

  const double inv_n = 1.0 / static_cast<double>(tables.size());
  QuantileTable out;
  out.breakpoints.push_back(0.0);
  std::vector<std::size_t> seg(tables.size(), 0);
  for (std::size_t c = 1; c < cuts.size(); ++c) {
    const double lo = cuts[c - 1];
    const double hi = cuts[c];
    double a = 0.0;
    double b = 0.0;
    for (std::size_t q = 0; q < tables.size(); ++q) {
      const auto& tq = tables[q];
      while (seg[q] + 1 < tq.segments() && tq.breakpoints[seg[q] + 1] <= lo) ++seg[q];
      a += value(tq, seg[q], lo);
      b += value(tq, seg[q], hi);
    }
    a *= inv_n;
    b *= inv_n;
    // Merge with the previous segment when both are the same step.
    if (!out.start.empty() && a == b && out.start.back() == a && out.end.back() == a) {
      out.breakpoints.back() = hi;
      continue;
    }
    out.start.push_back(a);
    out.end.push_back(b);
    out.breakpoints.push_back(hi);
  }
  return out;
}

QuantileTable barycenter_1d_exact(const std::vector<DiscreteMeasure>& measures) {
  std::vector<QuantileTable> tables;
  tables.reserve(measures.size());
  for (const auto& m : measures) {
    if (m.dim() != 1) throw InvalidArgument("barycenter_1d_exact needs 1-D measures");
    tables.push_back(quantile_table(m));
  }
  return barycenter_1d_exact(tables);
}

}  // namespace wbary
