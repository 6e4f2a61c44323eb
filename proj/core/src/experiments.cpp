#include "wbary/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wbary/error.hpp"
#include "wbary/parallel.hpp"
#include "wbary/random.hpp"
#include "wbary/transport.hpp"

namespace wbary {

RandomMeasureModel RandomMeasureModel::gaussian(std::size_t cells, double mean, double sd,
                                                std::uint64_t seed) {
  if (cells == 0) throw InvalidArgument("gaussian model needs cells >= 1");
  if (!(sd > 0.0)) throw InvalidArgument("gaussian model needs sd > 0");
  const double h = 1.0 / static_cast<double>(cells);
  auto phi = [&](double x) { return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0))); };
  std::vector<double> values(cells);
  double total = 0.0;
  for (std::size_t k = 0; k < cells; ++k) {
    values[k] = phi(static_cast<double>(k + 1) * h) - phi(static_cast<double>(k) * h);
    total += values[k];
  }
  for (double& v : values) v /= total * h;
  return RandomMeasureModel{GridDensity(BoxDomain::unit(1), {cells}, std::move(values)),
                            0.1, 0.2, 0.05, seed};
}

GridDensity RandomMeasureModel::draw(std::mt19937_64& rng) const {
  if (base.dim() != 1) throw InvalidArgument("RandomMeasureModel: base must be 1-D");
  const double shift = max_shift * (2.0 * uniform01(rng) - 1.0);
  const double scale = std::exp(max_log_scale * (2.0 * uniform01(rng) - 1.0));
  const double lo = base.domain().lower()[0];
  const double hi = base.domain().upper()[0];
  const double center = 0.5 * (lo + hi);
  const auto table = quantile_table(base);
  auto cdf = [&](double x) { return table.cdf(center + (x - center - shift) / scale); };

  const std::size_t cells = base.size();
  const double h = base.cell_width(0);
  const double z = cdf(hi) - cdf(lo);
  std::vector<double> values(cells);
  double left = cdf(lo);
  for (std::size_t k = 0; k < cells; ++k) {
    const double right = cdf(k + 1 == cells ? hi : lo + static_cast<double>(k + 1) * h);
    const double moved = z > 0.0 ? std::max(right - left, 0.0) / (z * h) : 0.0;
    values[k] = (1.0 - mix) * moved + mix / (hi - lo);
    left = right;
  }
  return base.with_values(std::move(values));
}

std::vector<GridDensity> RandomMeasureModel::draw(std::size_t count, std::mt19937_64& rng) const {
  std::vector<GridDensity> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(draw(rng));
  return out;
}

DiscreteMeasure sample_empirical(const GridDensity& nu, std::size_t p, std::mt19937_64& rng) {
  if (p == 0) throw InvalidArgument("sample_empirical needs p >= 1");
  const std::size_t d = nu.dim();
  std::vector<double> points;
  points.reserve(p * d);
  if (d == 1) {
    const auto table = quantile_table(nu);
    for (std::size_t j = 0; j < p; ++j) points.push_back(table.quantile(uniform01(rng)));
    return DiscreteMeasure::uniform(1, std::move(points));
  }
  std::vector<double> cumulative(nu.size());
  double total = 0.0;
  for (std::size_t k = 0; k < nu.size(); ++k) {
    total += std::max(nu.values()[k], 0.0);
    cumulative[k] = total;
  }
  if (!(total > 0.0)) throw InvalidArgument("sample_empirical: density has no mass");
  for (std::size_t j = 0; j < p; ++j) {
    const double u = uniform01(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    const auto cell = nu.unravel(static_cast<std::size_t>(it - cumulative.begin()));
    for (std::size_t a = 0; a < d; ++a) {
      const double w = nu.cell_width(a);
      points.push_back(nu.domain().lower()[a] +
                       (static_cast<double>(cell[a]) + uniform01(rng)) * w);
    }
  }
  return DiscreteMeasure::uniform(d, std::move(points));
}

DiscreteMeasure sample_empirical(const GridDensity& nu, std::size_t p, std::uint64_t seed) {
  auto rng = make_stream(seed, 0);
  return sample_empirical(nu, p, rng);
}

double k_functional(const GridDensity& nu) {
  if (nu.dim() != 1) throw InvalidArgument("k_functional needs a 1-D density");
  const double h = nu.cell_width(0);
  double total = 0.0;
  for (double v : nu.values()) total += std::max(v, 0.0) * h;
  if (!(total > 0.0)) throw InvalidArgument("k_functional: density has no mass");
  // On a cell with constant density f, F is linear and dx = dF / f, so the
  // cell contributes (1 / f^2) * int_{F0}^{F1} u (1 - u) du.
  auto g = [](double u) { return u * u / 2.0 - u * u * u / 3.0; };
  double k_value = 0.0;
  double f0 = 0.0;
  for (double v : nu.values()) {
    const double f = std::max(v, 0.0) / total;
    const double f1 = std::min(1.0, f0 + f * h);
    if (f > 0.0) k_value += (g(f1) - g(f0)) / (f * f);
    f0 = f1;
  }
  return k_value;
}

StabilityCheck check_stability(const std::vector<DiscreteMeasure>& nus,
                               const std::vector<DiscreteMeasure>& etas, double gamma,
                               const Penalty& penalty, const BoxDomain& domain,
                               const std::vector<std::size_t>& shape,
                               const SolverConfig& config) {
  if (!(gamma > 0.0)) throw InvalidArgument("check_stability needs gamma > 0");
  if (nus.size() != etas.size() || nus.empty()) {
    throw InvalidArgument("check_stability needs two lists of the same positive length");
  }
  const BarycenterProblem pn{nus, gamma, penalty, domain, shape};
  const BarycenterProblem pe{etas, gamma, penalty, domain, shape};
  const auto sn = solve(pn, config);
  const auto se = solve(pe, config);
  StabilityCheck out;
  out.lhs = bregman_sym(penalty, sn.density, se.density);
  out.rhs = 2.0 / gamma * assignment_distance(nus, etas).value;
  out.holds = out.lhs <= out.rhs + 10.0 * config.tol;
  out.converged = sn.converged && se.converged;
  return out;
}

SlopeFit fit_loglog(const std::string& metric, const std::vector<double>& x,
                    const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgument("fit_loglog needs at least two (x, y) pairs");
  }
  const std::size_t k = x.size();
  std::vector<double> lx(k);
  std::vector<double> ly(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("fit_loglog needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(k);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(k);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit_loglog needs distinct x values");
  SlopeFit fit;
  fit.metric = metric;
  fit.points = k;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (k > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double r = ly[i] - fit.intercept - fit.slope * lx[i];
      rss += r * r;
    }
    fit.std_error = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
  } else {
    fit.std_error = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

const SlopeFit& ExperimentReport::slope(const std::string& metric) const {
  for (const auto& s : slopes) {
    if (s.metric == metric) return s;
  }
  throw InvalidArgument("report has no slope for " + metric);
}

bool ExperimentReport::check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c.passed;
  }
  throw InvalidArgument("report has no check named " + name);
}

std::vector<double> ExperimentReport::values(const std::string& metric) const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.metric == metric) out.push_back(r.value);
  }
  return out;
}

Penalty decomposition_penalty(double alpha) {
  return Penalty::sobolev(1, alpha, Integrand::Quadratic);
}

namespace {

std::vector<DiscreteMeasure> atoms_of(const std::vector<GridDensity>& densities) {
  std::vector<DiscreteMeasure> out;
  out.reserve(densities.size());
  for (const auto& d : densities) out.push_back(grid_to_discrete(d));
  return out;
}

GridDensity solve_on(const RandomMeasureModel& model, std::vector<DiscreteMeasure> measures,
                     double gamma, const Penalty& penalty, const SolverConfig& config,
                     bool* converged = nullptr) {
  const BarycenterProblem problem{std::move(measures), gamma, penalty, model.base.domain(),
                                  model.base.shape()};
  auto sol = solve(problem, config);
  if (converged) *converged = sol.converged;
  return std::move(sol.density);
}

// Grid version of the unpenalized barycenter of absolutely continuous draws:
// cell masses of the average of their exact quantile functions, lifted onto
// the penalty floor when some cell falls below it.
GridDensity zero_penalty_density(const RandomMeasureModel& model,
                                 const std::vector<GridDensity>& draws, const Penalty& penalty,
                                 QuantileTable* table_out) {
  std::vector<QuantileTable> tables;
  tables.reserve(draws.size());
  for (const auto& d : draws) tables.push_back(quantile_table(d));
  auto table = barycenter_1d_exact(tables);
  auto grid = quantile_to_grid(table, model.base.domain(), model.base.size());
  if (!penalty.in_domain(grid)) grid = project_simplex(grid, grid.values(), penalty.alpha());
  if (table_out) *table_out = std::move(table);
  return grid;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

ExperimentReport stability_experiment(const RandomMeasureModel& model, std::size_t n,
                                      std::size_t p, double gamma, const Penalty& penalty,
                                      const std::vector<double>& scales,
                                      std::size_t instances, const HarnessConfig& config) {
  if (n == 0 || p == 0 || instances == 0 || scales.empty()) {
    throw InvalidArgument("stability_experiment needs n, p, instances >= 1 and scales");
  }
  const double lo = model.base.domain().lower()[0];
  const double hi = model.base.domain().upper()[0];
  std::vector<StabilityCheck> results(instances);
  parallel_for(instances, [&](std::size_t k) {
    auto rng = make_stream(model.seed, k);
    const double scale = scales[k % scales.size()];
    std::vector<DiscreteMeasure> nus;
    std::vector<DiscreteMeasure> etas;
    for (std::size_t i = 0; i < n; ++i) {
      nus.push_back(sample_empirical(model.draw(rng), p, rng));
      auto moved = nus.back().points();
      for (double& x : moved) x = std::clamp(x + scale * (2.0 * uniform01(rng) - 1.0), lo, hi);
      etas.emplace_back(1, std::move(moved), nus.back().weights());
    }
    std::reverse(etas.begin(), etas.end());
    results[k] = check_stability(nus, etas, gamma, penalty, model.base.domain(),
                                 model.base.shape(), config.solver);
  });

  ExperimentReport report;
  report.experiment = "stability";
  std::size_t held = 0;
  bool all_converged = true;
  for (std::size_t k = 0; k < instances; ++k) {
    const auto& r = results[k];
    const long rep = static_cast<long>(k);
    report.rows.push_back({"stability", n, p, gamma, rep, "scale", scales[k % scales.size()]});
    report.rows.push_back({"stability", n, p, gamma, rep, "lhs", r.lhs});
    report.rows.push_back({"stability", n, p, gamma, rep, "rhs", r.rhs});
    report.rows.push_back({"stability", n, p, gamma, rep, "holds", r.holds ? 1.0 : 0.0});
    report.rows.push_back({"stability", n, p, gamma, rep, "converged", r.converged ? 1.0 : 0.0});
    held += r.holds ? 1 : 0;
    all_converged = all_converged && r.converged;
  }
  report.rows.push_back({"stability", n, p, gamma, -1, "holds_fraction",
                         static_cast<double>(held) / static_cast<double>(instances)});
  report.checks.push_back({"bound_holds_all", held == instances});
  report.checks.push_back({"all_converged", all_converged});
  return report;
}

ExperimentReport rate_variance(const RandomMeasureModel& model, double gamma,
                               const Penalty& penalty, const std::vector<std::size_t>& n_list,
                               const HarnessConfig& config) {
  if (n_list.size() < 2 || config.replicates == 0) {
    throw InvalidArgument("rate_variance needs at least two n values and one replicate");
  }
  const std::size_t n_max = *std::max_element(n_list.begin(), n_list.end());
  if (n_list.front() == 0) throw InvalidArgument("rate_variance needs n >= 1");
  const std::size_t n_ref = config.reference_size > 0 ? config.reference_size : 10 * n_max;

  auto ref_rng = make_stream(model.seed, 0);
  bool ref_converged = false;
  const auto reference = solve_on(model, atoms_of(model.draw(n_ref, ref_rng)), gamma, penalty,
                                  config.solver, &ref_converged);

  const std::size_t reps = config.replicates;
  const std::size_t jobs = n_list.size() * reps;
  std::vector<double> d_e(jobs);
  std::vector<char> converged(jobs);
  parallel_for(jobs, [&](std::size_t job) {
    auto rng = make_stream(model.seed, 1 + job);
    bool ok = false;
    const auto f = solve_on(model, atoms_of(model.draw(n_list[job / reps], rng)), gamma,
                            penalty, config.solver, &ok);
    d_e[job] = bregman_sym(penalty, f, reference);
    converged[job] = ok ? 1 : 0;
  });

  ExperimentReport report;
  report.experiment = "rate-variance";
  std::vector<double> xs;
  std::vector<double> mean_sq;
  std::vector<double> mean_plain;
  bool all_converged = ref_converged;
  for (std::size_t a = 0; a < n_list.size(); ++a) {
    const std::size_t n = n_list[a];
    std::vector<double> sq;
    std::vector<double> plain;
    for (std::size_t r = 0; r < reps; ++r) {
      const std::size_t job = a * reps + r;
      const long rep = static_cast<long>(r);
      report.rows.push_back({"rate-variance", n, 0, gamma, rep, "d_E", d_e[job]});
      report.rows.push_back({"rate-variance", n, 0, gamma, rep, "d_E_sq", d_e[job] * d_e[job]});
      report.rows.push_back({"rate-variance", n, 0, gamma, rep, "converged",
                             static_cast<double>(converged[job])});
      plain.push_back(d_e[job]);
      sq.push_back(d_e[job] * d_e[job]);
      all_converged = all_converged && converged[job];
    }
    xs.push_back(static_cast<double>(n));
    mean_plain.push_back(mean(plain));
    mean_sq.push_back(mean(sq));
    report.rows.push_back({"rate-variance", n, 0, gamma, -1, "mean_d_E", mean_plain.back()});
    report.rows.push_back({"rate-variance", n, 0, gamma, -1, "mean_d_E_sq", mean_sq.back()});
  }
  report.slopes.push_back(fit_loglog("mean_d_E_sq", xs, mean_sq));
  report.slopes.push_back(fit_loglog("mean_d_E", xs, mean_plain));
  for (const auto& s : report.slopes) {
    report.rows.push_back({"rate-variance", 0, 0, gamma, -1, s.metric + "_slope", s.slope});
    report.rows.push_back({"rate-variance", 0, 0, gamma, -1, s.metric + "_slope_se", s.std_error});
  }
  report.checks.push_back({"all_converged", all_converged});
  return report;
}

ExperimentReport rate_bias(const RandomMeasureModel& model, const std::vector<double>& gamma_list,
                           const Penalty& penalty, const HarnessConfig& config) {
  if (gamma_list.empty()) throw InvalidArgument("rate_bias needs at least one gamma");
  for (double g : gamma_list) {
    if (!(g > 0.0)) throw InvalidArgument("rate_bias needs gamma > 0");
  }
  std::vector<double> gammas = gamma_list;
  std::sort(gammas.begin(), gammas.end(), std::greater<>());
  const std::size_t n_ref = config.reference_size > 0 ? config.reference_size : 640;

  auto rng = make_stream(model.seed, 0);
  const auto draws = model.draw(n_ref, rng);
  const auto measures = atoms_of(draws);
  QuantileTable table0;
  const auto f0 = zero_penalty_density(model, draws, penalty, &table0);
  const auto e0 = eval(penalty, f0);
  if (!e0) throw InternalError("rate_bias: reference density outside the penalty domain");

  std::vector<GridDensity> solutions(gammas.size(), f0);
  std::vector<char> converged(gammas.size());
  parallel_for(gammas.size(), [&](std::size_t k) {
    bool ok = false;
    solutions[k] = solve_on(model, measures, gammas[k], penalty, config.solver, &ok);
    converged[k] = ok ? 1 : 0;
  });

  ExperimentReport report;
  report.experiment = "rate-bias";
  const double slack = 10.0 * config.solver.tol;
  std::vector<double> w2s;
  std::vector<double> des;
  bool energy_ok = true;
  bool all_converged = true;
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    const auto& f = solutions[k];
    const double w2 =
        std::sqrt(std::max(0.0, w2_quantile(quantile_table(grid_to_discrete(f)), table0)));
    const double de = bregman_nonsym(penalty, f, f0);
    const double e = *eval(penalty, f);
    w2s.push_back(w2);
    des.push_back(de);
    energy_ok = energy_ok && e <= *e0 + slack;
    all_converged = all_converged && converged[k];
    const double g = gammas[k];
    report.rows.push_back({"rate-bias", n_ref, 0, g, 0, "W2", w2});
    report.rows.push_back({"rate-bias", n_ref, 0, g, 0, "D_E", de});
    report.rows.push_back({"rate-bias", n_ref, 0, g, 0, "E", e});
    report.rows.push_back({"rate-bias", n_ref, 0, g, 0, "E0", *e0});
    report.rows.push_back({"rate-bias", n_ref, 0, g, 0, "converged",
                           static_cast<double>(converged[k])});
  }
  auto nonincreasing = [&](const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k) {
      if (v[k] > v[k - 1] + slack) return false;
    }
    return true;
  };
  report.checks.push_back({"W2_decreasing", nonincreasing(w2s)});
  report.checks.push_back({"D_E_decreasing", nonincreasing(des)});
  report.checks.push_back({"W2_below_3_cell_width", w2s.back() <= 3.0 * model.base.cell_width(0)});
  report.checks.push_back({"E_below_E0", energy_ok});
  report.checks.push_back({"all_converged", all_converged});
  return report;
}

ExperimentReport decompose_error(const RandomMeasureModel& model, std::size_t n,
                                 const std::vector<std::size_t>& p_list, double gamma,
                                 const Penalty& penalty, const HarnessConfig& config) {
  if (n == 0 || p_list.empty() || config.replicates == 0) {
    throw InvalidArgument("decompose_error needs n >= 1, p values and one replicate");
  }
  const std::size_t n_ref = config.reference_size > 0 ? config.reference_size : 10 * n;

  auto ref_rng = make_stream(model.seed, 0);
  const auto ref_draws = model.draw(n_ref, ref_rng);
  bool ref_converged = false;
  const auto f_ref =
      solve_on(model, atoms_of(ref_draws), gamma, penalty, config.solver, &ref_converged);
  const auto f0 = zero_penalty_density(model, ref_draws, penalty, nullptr);
  const double bias = bregman_nonsym(penalty, f_ref, f0);

  struct Replicate {
    double variance = 0.0;  // d_E(mu_{P_n}, mu_P)^2
    double mean_k = 0.0;
    std::vector<double> stability;  // per p: d_E(hat mu_{n,p}, mu_{P_n})^2
    std::vector<double> error;      // per p: ||hat f - f0||^2
    bool converged = true;
  };
  const std::size_t reps = config.replicates;
  std::vector<Replicate> results(reps);
  parallel_for(reps, [&](std::size_t r) {
    auto rng = make_stream(model.seed, 1 + r);
    auto& out = results[r];
    const auto nus = model.draw(n, rng);
    for (const auto& nu : nus) out.mean_k += k_functional(nu);
    out.mean_k /= static_cast<double>(n);
    bool ok = false;
    const auto f_n = solve_on(model, atoms_of(nus), gamma, penalty, config.solver, &ok);
    out.converged = ok;
    const double dv = bregman_sym(penalty, f_n, f_ref);
    out.variance = dv * dv;
    for (const std::size_t p : p_list) {
      std::vector<DiscreteMeasure> samples;
      for (const auto& nu : nus) samples.push_back(sample_empirical(nu, p, rng));
      const auto f_hat = solve_on(model, std::move(samples), gamma, penalty, config.solver, &ok);
      out.converged = out.converged && ok;
      const double ds = bregman_sym(penalty, f_hat, f_n);
      out.stability.push_back(ds * ds);
      out.error.push_back(l2_distance_sq(f_hat, f0));
    }
  });

  ExperimentReport report;
  report.experiment = "decompose";
  bool all_converged = ref_converged;
  std::vector<double> var_samples;
  std::vector<double> k_samples;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto& res = results[r];
    const long rep = static_cast<long>(r);
    report.rows.push_back({"decompose", n, 0, gamma, rep, "variance", res.variance});
    report.rows.push_back({"decompose", n, 0, gamma, rep, "mean_K", res.mean_k});
    for (std::size_t a = 0; a < p_list.size(); ++a) {
      report.rows.push_back({"decompose", n, p_list[a], gamma, rep, "stability", res.stability[a]});
      report.rows.push_back({"decompose", n, p_list[a], gamma, rep, "error", res.error[a]});
    }
    var_samples.push_back(res.variance);
    k_samples.push_back(res.mean_k);
    all_converged = all_converged && res.converged;
  }
  const double var = mean(var_samples);
  const double mean_k = mean(k_samples);
  report.rows.push_back({"decompose", n, 0, gamma, -1, "variance", var});
  report.rows.push_back({"decompose", n, 0, gamma, -1, "bias", bias});
  report.rows.push_back({"decompose", n, 0, gamma, -1, "mean_K", mean_k});

  bool decomposition_ok = true;
  bool bound_ok = true;
  std::vector<double> ps;
  std::vector<double> stabs;
  for (std::size_t a = 0; a < p_list.size(); ++a) {
    std::vector<double> s;
    std::vector<double> e;
    for (const auto& res : results) {
      s.push_back(res.stability[a]);
      e.push_back(res.error[a]);
    }
    const double stab = mean(s);
    const double err = mean(e);
    const double rhs = 3.0 * std::sqrt(stab) + 3.0 * std::sqrt(var) + 6.0 * bias;
    const double p = static_cast<double>(p_list[a]);
    const double k_bound = 8.0 / (gamma * gamma) * mean_k / p;
    decomposition_ok = decomposition_ok && err <= rhs;
    bound_ok = bound_ok && stab <= k_bound;
    ps.push_back(p);
    stabs.push_back(stab);
    const std::size_t pk = p_list[a];
    report.rows.push_back({"decompose", n, pk, gamma, -1, "stability", stab});
    report.rows.push_back({"decompose", n, pk, gamma, -1, "error", err});
    report.rows.push_back({"decompose", n, pk, gamma, -1, "decomposition_bound", rhs});
    report.rows.push_back({"decompose", n, pk, gamma, -1, "stability_K_bound", k_bound});
  }
  if (ps.size() >= 2) {
    report.slopes.push_back(fit_loglog("stability", ps, stabs));
    const auto& s = report.slopes.back();
    report.rows.push_back({"decompose", n, 0, gamma, -1, "stability_slope", s.slope});
    report.rows.push_back({"decompose", n, 0, gamma, -1, "stability_slope_se", s.std_error});
  }
  report.checks.push_back({"decomposition_holds", decomposition_ok});
  report.checks.push_back({"stability_K_bound_holds", bound_ok});
  report.checks.push_back({"all_converged", all_converged});
  return report;
}

}  // namespace wbary
