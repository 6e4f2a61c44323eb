#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include "CLI11.hpp"
#include "config.hpp"
#include "io.hpp"
#include "json.hpp"
#include "wbary/error.hpp"
#include "wbary/experiments.hpp"
#include "wbary/parallel.hpp"
#include "wbary/transport.hpp"
#include "wbary/version.hpp"

namespace wbary::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct RunContext {
  std::vector<std::string> args;
  Clock::time_point start = Clock::now();
};

void write_manifest(const RunContext& ctx, const Config& cfg, std::uint64_t seed,
                    const std::vector<std::string>& outputs) {
  RunManifest m;
  m.argv = ctx.args;
  m.config_hash = "fnv1a64:" + cfg.hash();
  m.seed = seed;
  m.version = kVersion;
  m.wall_time_seconds = std::chrono::duration<double>(Clock::now() - ctx.start).count();
  m.outputs = outputs;
  write_text(manifest_path(outputs.front()), manifest_json(m));
}

Config load_config(const std::string& path) {
  return path.empty() ? Config() : Config::load(path);
}

Penalty penalty_from(const Config& cfg, const std::string& default_kind) {
  const std::string kind = cfg.text("penalty.kind", default_kind);
  try {
    if (kind == "quadratic") return Penalty::quadratic(cfg.number("penalty.alpha", 0.0));
    if (kind == "entropy") return Penalty::entropy(cfg.number("penalty.alpha", 1e-6));
    if (kind == "sobolev") {
      const double k = cfg.number("penalty.k", 1.0);
      if (k < 0 || k != std::floor(k)) {
        throw CliError("schema", "expected a nonnegative integer", cfg.file(), "penalty.k");
      }
      const std::string base = cfg.text("penalty.base", "quadratic");
      if (base != "quadratic" && base != "entropy") {
        throw CliError("schema", "expected quadratic or entropy", cfg.file(), "penalty.base");
      }
      return Penalty::sobolev(static_cast<int>(k), cfg.number("penalty.alpha", 1e-6),
                              base == "entropy" ? Integrand::Entropy : Integrand::Quadratic);
    }
  } catch (const InvalidArgument& e) {
    throw CliError("schema", e.what(), cfg.file(), "penalty.alpha");
  }
  throw CliError("schema", "expected quadratic, entropy or sobolev", cfg.file(), "penalty.kind");
}

SolverConfig solver_from(const Config& cfg) {
  SolverConfig s;
  s.max_iters = cfg.count("solver.max_iters", s.max_iters);
  s.tol = cfg.number("solver.tol", s.tol);
  if (!(s.tol > 0.0)) throw CliError("schema", "expected tol > 0", cfg.file(), "solver.tol");
  s.seed = cfg.seed("solver.seed", s.seed);
  s.step0 = cfg.number("solver.step0", s.step0);
  if (s.step0 < 0.0) throw CliError("schema", "expected step0 > 0", cfg.file(), "solver.step0");
  s.max_halvings = cfg.count("solver.max_halvings", s.max_halvings);
  const std::string rule = cfg.text("solver.step_rule", "adaptive");
  if (rule == "fixed") {
    s.step_rule = StepRule::Fixed;
  } else if (rule == "decaying") {
    s.step_rule = StepRule::Decaying;
  } else if (rule == "adaptive") {
    s.step_rule = StepRule::Adaptive;
  } else {
    throw CliError("schema", "expected fixed, decaying or adaptive", cfg.file(), "solver.step_rule");
  }
  const std::string init = cfg.text("solver.init", "uniform");
  if (init == "uniform") {
    s.init = Initialization::Uniform;
  } else if (init == "random") {
    s.init = Initialization::Random;
  } else {
    throw CliError("schema", "expected uniform or random", cfg.file(), "solver.init");
  }
  return s;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : "; ") + s;
  return out;
}

void require_valid(const Measure& m, const BoxDomain& domain, const std::string& file) {
  const auto result = validate(m, domain);
  if (!result.ok()) throw CliError("validation", join(result.violations), file);
}

// Box around the atoms, used when only the weights need checking.
BoxDomain bounding_box(const Measure& m) {
  if (const auto* g = std::get_if<GridDensity>(&m)) return g->domain();
  const auto& d = std::get<DiscreteMeasure>(m);
  std::vector<double> lo(d.dim(), std::numeric_limits<double>::infinity());
  std::vector<double> hi(d.dim(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t a = 0; a < d.dim(); ++a) {
      lo[a] = std::min(lo[a], d.point(i)[a]);
      hi[a] = std::max(hi[a], d.point(i)[a]);
    }
  }
  for (std::size_t a = 0; a < d.dim(); ++a) {
    lo[a] -= 1.0;
    hi[a] += 1.0;
  }
  return BoxDomain(lo, hi);
}

DiscreteMeasure as_discrete(const Measure& m) {
  if (const auto* d = std::get_if<DiscreteMeasure>(&m)) return *d;
  return grid_to_discrete(std::get<GridDensity>(m));
}

GridDensity as_grid(const Measure& m, const std::string& file) {
  if (const auto* g = std::get_if<GridDensity>(&m)) return *g;
  throw CliError("schema", "expected a grid density", file, "type");
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    write_text(out_path, text);
  }
}

BoxDomain domain_from(const Config& cfg, std::size_t dim) {
  const auto lo = cfg.numbers("domain.min", std::vector<double>(dim, 0.0));
  const auto hi = cfg.numbers("domain.max", std::vector<double>(dim, 1.0));
  if (lo.size() != dim) throw CliError("schema", "length differs from the measure dimension", cfg.file(), "domain.min");
  if (hi.size() != dim) throw CliError("schema", "length differs from the measure dimension", cfg.file(), "domain.max");
  try {
    return BoxDomain(lo, hi);
  } catch (const InvalidArgument& e) {
    throw CliError("schema", e.what(), cfg.file(), "domain.max");
  }
}

RandomMeasureModel model_from(const Config& cfg) {
  auto model = RandomMeasureModel::gaussian(cfg.count("model.cells", 128),
                                            cfg.number("model.mean", 0.5),
                                            cfg.number("model.sd", 0.15), cfg.seed("seed", 0));
  model.max_shift = cfg.number("model.max_shift", model.max_shift);
  model.max_log_scale = cfg.number("model.max_log_scale", model.max_log_scale);
  model.mix = cfg.number("model.mix", model.mix);
  if (!(model.mix >= 0.0 && model.mix <= 1.0)) {
    throw CliError("schema", "expected a weight in [0, 1]", cfg.file(), "model.mix");
  }
  return model;
}

struct Flags {
  std::string config;
  std::string out;
  // w2 / bregman / validate / sample
  std::string mu, nu, f, g, measure, method = "auto";
  std::size_t p = 0;
  // barycenter
  std::string measures;
  double gamma = 0.0, alpha = 0.0, tol = 0.0, step0 = 0.0;
  std::string penalty, base, step_rule, init;
  int k = 0;
  std::vector<std::size_t> grid;
  std::vector<double> domain_min, domain_max;
  std::size_t iters = 0, replicates = 0;
  std::uint64_t seed = 0;
  // experiment
  std::string kind;
  // replay
  std::string manifest;
};

int cmd_w2(const Flags& fl, const RunContext& ctx, std::ostream& out) {
  const auto mu = read_measure(fl.mu);
  const auto nu = read_measure(fl.nu);
  require_valid(mu, bounding_box(mu), fl.mu);
  require_valid(nu, bounding_box(nu), fl.nu);
  const std::size_t dmu = std::visit([](const auto& m) { return m.dim(); }, mu);
  const std::size_t dnu = std::visit([](const auto& m) { return m.dim(); }, nu);
  if (dmu != dnu) throw CliError("schema", "measures differ in dimension", fl.nu, "dim");

  json doc;
  const bool one_d = dmu == 1 && fl.method != "exact";
  if (fl.method == "1d" && dmu != 1) throw CliError("usage", "--method 1d needs 1-D measures");
  if (one_d) {
    doc["cost"] = w2_1d(mu, nu);
    doc["method"] = "quantile";
  } else {
    const auto a = as_discrete(mu);
    const auto b = as_discrete(nu);
    const auto cert = w2_exact(a, b);
    const auto report = check_certificate(cert, a, b);
    doc["cost"] = cert.cost;
    doc["method"] = "network_simplex";
    doc["certificate"] = {{"marginal_error", report.marginal_error},
                          {"min_dual_slack", report.min_dual_slack},
                          {"duality_gap", report.duality_gap},
                          {"ok", report.ok()}};
  }
  doc["distance"] = std::sqrt(std::max(0.0, doc["cost"].get<double>()));
  emit(doc.dump(2) + "\n", fl.out, out);
  if (!fl.out.empty()) write_manifest(ctx, Config(), 0, {fl.out});
  return 0;
}

int cmd_barycenter(const Flags& fl, const CLI::App& sub, const RunContext& ctx) {
  Config cfg = load_config(fl.config);
  if (sub.count("--gamma")) cfg.set("gamma", fl.gamma);
  if (sub.count("--penalty")) cfg.set("penalty.kind", fl.penalty);
  if (sub.count("--alpha")) cfg.set("penalty.alpha", fl.alpha);
  if (sub.count("--k")) cfg.set("penalty.k", fl.k);
  if (sub.count("--base")) cfg.set("penalty.base", fl.base);
  if (sub.count("--grid")) cfg.set("grid", fl.grid);
  if (sub.count("--domain-min")) cfg.set("domain.min", fl.domain_min);
  if (sub.count("--domain-max")) cfg.set("domain.max", fl.domain_max);
  if (sub.count("--iters")) cfg.set("solver.max_iters", fl.iters);
  if (sub.count("--tol")) cfg.set("solver.tol", fl.tol);
  if (sub.count("--seed")) cfg.set("solver.seed", fl.seed);
  if (sub.count("--step-rule")) cfg.set("solver.step_rule", fl.step_rule);
  if (sub.count("--step0")) cfg.set("solver.step0", fl.step0);
  if (sub.count("--init")) cfg.set("solver.init", fl.init);

  const auto named = read_measure_dir(fl.measures);
  const std::size_t dim = std::visit([](const auto& m) { return m.dim(); }, named.front().measure);
  const BoxDomain domain = domain_from(cfg, dim);
  auto shape = cfg.counts("grid", {128});
  if (shape.size() == 1 && dim > 1) shape.assign(dim, shape.front());
  if (shape.size() != dim) throw CliError("schema", "grid rank differs from the measure dimension", cfg.file(), "grid");

  BarycenterProblem problem;
  problem.domain = domain;
  problem.shape = shape;
  for (const auto& nm : named) {
    require_valid(nm.measure, domain, nm.file.string());
    problem.measures.push_back(as_discrete(nm.measure));
  }
  problem.gamma = cfg.number("gamma", 0.05);
  if (!(problem.gamma > 0.0)) throw CliError("schema", "expected gamma > 0", cfg.file(), "gamma");
  problem.penalty = penalty_from(cfg, "entropy");
  const auto config = solver_from(cfg);
  const double floor_mass = problem.floor() * GridDensity::uniform(domain, shape).cell_volume() *
                            static_cast<double>(GridDensity::uniform(domain, shape).size());
  if (floor_mass > 1.0) throw CliError("schema", "alpha * |domain| exceeds 1", cfg.file(), "penalty.alpha");

  const auto solution = solve(problem, config);
  std::filesystem::path trace = fl.out;
  trace.replace_extension(".trace.csv");
  write_text(fl.out, solution_json(solution));
  write_text(trace, trace_csv(solution));
  write_manifest(ctx, cfg, config.seed, {fl.out, trace.string()});
  if (!solution.converged) {
    throw CliError("numerical",
                   "no convergence within " + std::to_string(config.max_iters) +
                       " iterations; best iterate written with converged=false",
                   fl.out, "solver.max_iters", 2);
  }
  return 0;
}

int cmd_bregman(const Flags& fl, const CLI::App& sub, const RunContext& ctx, std::ostream& out) {
  Config cfg = load_config(fl.config);
  if (sub.count("--penalty")) cfg.set("penalty.kind", fl.penalty);
  if (sub.count("--alpha")) cfg.set("penalty.alpha", fl.alpha);
  if (sub.count("--k")) cfg.set("penalty.k", fl.k);
  if (sub.count("--base")) cfg.set("penalty.base", fl.base);
  const auto f = as_grid(read_measure(fl.f), fl.f);
  const auto g = as_grid(read_measure(fl.g), fl.g);
  if (f.shape() != g.shape() || !(f.domain() == g.domain())) {
    throw CliError("schema", "densities live on different grids", fl.g, "shape");
  }
  const auto penalty = penalty_from(cfg, "entropy");
  if (!penalty.in_domain(f)) throw CliError("domain", "density below the penalty floor", fl.f, "values");
  if (!penalty.in_domain(g)) throw CliError("domain", "density below the penalty floor", fl.g, "values");
  json doc;
  doc["penalty"] = penalty.name();
  doc["d_E"] = bregman_sym(penalty, f, g);
  doc["D_E_fg"] = bregman_nonsym(penalty, f, g);
  doc["D_E_gf"] = bregman_nonsym(penalty, g, f);
  emit(doc.dump(2) + "\n", fl.out, out);
  if (!fl.out.empty()) write_manifest(ctx, cfg, 0, {fl.out});
  return 0;
}

int cmd_sample(const Flags& fl, const RunContext& ctx) {
  const auto nu = as_grid(read_measure(fl.nu), fl.nu);
  require_valid(nu, nu.domain(), fl.nu);
  const auto sample = sample_empirical(nu, fl.p, fl.seed);
  write_text(fl.out, measure_json(sample));
  Config cfg;
  cfg.set("p", fl.p);
  cfg.set("seed", fl.seed);
  write_manifest(ctx, cfg, fl.seed, {fl.out});
  return 0;
}

int cmd_validate(const Flags& fl, const CLI::App& sub, std::ostream& out) {
  const auto m = read_measure(fl.measure);
  BoxDomain domain = bounding_box(m);
  if (const auto* g = std::get_if<GridDensity>(&m)) domain = g->domain();
  if (std::holds_alternative<DiscreteMeasure>(m) || sub.count("--domain-min") ||
      sub.count("--domain-max")) {
    Config cfg;
    if (sub.count("--domain-min")) cfg.set("domain.min", fl.domain_min);
    if (sub.count("--domain-max")) cfg.set("domain.max", fl.domain_max);
    domain = domain_from(cfg, std::visit([](const auto& x) { return x.dim(); }, m));
  }
  require_valid(m, domain, fl.measure);
  out << "ok\n";
  return 0;
}

int cmd_experiment(const Flags& fl, const CLI::App& sub, const RunContext& ctx, std::ostream& out) {
  Config cfg = load_config(fl.config);
  if (sub.count("--seed")) cfg.set("seed", fl.seed);
  if (sub.count("--replicates")) cfg.set("replicates", fl.replicates);
  const auto model = model_from(cfg);
  HarnessConfig h;
  h.solver = solver_from(cfg);
  h.replicates = cfg.count("replicates", h.replicates);
  h.reference_size = cfg.has("reference_size") ? cfg.count("reference_size", 1) : 0;

  ExperimentReport report;
  if (fl.kind == "stability") {
    report = stability_experiment(model, cfg.count("n", 8), cfg.count("p", 50),
                                  cfg.number("gamma", 0.1), penalty_from(cfg, "entropy"),
                                  cfg.numbers("scales", {1e-4, 1e-3, 1e-2, 1e-1}),
                                  cfg.count("instances", 100), h);
  } else if (fl.kind == "rate-variance") {
    report = rate_variance(model, cfg.number("gamma", 0.1), penalty_from(cfg, "entropy"),
                           cfg.counts("n_list", {4, 8, 16, 32, 64}), h);
  } else if (fl.kind == "rate-bias") {
    report = rate_bias(model, cfg.numbers("gamma_list", {1.0, 0.3, 0.1, 0.03, 0.01}),
                       penalty_from(cfg, "entropy"), h);
  } else if (fl.kind == "decompose") {
    Config with_default = cfg;
    if (!cfg.has("penalty.kind")) {
      with_default.set("penalty.kind", "sobolev");
    }
    report = decompose_error(model, cfg.count("n", 16), cfg.counts("p_list", {25, 100, 400}),
                             cfg.number("gamma", 0.1), penalty_from(with_default, "sobolev"), h);
  } else {
    throw CliError("usage", "unknown experiment " + fl.kind);
  }
  write_text(fl.out, report_csv(report));
  write_manifest(ctx, cfg, model.seed, {fl.out});
  for (const auto& s : report.slopes) {
    out << "slope " << s.metric << " " << format_double(s.slope) << " se "
        << format_double(s.std_error) << "\n";
  }
  for (const auto& c : report.checks) {
    out << "check " << c.name << " " << (c.passed ? "pass" : "fail") << "\n";
  }
  return 0;
}

int cmd_replay(const Flags& fl, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  const auto manifest = parse_manifest(read_text(fl.manifest), fl.manifest);
  auto args = manifest.argv;
  if (!args.empty() && args.front() == "replay") {
    throw CliError("schema", "manifest records a replay", fl.manifest, "argv");
  }
  if (sub.count("--out")) {
    bool replaced = false;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--out" && i + 1 < args.size()) {
        args[i + 1] = fl.out;
        replaced = true;
      } else if (args[i].rfind("--out=", 0) == 0) {
        args[i] = "--out=" + fl.out;
        replaced = true;
      }
    }
    if (!replaced) throw CliError("schema", "recorded command has no --out", fl.manifest, "argv");
  }
  return run(args, out, err);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunContext ctx;
  ctx.args = args;
  Flags fl;
  std::size_t threads = 0;

  CLI::App app{"Penalized Wasserstein barycenters and their statistical checks", "wbary"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--threads", threads, "Worker thread cap (default: WBARY_THREADS or all cores)");

  auto* w2 = app.add_subcommand("w2", "Squared 2-Wasserstein distance between two measures");
  w2->add_option("--mu", fl.mu, "Measure JSON")->required();
  w2->add_option("--nu", fl.nu, "Measure JSON")->required();
  w2->add_option("--method", fl.method, "auto, exact or 1d")
      ->check(CLI::IsMember({"auto", "exact", "1d"}));
  w2->add_option("--out", fl.out, "Result JSON (default: stdout)");

  auto* bary = app.add_subcommand("barycenter", "Penalized barycenter on a grid");
  bary->add_option("--measures", fl.measures, "Directory of measure JSON files")->required();
  bary->add_option("--config", fl.config, "Flat JSON config");
  bary->add_option("--gamma", fl.gamma);
  bary->add_option("--penalty", fl.penalty, "quadratic, entropy or sobolev");
  bary->add_option("--alpha", fl.alpha, "Density floor");
  bary->add_option("--k", fl.k, "Sobolev order");
  bary->add_option("--base", fl.base, "Sobolev integrand: quadratic or entropy");
  bary->add_option("--grid", fl.grid, "Cells per axis");
  bary->add_option("--domain-min", fl.domain_min);
  bary->add_option("--domain-max", fl.domain_max);
  bary->add_option("--iters", fl.iters);
  bary->add_option("--tol", fl.tol);
  bary->add_option("--seed", fl.seed);
  bary->add_option("--step-rule", fl.step_rule, "fixed, decaying or adaptive");
  bary->add_option("--step0", fl.step0);
  bary->add_option("--init", fl.init, "uniform or random");
  bary->add_option("--out", fl.out, "Solution JSON")->required();

  auto* breg = app.add_subcommand("bregman", "Bregman divergences between two grid densities");
  breg->add_option("--f", fl.f, "Grid density JSON")->required();
  breg->add_option("--g", fl.g, "Grid density JSON")->required();
  breg->add_option("--config", fl.config, "Flat JSON config");
  breg->add_option("--penalty", fl.penalty, "quadratic, entropy or sobolev");
  breg->add_option("--alpha", fl.alpha);
  breg->add_option("--k", fl.k);
  breg->add_option("--base", fl.base);
  breg->add_option("--out", fl.out, "Result JSON (default: stdout)");

  auto* exp = app.add_subcommand("experiment", "Monte-Carlo experiment to a CSV report");
  exp->add_option("kind", fl.kind, "stability, rate-variance, rate-bias or decompose")
      ->required()
      ->check(CLI::IsMember({"stability", "rate-variance", "rate-bias", "decompose"}));
  exp->add_option("--config", fl.config, "Flat JSON config");
  exp->add_option("--seed", fl.seed);
  exp->add_option("--replicates", fl.replicates);
  exp->add_option("--out", fl.out, "Report CSV")->required();

  auto* smp = app.add_subcommand("sample", "Empirical sample of a grid density");
  smp->add_option("--nu", fl.nu, "Grid density JSON")->required();
  smp->add_option("--p", fl.p, "Sample size")->required()->check(CLI::PositiveNumber);
  smp->add_option("--seed", fl.seed);
  smp->add_option("--out", fl.out, "Measure JSON")->required();

  auto* val = app.add_subcommand("validate", "Check a measure file against its invariants");
  val->add_option("--measure", fl.measure, "Measure JSON")->required();
  val->add_option("--domain-min", fl.domain_min);
  val->add_option("--domain-max", fl.domain_max);

  auto* rep = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  rep->add_option("--manifest", fl.manifest, "Manifest JSON")->required();
  rep->add_option("--out", fl.out, "Replace the recorded output path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::ostringstream ignored;
      return app.exit(e, out, ignored);
    }
    err << CliError("usage", e.what()).line() << "\n";
    return 1;
  }

  try {
    if (threads > 0) set_thread_limit(threads);
    if (w2->parsed()) return cmd_w2(fl, ctx, out);
    if (bary->parsed()) return cmd_barycenter(fl, *bary, ctx);
    if (breg->parsed()) return cmd_bregman(fl, *breg, ctx, out);
    if (exp->parsed()) return cmd_experiment(fl, *exp, ctx, out);
    if (smp->parsed()) return cmd_sample(fl, ctx);
    if (val->parsed()) return cmd_validate(fl, *val, out);
    if (rep->parsed()) return cmd_replay(fl, *rep, out, err);
    throw CliError("usage", "no subcommand");
  } catch (const CliError& e) {
    err << e.line() << "\n";
    return e.exit_code();
  } catch (const DomainViolation& e) {
    err << CliError("domain", e.what()).line() << "\n";
    return 1;
  } catch (const InvalidArgument& e) {
    err << CliError("invalid", e.what()).line() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << CliError("numerical", e.what(), "-", "-", 2).line() << "\n";
    return 2;
  }
}

}  // namespace wbary::cli
