#include "wbary/penalties.hpp"

#include <cmath>

#include "wbary/error.hpp"

namespace wbary {

namespace {

double integrand_value(Integrand g, double u) {
  if (g == Integrand::Quadratic) return 0.5 * u * u;
  return u * (std::log(u) - 1.0) + 1.0;
}

double integrand_slope(Integrand g, double u) {
  return g == Integrand::Quadratic ? u : std::log(u);
}

// G(a) - G(b) - G'(b)(a - b), written to avoid cancellation.
double integrand_divergence(Integrand g, double a, double b) {
  if (g == Integrand::Quadratic) return 0.5 * (a - b) * (a - b);
  return a * std::log(a / b) - a + b;
}

// (G'(a) - G'(b))(a - b).
double integrand_sym(Integrand g, double a, double b) {
  if (g == Integrand::Quadratic) return (a - b) * (a - b);
  return (a - b) * std::log(a / b);
}

void require_same_grid(const GridDensity& f, const GridDensity& g) {
  if (f.shape() != g.shape() || !(f.domain() == g.domain())) {
    throw InvalidArgument("penalty: densities live on different grids");
  }
}

void require_domain(const Penalty& p, const GridDensity& f, const char* op) {
  if (!p.in_domain(f)) {
    throw DomainViolation(std::string(op) + ": density outside the domain of the " + p.name() +
                          " penalty (floor " + std::to_string(p.alpha()) + ")");
  }
}

struct Stencil {
  std::vector<std::size_t> stride;
  std::vector<double> width;
  const std::vector<std::size_t>* shape;
};

Stencil make_stencil(const GridDensity& grid) {
  Stencil s;
  s.shape = &grid.shape();
  const std::size_t d = grid.dim();
  s.stride.assign(d, 1);
  s.width.resize(d);
  for (std::size_t a = d; a-- > 0;) {
    if (a + 1 < d) s.stride[a] = s.stride[a + 1] * grid.shape()[a + 1];
    s.width[a] = grid.cell_width(a);
  }
  return s;
}

// Forward difference along one axis; zero across the far boundary.
std::vector<double> forward_diff(const Stencil& s, std::size_t axis,
                                 const std::vector<double>& f) {
  const std::size_t stride = s.stride[axis];
  const std::size_t len = (*s.shape)[axis];
  const double inv_h = 1.0 / s.width[axis];
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    const std::size_t i = (idx / stride) % len;
    if (i + 1 < len) out[idx] = (f[idx + stride] - f[idx]) * inv_h;
  }
  return out;
}

// Matrix transpose of forward_diff.
std::vector<double> forward_diff_adjoint(const Stencil& s, std::size_t axis,
                                         const std::vector<double>& g) {
  const std::size_t stride = s.stride[axis];
  const std::size_t len = (*s.shape)[axis];
  const double inv_h = 1.0 / s.width[axis];
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const std::size_t i = (idx / stride) % len;
    double v = 0.0;
    if (i >= 1) v += g[idx - stride];
    if (i + 1 < len) v -= g[idx];
    out[idx] = v * inv_h;
  }
  return out;
}

// Every multi-index b with |b| <= order over dim axes.
std::vector<std::vector<int>> multi_indices(std::size_t dim, int order) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(dim, 0);
  auto rec = [&](auto&& self, std::size_t axis, int remaining) -> void {
    if (axis == dim) {
      out.push_back(cur);
      return;
    }
    for (int j = 0; j <= remaining; ++j) {
      cur[axis] = j;
      self(self, axis + 1, remaining - j);
    }
    cur[axis] = 0;
  };
  rec(rec, 0, order);
  return out;
}

std::vector<double> apply_derivative(const Stencil& s, const std::vector<int>& b,
                                     std::vector<double> f) {
  for (std::size_t a = 0; a < b.size(); ++a) {
    for (int r = 0; r < b[a]; ++r) f = forward_diff(s, a, f);
  }
  return f;
}

std::vector<double> apply_derivative_adjoint(const Stencil& s, const std::vector<int>& b,
                                             std::vector<double> g) {
  for (std::size_t a = b.size(); a-- > 0;) {
    for (int r = 0; r < b[a]; ++r) g = forward_diff_adjoint(s, a, g);
  }
  return g;
}

}  // namespace

Penalty::Penalty(PenaltyKind kind, Integrand integrand, double alpha, int order)
    : kind_(kind), integrand_(integrand), alpha_(alpha), order_(order) {}

Penalty Penalty::quadratic(double alpha) {
  if (!(alpha >= 0.0)) throw InvalidArgument("quadratic penalty needs alpha >= 0");
  return Penalty(PenaltyKind::Quadratic, Integrand::Quadratic, alpha, 0);
}

Penalty Penalty::entropy(double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("entropy penalty needs alpha > 0");
  return Penalty(PenaltyKind::Entropy, Integrand::Entropy, alpha, 0);
}

Penalty Penalty::sobolev(int order, double alpha, Integrand base) {
  if (order < 0) throw InvalidArgument("sobolev penalty needs order k >= 0");
  if (!(alpha > 0.0)) throw InvalidArgument("sobolev penalty needs alpha > 0");
  return Penalty(PenaltyKind::Sobolev, base, alpha, order);
}

std::string Penalty::name() const {
  switch (kind_) {
    case PenaltyKind::Quadratic:
      return "quadratic";
    case PenaltyKind::Entropy:
      return "entropy";
    case PenaltyKind::Sobolev:
      return "sobolev";
  }
  return "unknown";
}

bool Penalty::in_domain(const GridDensity& f) const {
  for (double v : f.values()) {
    if (!(v >= alpha_) || !std::isfinite(v)) return false;
    if (integrand_ == Integrand::Entropy && !(v > 0.0)) return false;
  }
  return true;
}

double inner(const GridDensity& grid, const std::vector<double>& u,
             const std::vector<double>& v) {
  if (u.size() != grid.size() || v.size() != grid.size()) {
    throw InvalidArgument("inner: grid function size mismatch");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * v[k];
  return s * grid.cell_volume();
}

double l2_distance_sq(const GridDensity& f, const GridDensity& g) {
  require_same_grid(f, g);
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double d = f.values()[k] - g.values()[k];
    s += d * d;
  }
  return s * f.cell_volume();
}

std::vector<double> sobolev_operator(const GridDensity& grid, const std::vector<double>& values,
                                     int order) {
  const auto s = make_stencil(grid);
  std::vector<double> out(values.size(), 0.0);
  for (const auto& b : multi_indices(grid.dim(), order)) {
    const auto term = apply_derivative_adjoint(s, b, apply_derivative(s, b, values));
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += term[k];
  }
  return out;
}

double sobolev_norm_sq(const GridDensity& grid, const std::vector<double>& values, int order) {
  const auto s = make_stencil(grid);
  double total = 0.0;
  for (const auto& b : multi_indices(grid.dim(), order)) {
    const auto d = apply_derivative(s, b, values);
    double part = 0.0;
    for (double x : d) part += x * x;
    total += part;
  }
  return total * grid.cell_volume();
}

PenaltyValue eval(const Penalty& penalty, const GridDensity& f) {
  if (!penalty.in_domain(f)) return std::nullopt;
  double total = 0.0;
  for (double v : f.values()) total += integrand_value(penalty.integrand(), v);
  total *= f.cell_volume();
  if (penalty.kind() == PenaltyKind::Sobolev) {
    total += sobolev_norm_sq(f, f.values(), penalty.order());
  }
  return total;
}

std::vector<double> grad(const Penalty& penalty, const GridDensity& f) {
  require_domain(penalty, f, "grad");
  std::vector<double> out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    out[k] = integrand_slope(penalty.integrand(), f.values()[k]);
  }
  if (penalty.kind() == PenaltyKind::Sobolev) {
    const auto s = sobolev_operator(f, f.values(), penalty.order());
    for (std::size_t k = 0; k < f.size(); ++k) out[k] += 2.0 * s[k];
  }
  return out;
}

double bregman_sym(const Penalty& penalty, const GridDensity& f, const GridDensity& g) {
  require_same_grid(f, g);
  require_domain(penalty, f, "bregman_sym");
  require_domain(penalty, g, "bregman_sym");
  double total = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    total += integrand_sym(penalty.integrand(), f.values()[k], g.values()[k]);
  }
  total *= f.cell_volume();
  if (penalty.kind() == PenaltyKind::Sobolev) {
    std::vector<double> diff(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) diff[k] = f.values()[k] - g.values()[k];
    total += 2.0 * sobolev_norm_sq(f, diff, penalty.order());
  }
  return total;
}

double bregman_nonsym(const Penalty& penalty, const GridDensity& f, const GridDensity& g) {
  require_same_grid(f, g);
  require_domain(penalty, f, "bregman_nonsym");
  require_domain(penalty, g, "bregman_nonsym");
  double total = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    total += integrand_divergence(penalty.integrand(), f.values()[k], g.values()[k]);
  }
  total *= f.cell_volume();
  if (penalty.kind() == PenaltyKind::Sobolev) {
    std::vector<double> diff(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) diff[k] = f.values()[k] - g.values()[k];
    total += sobolev_norm_sq(f, diff, penalty.order());
  }
  return total;
}

}  // namespace wbary
