#include "wbary/measures.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "wbary/constants.hpp"
#include "wbary/error.hpp"

namespace wbary {

namespace {

std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_point(std::span<const double> x) {
  std::string out = "(";
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (k > 0) out += ", ";
    out += shortest(x[k]);
  }
  return out + ")";
}

// Containment with a rounding-level slack relative to the box extent.
bool inside(const BoxDomain& domain, std::span<const double> x) {
  for (std::size_t k = 0; k < domain.dim(); ++k) {
    const double slack = 1e-12 * domain.extent(k);
    if (!(x[k] >= domain.lower()[k] - slack && x[k] <= domain.upper()[k] + slack)) {
      return false;
    }
  }
  return true;
}

}  // namespace

BoxDomain::BoxDomain(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.empty() || lower_.size() != upper_.size()) {
    throw InvalidArgument("box domain needs matching non-empty bounds");
  }
  for (std::size_t k = 0; k < lower_.size(); ++k) {
    if (!(lower_[k] < upper_[k]) || !std::isfinite(lower_[k]) ||
        !std::isfinite(upper_[k])) {
      throw InvalidArgument("box domain axis " + std::to_string(k) +
                            " needs lower < upper");
    }
  }
}

BoxDomain BoxDomain::unit(std::size_t dim) {
  return BoxDomain(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

double BoxDomain::diameter() const {
  double s = 0.0;
  for (std::size_t k = 0; k < dim(); ++k) s += extent(k) * extent(k);
  return std::sqrt(s);
}

bool BoxDomain::contains(std::span<const double> x) const {
  return x.size() == dim() && inside(*this, x);
}

DiscreteMeasure::DiscreteMeasure(std::size_t dim, std::vector<double> points,
                                 std::vector<double> weights)
    : dim_(dim), points_(std::move(points)), weights_(std::move(weights)) {
  if (dim_ == 0) throw InvalidArgument("discrete measure needs dim >= 1");
  if (weights_.empty()) throw InvalidArgument("discrete measure needs m >= 1 atoms");
  if (points_.size() != weights_.size() * dim_) {
    throw InvalidArgument("discrete measure: points/weights shape mismatch");
  }
}

DiscreteMeasure DiscreteMeasure::dirac(std::vector<double> x) {
  const std::size_t d = x.size();
  return DiscreteMeasure(d, std::move(x), {1.0});
}

DiscreteMeasure DiscreteMeasure::uniform(std::size_t dim, std::vector<double> points) {
  if (dim == 0 || points.size() % dim != 0 || points.empty()) {
    throw InvalidArgument("uniform discrete measure: bad point array");
  }
  const std::size_t m = points.size() / dim;
  return DiscreteMeasure(dim, std::move(points),
                         std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

std::vector<double> DiscreteMeasure::mean() const {
  std::vector<double> out(dim_, 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t k = 0; k < dim_; ++k) out[k] += weights_[i] * points_[i * dim_ + k];
  }
  return out;
}

GridDensity::GridDensity(BoxDomain domain, std::vector<std::size_t> shape,
                         std::vector<double> values)
    : domain_(std::move(domain)), shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_.size() != domain_.dim()) {
    throw InvalidArgument("grid density: shape rank differs from domain dimension");
  }
  std::size_t count = 1;
  cell_volume_ = 1.0;
  for (std::size_t k = 0; k < shape_.size(); ++k) {
    if (shape_[k] == 0) throw InvalidArgument("grid density: zero-sized axis");
    count *= shape_[k];
    cell_volume_ *= domain_.extent(k) / static_cast<double>(shape_[k]);
  }
  if (count != values_.size()) {
    throw InvalidArgument("grid density: expected " + std::to_string(count) +
                          " values, got " + std::to_string(values_.size()));
  }
}

GridDensity GridDensity::uniform(BoxDomain domain, std::vector<std::size_t> shape) {
  double volume = 1.0;
  std::size_t count = 1;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    volume *= domain.extent(k);
    count *= shape[k];
  }
  return GridDensity(std::move(domain), std::move(shape),
                     std::vector<double>(count, 1.0 / volume));
}

double GridDensity::cell_width(std::size_t axis) const {
  return domain_.extent(axis) / static_cast<double>(shape_[axis]);
}

double GridDensity::max_cell_width() const {
  double w = 0.0;
  for (std::size_t k = 0; k < dim(); ++k) w = std::max(w, cell_width(k));
  return w;
}

std::vector<std::size_t> GridDensity::unravel(std::size_t flat_index) const {
  std::vector<std::size_t> idx(dim());
  for (std::size_t k = dim(); k-- > 0;) {
    idx[k] = flat_index % shape_[k];
    flat_index /= shape_[k];
  }
  return idx;
}

std::vector<double> GridDensity::cell_center(std::size_t flat_index) const {
  const auto idx = unravel(flat_index);
  std::vector<double> x(dim());
  for (std::size_t k = 0; k < dim(); ++k) {
    x[k] = domain_.lower()[k] + (static_cast<double>(idx[k]) + 0.5) * cell_width(k);
  }
  return x;
}

double GridDensity::mass() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) * cell_volume_;
}

GridDensity GridDensity::with_floor(double alpha) const {
  GridDensity out = *this;
  out.floor_ = alpha;
  return out;
}

GridDensity GridDensity::with_values(std::vector<double> values) const {
  return GridDensity(domain_, shape_, std::move(values));
}

double QuantileTable::quantile(double t) const {
  if (start.empty()) throw InvalidArgument("empty quantile table");
  if (t <= breakpoints.front()) return start.front();
  if (t >= breakpoints.back()) return end.back();
  // First breakpoint >= t closes the segment containing t (left-continuity).
  const auto it = std::lower_bound(breakpoints.begin() + 1, breakpoints.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - breakpoints.begin()) - 1;
  const double t0 = breakpoints[k];
  const double t1 = breakpoints[k + 1];
  if (start[k] == end[k]) return start[k];
  return start[k] + (end[k] - start[k]) * (t - t0) / (t1 - t0);
}

double QuantileTable::cdf(double x) const {
  if (start.empty()) throw InvalidArgument("empty quantile table");
  // Last segment whose start is <= x.
  const auto it = std::upper_bound(start.begin(), start.end(), x);
  if (it == start.begin()) return 0.0;
  const std::size_t k = static_cast<std::size_t>(it - start.begin()) - 1;
  if (end[k] <= x) return breakpoints[k + 1];
  const double t0 = breakpoints[k];
  const double t1 = breakpoints[k + 1];
  return t0 + (t1 - t0) * (x - start[k]) / (end[k] - start[k]);
}

bool QuantileTable::well_formed() const {
  const std::size_t k = start.size();
  if (k == 0 || end.size() != k || breakpoints.size() != k + 1) return false;
  if (breakpoints.front() != 0.0 || breakpoints.back() != 1.0) return false;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(breakpoints[i] < breakpoints[i + 1])) return false;
    if (!(start[i] <= end[i])) return false;
    if (i + 1 < k && !(end[i] <= start[i + 1])) return false;
  }
  return true;
}

ValidationResult validate(const DiscreteMeasure& measure, const BoxDomain& domain) {
  ValidationResult result;
  if (measure.dim() != domain.dim()) {
    result.violations.push_back("dimension " + std::to_string(measure.dim()) +
                                " differs from domain dimension " +
                                std::to_string(domain.dim()));
    return result;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    const double w = measure.weight(i);
    if (!std::isfinite(w) || w < 0.0) {
      result.violations.push_back("negative weight " + shortest(w) + " at atom " +
                                  std::to_string(i));
    }
    sum += w;
  }
  if (!(std::abs(sum - 1.0) <= tol::kMass)) {
    result.violations.push_back("weights sum to " + shortest(sum));
  }
  for (std::size_t i = 0; i < measure.size(); ++i) {
    if (!inside(domain, measure.point(i))) {
      result.violations.push_back("support outside domain: atom " + std::to_string(i) +
                                  " at " + format_point(measure.point(i)));
      break;
    }
  }
  return result;
}

ValidationResult validate(const GridDensity& density, const BoxDomain& domain) {
  ValidationResult result;
  if (density.dim() != domain.dim()) {
    result.violations.push_back("dimension " + std::to_string(density.dim()) +
                                " differs from domain dimension " +
                                std::to_string(domain.dim()));
    return result;
  }
  for (std::size_t k = 0; k < domain.dim(); ++k) {
    if (density.domain().lower()[k] < domain.lower()[k] ||
        density.domain().upper()[k] > domain.upper()[k]) {
      result.violations.push_back("support outside domain: grid box exceeds axis " +
                                  std::to_string(k));
      break;
    }
  }
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double v = density.values()[i];
    if (!std::isfinite(v) || v < 0.0) {
      result.violations.push_back("negative density " + shortest(v) + " at cell " +
                                  std::to_string(i));
      break;
    }
  }
  if (const auto alpha = density.floor()) {
    const double lo = *std::min_element(density.values().begin(), density.values().end());
    if (lo < *alpha) {
      result.violations.push_back("density " + shortest(lo) + " below floor " +
                                  shortest(*alpha));
    }
  }
  const double mass = density.mass();
  if (!(std::abs(mass - 1.0) <= tol::kGridMass)) {
    result.violations.push_back("grid mass is " + shortest(mass));
  }
  return result;
}

ValidationResult validate(const Measure& measure, const BoxDomain& domain) {
  return std::visit([&](const auto& m) { return validate(m, domain); }, measure);
}

QuantileTable quantile_table(const DiscreteMeasure& measure) {
  if (measure.dim() != 1) throw InvalidArgument("quantile_table needs a 1-D measure");
  std::vector<std::size_t> order(measure.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& x = measure.points();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  double total = 0.0;
  for (double w : measure.weights()) total += w;
  if (!(total > 0.0)) throw InvalidArgument("quantile_table: measure has no mass");

  QuantileTable table;
  table.breakpoints.push_back(0.0);
  double cumulative = 0.0;
  for (std::size_t idx : order) {
    const double w = measure.weight(idx);
    if (!(w > 0.0)) continue;
    cumulative += w;
    const double t = std::min(cumulative / total, 1.0);
    if (!(t > table.breakpoints.back())) continue;
    table.breakpoints.push_back(t);
    table.start.push_back(x[idx]);
    table.end.push_back(x[idx]);
  }
  table.breakpoints.back() = 1.0;
  return table;
}

QuantileTable quantile_table(const GridDensity& density) {
  if (density.dim() != 1) throw InvalidArgument("quantile_table needs a 1-D density");
  const double h = density.cell_width(0);
  const double lo = density.domain().lower()[0];
  const auto& v = density.values();
  double total = 0.0;
  for (double value : v) total += std::max(value, 0.0);
  if (!(total > 0.0)) throw InvalidArgument("quantile_table: density has no mass");

  QuantileTable table;
  table.breakpoints.push_back(0.0);
  double cumulative = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!(v[k] > 0.0)) continue;
    cumulative += v[k];
    const double t = std::min(cumulative / total, 1.0);
    if (!(t > table.breakpoints.back())) continue;
    table.breakpoints.push_back(t);
    table.start.push_back(lo + static_cast<double>(k) * h);
    table.end.push_back(lo + static_cast<double>(k + 1) * h);
  }
  table.breakpoints.back() = 1.0;
  return table;
}

QuantileTable quantile_table(const Measure& measure) {
  return std::visit([](const auto& m) { return quantile_table(m); }, measure);
}

DiscreteMeasure grid_to_discrete(const GridDensity& density) {
  std::vector<double> points;
  std::vector<double> weights;
  double total = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double w = density.values()[i] * density.cell_volume();
    if (!(w > 0.0)) continue;
    const auto c = density.cell_center(i);
    points.insert(points.end(), c.begin(), c.end());
    weights.push_back(w);
    total += w;
  }
  if (weights.empty()) throw InvalidArgument("grid_to_discrete: density has no mass");
  for (double& w : weights) w /= total;
  return DiscreteMeasure(density.dim(), std::move(points), std::move(weights));
}

GridDensity quantile_to_grid(const QuantileTable& table, const BoxDomain& domain,
                             std::size_t cells) {
  if (domain.dim() != 1) throw InvalidArgument("quantile_to_grid needs a 1-D domain");
  if (cells == 0) throw InvalidArgument("quantile_to_grid needs cells >= 1");
  const double lo = domain.lower()[0];
  const double h = domain.extent(0) / static_cast<double>(cells);
  std::vector<double> values(cells);
  double previous = 0.0;
  for (std::size_t k = 0; k < cells; ++k) {
    const double right = k + 1 == cells ? 1.0 : table.cdf(lo + static_cast<double>(k + 1) * h);
    values[k] = std::max(right - previous, 0.0) / h;
    previous = std::max(previous, right);
  }
  return GridDensity(domain, {cells}, std::move(values));
}

}  // namespace wbary
