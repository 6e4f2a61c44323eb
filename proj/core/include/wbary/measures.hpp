#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace wbary {

/// Axis-aligned compact box standing in for the convex domain Omega.
class BoxDomain {
 public:
  /// Throws InvalidArgument unless lower.size() == upper.size() >= 1 and
  /// lower[k] < upper[k] for every k.
  BoxDomain(std::vector<double> lower, std::vector<double> upper);

  /// [0, 1]^dim.
  static BoxDomain unit(std::size_t dim);

  std::size_t dim() const { return lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  double extent(std::size_t axis) const { return upper_[axis] - lower_[axis]; }
  double diameter() const;
  bool contains(std::span<const double> x) const;

  friend bool operator==(const BoxDomain&, const BoxDomain&) = default;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// Weighted point cloud sum_i w_i delta_{x_i}. Points are stored row-major
/// (m x dim). The constructor only checks shapes; use validate() for the
/// probability-measure invariants.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::size_t dim, std::vector<double> points,
                  std::vector<double> weights);

  static DiscreteMeasure dirac(std::vector<double> x);
  /// Equal weights 1/m.
  static DiscreteMeasure uniform(std::size_t dim, std::vector<double> points);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * dim_, dim_};
  }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }

  std::vector<double> mean() const;

 private:
  std::size_t dim_;
  std::vector<double> points_;
  std::vector<double> weights_;
};

/// Piecewise-constant density on a regular grid over a box. Values are
/// row-major (last axis fastest) and carry units of mass per unit volume.
class GridDensity {
 public:
  GridDensity(BoxDomain domain, std::vector<std::size_t> shape,
              std::vector<double> values);

  static GridDensity uniform(BoxDomain domain, std::vector<std::size_t> shape);

  const BoxDomain& domain() const { return domain_; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t dim() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  double cell_volume() const { return cell_volume_; }
  double cell_width(std::size_t axis) const;
  /// Largest cell edge.
  double max_cell_width() const;
  std::vector<double> cell_center(std::size_t flat_index) const;
  /// Multi-index of a flat (row-major) index.
  std::vector<std::size_t> unravel(std::size_t flat_index) const;

  /// Sum of values * cell_volume.
  double mass() const;

  /// Floor alpha this density was constructed to respect, if any.
  std::optional<double> floor() const { return floor_; }
  GridDensity with_floor(double alpha) const;
  /// Same grid, new values; the floor tag is dropped.
  GridDensity with_values(std::vector<double> values) const;

 private:
  BoxDomain domain_;
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
  double cell_volume_;
  std::optional<double> floor_;
};

/// Generalized inverse F^- of a one-dimensional CDF, stored as segments over
/// [t_{k-1}, t_k]. On segment k the quantile runs linearly from start[k]
/// (right limit at t_{k-1}) to end[k] (left limit at t_k); start == end gives
/// a step. F^- is left-continuous.
struct QuantileTable {
  std::vector<double> breakpoints;  // 0 = t_0 < t_1 < ... < t_K = 1
  std::vector<double> start;        // K entries
  std::vector<double> end;          // K entries

  std::size_t segments() const { return start.size(); }
  /// F^-(t) for t in [0, 1]; F^-(0) is the lower end of the support.
  double quantile(double t) const;
  /// Right-continuous CDF F(x) = sup{t : F^-(t) <= x}.
  double cdf(double x) const;
  /// True when the table satisfies its invariants.
  bool well_formed() const;
};

using Measure = std::variant<DiscreteMeasure, GridDensity>;

/// Diagnostic outcome of validate(); never throws.
struct ValidationResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationResult validate(const DiscreteMeasure& measure,
                          const BoxDomain& domain);
ValidationResult validate(const GridDensity& density, const BoxDomain& domain);
ValidationResult validate(const Measure& measure, const BoxDomain& domain);

/// One-dimensional quantile function. Throws InvalidArgument for dim != 1.
QuantileTable quantile_table(const DiscreteMeasure& measure);
QuantileTable quantile_table(const GridDensity& density);
QuantileTable quantile_table(const Measure& measure);

/// Atoms at the cell centers of non-empty cells with weights
/// values * cell_volume, renormalized to sum to one.
DiscreteMeasure grid_to_discrete(const GridDensity& density);

/// Cell masses of a 1-D quantile table on a grid, as a density.
GridDensity quantile_to_grid(const QuantileTable& table, const BoxDomain& domain,
                             std::size_t cells);

}  // namespace wbary
