#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wbary/measures.hpp"

namespace wbary {

enum class PenaltyKind { Quadratic, Entropy, Sobolev };

/// Pointwise integrand G of a relative G-functional.
enum class Integrand { Quadratic, Entropy };

/// Convex penalty E on grid densities (Lebesgue reference measure).
///
///   Quadratic: E(f) = 1/2 int f^2                                (f >= alpha >= 0)
///   Entropy:   E(f) = int f (log f - 1) + 1                       (f >= alpha > 0)
///   Sobolev:   E(f) = int G(f) + sum_{|b| <= k} ||D^b f||^2       (f >= alpha > 0)
///
/// D^b composes forward differences along each axis with reflecting
/// (Neumann) boundaries; G is quadratic or entropy.
class Penalty {
 public:
  static Penalty quadratic(double alpha = 0.0);
  static Penalty entropy(double alpha);
  static Penalty sobolev(int order, double alpha, Integrand base = Integrand::Quadratic);

  PenaltyKind kind() const { return kind_; }
  Integrand integrand() const { return integrand_; }
  double alpha() const { return alpha_; }
  int order() const { return order_; }
  std::string name() const;

  /// True when every value is >= alpha (and > 0 where G needs it).
  bool in_domain(const GridDensity& f) const;

 private:
  Penalty(PenaltyKind kind, Integrand integrand, double alpha, int order);

  PenaltyKind kind_;
  Integrand integrand_;
  double alpha_;
  int order_;
};

/// E(f), or std::nullopt standing for +infinity when f is outside the domain.
using PenaltyValue = std::optional<double>;

PenaltyValue eval(const Penalty& penalty, const GridDensity& f);

/// grad E(f) as a grid function, the Riesz representer for the pairing
/// <u, v> = sum u_k v_k cell_volume. Throws DomainViolation outside the domain.
std::vector<double> grad(const Penalty& penalty, const GridDensity& f);

/// d_E(f, g) = <grad E(f) - grad E(g), f - g>.
double bregman_sym(const Penalty& penalty, const GridDensity& f, const GridDensity& g);

/// D_E(f, g) = E(f) - E(g) - <grad E(g), f - g>.
double bregman_nonsym(const Penalty& penalty, const GridDensity& f, const GridDensity& g);

/// sum u_k v_k cell_volume over the grid of f.
double inner(const GridDensity& grid, const std::vector<double>& u,
             const std::vector<double>& v);

/// Squared L2 distance int (f - g)^2.
double l2_distance_sq(const GridDensity& f, const GridDensity& g);

/// The symmetric positive semidefinite operator S with
/// <S f, f> = sum_{|b| <= k} ||D^b f||^2 on the grid of f.
std::vector<double> sobolev_operator(const GridDensity& grid, const std::vector<double>& values,
                                     int order);

/// Sum of squared discrete L2 norms of all D^b f with |b| <= order.
double sobolev_norm_sq(const GridDensity& grid, const std::vector<double>& values, int order);

}  // namespace wbary
