#pragma once

// Tolerances shared by validation, certificates and tests.

namespace wbary::tol {

// Discrete weights must sum to one within this.
inline constexpr double kMass = 1e-12;
// Grid densities must integrate to one within this.
inline constexpr double kGridMass = 1e-10;
// Plan marginals must match the measures within this.
inline constexpr double kMarginal = 1e-9;
// phi[i] + psi[j] <= c(i, j) + kDualFeasibility.
inline constexpr double kDualFeasibility = 1e-9;
// |primal - dual| <= kDualityGap.
inline constexpr double kDualityGap = 1e-7;
// Default entropy / Sobolev floor, relative to the uniform density value.
inline constexpr double kDefaultFloorRatio = 1e-6;

}  // namespace wbary::tol
