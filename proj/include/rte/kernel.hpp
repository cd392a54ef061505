#pragma once

#include "rte/types.hpp"

namespace rte {

/// Henyey-Greenstein phase function with anisotropy factor 0 <= g < 1.
struct PhaseFunction {
  double g = 0.0;

  PhaseFunction() = default;
  explicit PhaseFunction(double anisotropy);

  /// Value of k(s.s') at the analytic extremes t = -1 and t = 1.
  [[nodiscard]] double min_value() const;
  [[nodiscard]] double max_value() const;
};

/// k(t) = (1/4pi) (1-g^2) / (1 - 2 g t + g^2)^{3/2}. Arguments within 1e-12
/// outside [-1,1] are clamped (quadrature round-off); anything further is a
/// domain error.
double hg_eval(const PhaseFunction& phase, double t);

/// Radially constant extension K(x,y) = k(x/|x| . y/|y|).
double hg_extended(const PhaseFunction& phase, const Vec3& x, const Vec3& y);

/// Real spherical harmonic of degree l and order m with unit L2(S) norm.
/// m > 0 uses cos(m phi), m < 0 uses sin(|m| phi).
double sph_harmonic(int l, int m, const Vec3& s);

}  // namespace rte
