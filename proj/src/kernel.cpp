#include "rte/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rte {

PhaseFunction::PhaseFunction(double anisotropy) : g(anisotropy) {
  if (!(g >= 0.0 && g < 1.0))
    throw std::invalid_argument("anisotropy factor must satisfy 0 <= g < 1, got " + std::to_string(g));
}

double PhaseFunction::min_value() const { return hg_eval(*this, -1.0); }
double PhaseFunction::max_value() const { return hg_eval(*this, 1.0); }

double hg_eval(const PhaseFunction& phase, double t) {
  constexpr double kClamp = 1e-12;
  if (!(t >= -1.0 - kClamp && t <= 1.0 + kClamp))
    throw std::domain_error("scattering cosine outside [-1,1]: " + std::to_string(t));
  t = std::clamp(t, -1.0, 1.0);
  const double g = phase.g;
  const double d = 1.0 - 2.0 * g * t + g * g;
  return (1.0 - g * g) / (4.0 * std::numbers::pi * d * std::sqrt(d));
}

double hg_extended(const PhaseFunction& phase, const Vec3& x, const Vec3& y) {
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0) throw std::domain_error("kernel extension undefined at the origin");
  return hg_eval(phase, x.dot(y) / (nx * ny));
}

double sph_harmonic(int l, int m, const Vec3& s) {
  if (l < 0 || m < -l || m > l)
    throw std::domain_error("invalid spherical harmonic index (" + std::to_string(l) + "," +
                            std::to_string(m) + ")");
  const int am = std::abs(m);
  const double ct = std::clamp(s.z(), -1.0, 1.0);
  const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
  const double phi = std::atan2(s.y(), s.x());

  // Fully normalized associated Legendre functions via the standard
  // three-term recurrence (no Condon-Shortley phase).
  double pmm = std::sqrt(1.0 / (4.0 * std::numbers::pi));
  for (int k = 1; k <= am; ++k) pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * st;
  double plm = pmm;
  if (l > am) {
    double prev = pmm;
    double cur = std::sqrt(2.0 * am + 3.0) * ct * pmm;
    for (int k = am + 2; k <= l; ++k) {
      const double a = std::sqrt((4.0 * k * k - 1.0) / (double(k * k) - double(am * am)));
      const double b = std::sqrt((double((k - 1) * (k - 1)) - double(am * am)) /
                                 (4.0 * (k - 1) * (k - 1) - 1.0));
      const double next = a * (ct * cur - b * prev);
      prev = cur;
      cur = next;
    }
    plm = cur;
  }
  if (m == 0) return plm;
  const double scale = std::numbers::sqrt2 * plm;
  return m > 0 ? scale * std::cos(am * phi) : scale * std::sin(am * phi);
}

}  // namespace rte
