#include <doctest.h>

#include "rte/kernel.hpp"
#include "rte/quadrature.hpp"

#include <cmath>
#include <numbers>

using namespace rte;

namespace {

// int k(s.s') f(s') ds' on a fine mesh
double convolve(const PhaseFunction& ph, const Vec3& s, const std::function<double(const Vec3&)>& f) {
  static const SphereMesh m = build_sphere_mesh(4);
  double sum = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const SphericalRule r = spherical_quadrature(m, static_cast<int>(t), 12);
    for (std::size_t q = 0; q < r.points.size(); ++q) sum += r.weights[q] * hg_eval(ph, s.dot(r.points[q])) * f(r.points[q]);
  }
  return sum;
}

}  // namespace

TEST_CASE("phase function validation and extremes") {
  CHECK_THROWS_AS(PhaseFunction(1.0), std::invalid_argument);
  CHECK_THROWS_AS(PhaseFunction(-0.1), std::invalid_argument);
  const PhaseFunction ph(0.5);
  CHECK(hg_eval(ph, 1.0) == doctest::Approx(ph.max_value()));
  CHECK(hg_eval(ph, -1.0) == doctest::Approx(ph.min_value()));
  CHECK(hg_eval(PhaseFunction(0.0), 0.3) == doctest::Approx(1.0 / (4.0 * std::numbers::pi)));
  CHECK_NOTHROW(hg_eval(ph, 1.0 + 1e-13));
  CHECK_THROWS_AS(hg_eval(ph, 1.1), std::domain_error);
  CHECK(hg_extended(ph, Vec3(2, 0, 0), Vec3(0, 0, 3)) == doctest::Approx(hg_eval(ph, 0.0)));
}

TEST_CASE("phase function integrates to one") {
  for (double g : {0.0, 0.3, 0.7}) {
    const PhaseFunction ph(g);
    CHECK(convolve(ph, Vec3(0.2, -0.3, 0.9).normalized(), [](const Vec3&) { return 1.0; }) ==
          doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("spherical harmonics are orthonormal") {
  const SphereMesh m = build_sphere_mesh(3);
  for (int l1 = 0; l1 <= 3; ++l1)
    for (int m1 = -l1; m1 <= l1; ++m1)
      for (int l2 = 0; l2 <= 3; ++l2)
        for (int m2 = -l2; m2 <= l2; ++m2) {
          double s = 0.0;
          for (std::size_t t = 0; t < m.num_triangles(); ++t) {
            const SphericalRule r = spherical_quadrature(m, static_cast<int>(t), 12);
            for (std::size_t q = 0; q < r.points.size(); ++q)
              s += r.weights[q] * sph_harmonic(l1, m1, r.points[q]) * sph_harmonic(l2, m2, r.points[q]);
          }
          CHECK(s == doctest::Approx(l1 == l2 && m1 == m2 ? 1.0 : 0.0).epsilon(1e-9).scale(1.0));
        }
}

TEST_CASE("harmonics are eigenfunctions of the scattering operator") {
  const Vec3 s = Vec3(0.3, 0.5, -0.8).normalized();
  for (double g : {0.3, 0.7})
    for (int l = 0; l <= 3; ++l) {
      const double v = convolve(PhaseFunction(g), s, [l](const Vec3& x) { return sph_harmonic(l, 1 % (l + 1), x); });
      CHECK(v == doctest::Approx(std::pow(g, l) * sph_harmonic(l, 1 % (l + 1), s)).epsilon(1e-6).scale(1.0));
    }
}
