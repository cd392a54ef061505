#pragma once

#include "rte/geometry.hpp"

namespace rte {

/// Rule on the reference triangle {(x,y): x,y >= 0, x+y <= 1}.
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;  ///< barycentric coordinates
  std::vector<double> weights;                ///< sum to 1/2
  int degree = 0;
};

constexpr int kMaxQuadratureDegree = 30;

/// Gauss-Legendre nodes/weights on [0,1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Collapsed (Duffy) tensor Gauss rule exact for polynomials of total degree
/// <= degree. Positive weights. Supported degrees: 1..kMaxQuadratureDegree.
const QuadratureRule& triangle_rule(int degree);

/// Quadrature points/weights on a curved spherical triangle.
struct SphericalRule {
  std::vector<Vec3> points;
  std::vector<double> weights;
};

/// Planar rule of the requested degree on the flat triangle, radially
/// projected to the sphere; the weights carry the projection Jacobian.
SphericalRule spherical_quadrature(const SphereMesh& mesh, int tri, int degree);

/// Same as spherical_quadrature on an arbitrary flat triangle (a,b,c) whose
/// radial projection is the integration domain.
SphericalRule spherical_quadrature(const Vec3& a, const Vec3& b, const Vec3& c, int degree);

/// Rule on the triangle split into 4^levels flat sub-triangles, each
/// integrated with the given degree.
SphericalRule spherical_quadrature_subdivided(const Vec3& a, const Vec3& b, const Vec3& c, int degree,
                                              int levels);

}  // namespace rte
