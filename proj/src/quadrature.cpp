#include "rte/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace rte {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre needs n >= 1");
  // Golub-Welsch on the Jacobi matrix of the Legendre recurrence.
  Matrix jacobi = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  nodes.resize(n);
  weights.resize(n);
  for (int k = 0; k < n; ++k) {
    nodes[k] = 0.5 * (eig.eigenvalues()(k) + 1.0);
    const double v0 = eig.eigenvectors()(0, k);
    weights[k] = v0 * v0;  // 2 * v0^2 on [-1,1], halved for [0,1]
  }
}

const QuadratureRule& triangle_rule(int degree) {
  if (degree < 1 || degree > kMaxQuadratureDegree)
    throw std::invalid_argument("unsupported quadrature degree " + std::to_string(degree) +
                                "; supported degrees are 1.." + std::to_string(kMaxQuadratureDegree));
  static std::mutex guard;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(guard);
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;

  // x = u, y = v (1 - u) with Jacobian (1 - u): the integrand has degree
  // <= degree + 1 in u and <= degree in v.
  const int nu = (degree + 2 + 1) / 2;
  const int nv = (degree + 1 + 1) / 2;
  std::vector<double> xu, wu, xv, wv;
  gauss_legendre(nu, xu, wu);
  gauss_legendre(nv, xv, wv);
  QuadratureRule rule;
  rule.degree = degree;
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const double x = xu[i];
      const double y = xv[j] * (1.0 - xu[i]);
      rule.points.push_back({1.0 - x - y, x, y});
      rule.weights.push_back(wu[i] * wv[j] * (1.0 - xu[i]));
    }
  }
  return cache.emplace(degree, std::move(rule)).first->second;
}

SphericalRule spherical_quadrature(const Vec3& a, const Vec3& b, const Vec3& c, int degree) {
  const QuadratureRule& ref = triangle_rule(degree);
  const Vec3 twice_normal = (b - a).cross(c - a);
  SphericalRule rule;
  rule.points.reserve(ref.points.size());
  rule.weights.reserve(ref.points.size());
  for (std::size_t q = 0; q < ref.points.size(); ++q) {
    const auto& bc = ref.points[q];
    const Vec3 p = bc[0] * a + bc[1] * b + bc[2] * c;
    const double r = p.norm();
    rule.points.push_back(p / r);
    rule.weights.push_back(ref.weights[q] * std::abs(twice_normal.dot(p)) / (r * r * r));
  }
  return rule;
}

SphericalRule spherical_quadrature(const SphereMesh& mesh, int tri, int degree) {
  const Tri& t = mesh.triangles[tri];
  return spherical_quadrature(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]], degree);
}

SphericalRule spherical_quadrature_subdivided(const Vec3& a, const Vec3& b, const Vec3& c, int degree,
                                              int levels) {
  if (levels <= 0) return spherical_quadrature(a, b, c, degree);
  // Flat midpoints keep the sub-triangles inside the same projection cone.
  const Vec3 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
  SphericalRule out;
  for (const auto& [p, q, r] : {std::array<Vec3, 3>{a, ab, ca}, std::array<Vec3, 3>{ab, b, bc},
                                std::array<Vec3, 3>{ca, bc, c}, std::array<Vec3, 3>{ab, bc, ca}}) {
    SphericalRule part = spherical_quadrature_subdivided(p, q, r, degree, levels - 1);
    out.points.insert(out.points.end(), part.points.begin(), part.points.end());
    out.weights.insert(out.weights.end(), part.weights.begin(), part.weights.end());
  }
  return out;
}

}  // namespace rte
