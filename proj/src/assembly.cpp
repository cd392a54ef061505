#include "rte/assembly.hpp"

#include "rte/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rte {

double OpticalField::scattering_ratio() const {
  double c = 0.0;
  for (std::size_t j = 0; j < sigma_s.size(); ++j) {
    const double st = sigma_t(j);
    if (st > 0.0) c = std::max(c, sigma_s[j] / st);
  }
  return c;
}

void OpticalField::validate(const SpatialMesh& mesh) const {
  const std::size_t n = mesh.num_triangles();
  if (sigma_a.size() != n || sigma_s.size() != n || source_q.size() != n)
    throw std::invalid_argument("optical field has " + std::to_string(sigma_a.size()) +
                                " cells but the mesh has " + std::to_string(n));
  for (std::size_t j = 0; j < n; ++j) {
    if (!(sigma_a[j] >= 0.0) || !(sigma_s[j] >= 0.0))
      throw std::invalid_argument("negative optical coefficient in cell " + std::to_string(j));
    if (!(sigma_t(j) > 0.0))
      throw std::invalid_argument("sigma_t vanishes in cell " + std::to_string(j));
  }
}

int lattice_material(const Vec2& point) {
  const int cx = static_cast<int>(std::ceil(point.x()));
  const int cy = static_cast<int>(std::ceil(point.y()));
  if (cx == 4 && cy == 4) return 2;
  if ((cx + cy) % 2 == 0 && cx > 1 && cx < 7 && cy > 1 && cy - 2 * std::abs(cx - 4) < 4) return 1;
  return 0;
}

OpticalField lattice_field(const SpatialMesh& mesh, double g) {
  OpticalField f;
  f.phase = PhaseFunction(g);
  const std::size_t n = mesh.num_triangles();
  f.sigma_a.resize(n);
  f.sigma_s.resize(n);
  f.source_q.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    switch (lattice_material(mesh.centroid(static_cast<int>(j)))) {
      case 1:
        f.sigma_a[j] = 1.0;
        f.sigma_s[j] = 0.0;
        f.source_q[j] = 0.0;
        break;
      case 2:
        f.sigma_a[j] = 0.01;
        f.sigma_s[j] = 10.0;
        f.source_q[j] = 1.0;
        break;
      default:
        f.sigma_a[j] = 0.01;
        f.sigma_s[j] = 10.0;
        f.source_q[j] = 0.0;
    }
  }
  return f;
}

OpticalField homogeneous_field(const SpatialMesh& mesh, double sigma_a, double sigma_s, double q, double g) {
  OpticalField f;
  f.phase = PhaseFunction(g);
  const std::size_t n = mesh.num_triangles();
  f.sigma_a.assign(n, sigma_a);
  f.sigma_s.assign(n, sigma_s);
  f.source_q.assign(n, q);
  f.validate(mesh);
  return f;
}

SpatialMatrices assemble_spatial(const SpatialMesh& mesh, const OpticalField& field) {
  field.validate(mesh);
  const int nv = static_cast<int>(mesh.num_vertices());
  const int nt = static_cast<int>(mesh.num_triangles());
  SpatialMatrices out;
  out.Mt_minus.resize(nt);
  out.Ms_minus.resize(nt);
  out.source_plus = Vector::Zero(nv);
  out.source_minus.resize(nt);

  std::vector<Triplet> mt, ms, dx, dy;
  mt.reserve(9 * nt);
  ms.reserve(9 * nt);
  dx.reserve(3 * nt);
  dy.reserve(3 * nt);
  for (int t = 0; t < nt; ++t) {
    const Tri& tri = mesh.triangles[t];
    const Vec2& p0 = mesh.vertices[tri[0]];
    const Vec2& p1 = mesh.vertices[tri[1]];
    const Vec2& p2 = mesh.vertices[tri[2]];
    const double area = mesh.area(t);
    const double st = field.sigma_t(t), ss = field.sigma_s[t], q = field.source_q[t];

    // P1 mass on a triangle: area/12 * (1 + delta_ij)
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const double m = area / 12.0 * (a == b ? 2.0 : 1.0);
        mt.emplace_back(tri[a], tri[b], st * m);
        ms.emplace_back(tri[a], tri[b], ss * m);
      }
      out.source_plus[tri[a]] += q * area / 3.0;
    }

    const double two_area = 2.0 * area;
    const std::array<Vec2, 3> grad{Vec2(p1.y() - p2.y(), p2.x() - p1.x()) / two_area,
                                   Vec2(p2.y() - p0.y(), p0.x() - p2.x()) / two_area,
                                   Vec2(p0.y() - p1.y(), p1.x() - p0.x()) / two_area};
    for (int a = 0; a < 3; ++a) {
      dx.emplace_back(t, tri[a], area * grad[a].x());
      dy.emplace_back(t, tri[a], area * grad[a].y());
    }
    out.Mt_minus[t] = st * area;
    out.Ms_minus[t] = ss * area;
    out.source_minus[t] = q * area;
  }
  out.Mt_plus.resize(nv, nv);
  out.Mt_plus.setFromTriplets(mt.begin(), mt.end());
  out.Ms_plus.resize(nv, nv);
  out.Ms_plus.setFromTriplets(ms.begin(), ms.end());
  out.D[0].resize(nt, nv);
  out.D[0].setFromTriplets(dx.begin(), dx.end());
  out.D[1].resize(nt, nv);
  out.D[1].setFromTriplets(dy.begin(), dy.end());
  return out;
}

namespace {

void check_symmetric(const SphereMesh& mesh) {
  const std::size_t n = mesh.num_triangles();
  if (mesh.antipode_of.size() != n || 2 * mesh.representatives.size() != n)
    throw std::invalid_argument("sphere mesh is not antipodally symmetric");
  for (std::size_t t = 0; t < n; ++t) {
    const int a = mesh.antipode_of[t];
    if (a < 0 || static_cast<std::size_t>(a) >= n || a == static_cast<int>(t) ||
        mesh.antipode_of[a] != static_cast<int>(t))
      throw std::invalid_argument("sphere mesh is not antipodally symmetric");
    for (int v : mesh.triangles[t]) {
      bool found = false;
      for (int w : mesh.triangles[a]) found = found || (mesh.vertices[v] + mesh.vertices[w]).norm() < 1e-12;
      if (!found) throw std::invalid_argument("sphere mesh is not antipodally symmetric");
    }
  }
}

OddBasis make_odd_basis(const SphereMesh& mesh) {
  OddBasis basis;
  basis.inverse_vertices.reserve(mesh.num_even());
  for (int rep : mesh.representatives) {
    const Tri& t = mesh.triangles[rep];
    Eigen::Matrix3d v;
    v << mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]];
    basis.inverse_vertices.push_back(v.inverse());
  }
  return basis;
}

PanelRule make_panel(const SphereMesh& mesh, int tri, const Eigen::Matrix3d& inv, int degree, int subdivision) {
  const Tri& t = mesh.triangles[tri];
  const SphericalRule rule = spherical_quadrature_subdivided(mesh.vertices[t[0]], mesh.vertices[t[1]],
                                                             mesh.vertices[t[2]], degree, subdivision);
  const Index nq = static_cast<Index>(rule.points.size());
  // Rescaling to the exact area makes constants integrate exactly.
  double total = 0.0;
  for (double w : rule.weights) total += w;
  const double fix = mesh.spherical_area(tri) / total;
  PanelRule p;
  p.points.resize(nq, 3);
  p.weights.resize(nq);
  p.lambda_w.resize(nq, 3);
  for (Index q = 0; q < nq; ++q) {
    p.points.row(q) = rule.points[q].transpose();
    p.weights[q] = fix * rule.weights[q];
    p.lambda_w.row(q) = p.weights[q] * (inv * rule.points[q]).transpose();
  }
  return p;
}

}  // namespace

ScatteringIntegrator::ScatteringIntegrator(const SphereMesh& mesh, const PhaseFunction& phase,
                                           const AngularQuadrature& quad)
    : phase_(phase), quad_(quad), peaked_(phase.g >= quad.near_g) {
  check_symmetric(mesh);
  const int n = static_cast<int>(mesh.num_even());
  const OddBasis basis = make_odd_basis(mesh);
  far_.resize(n);
  center_.resize(n);
  radius_.resize(n);
  diameter_.resize(n);
  for (int k = 0; k < n; ++k) {
    const int rep = mesh.representatives[k];
    far_[k] = make_panel(mesh, rep, basis.inverse_vertices[k], quad.far_degree, 0);
    center_[k] = mesh.flat_centroid(rep).normalized();
    double r = 0.0;
    for (int v : mesh.triangles[rep]) r = std::max(r, (mesh.vertices[v] - center_[k]).norm());
    radius_[k] = r;
    diameter_[k] = mesh.diameter(rep);
  }
  if (peaked_) {
    near_.resize(n);
    for (int k = 0; k < n; ++k)
      near_[k] = make_panel(mesh, mesh.representatives[k], basis.inverse_vertices[k], quad.near_degree,
                            quad.near_subdivision);
  }
}

void ScatteringIntegrator::pair(int a, int b, double* even, Eigen::Matrix3d* odd) const {
  const double g = phase_.g;
  const double scale = (1.0 - g * g) / (4.0 * std::numbers::pi);
  double e = 0.0;
  Eigen::Matrix3d o = Eigen::Matrix3d::Zero();
  Eigen::ArrayXXd t;
  for (const double sign : {1.0, -1.0}) {
    bool use_near = false;
    if (peaked_) {
      const double dist = (center_[a] - sign * center_[b]).norm() - radius_[a] - radius_[b];
      use_near = dist < quad_.near_factor * std::max(diameter_[a], diameter_[b]);
    }
    const PanelRule& pa = use_near ? near_[a] : far_[a];
    const PanelRule& pb = use_near ? near_[b] : far_[b];
    t = (pa.points * pb.points.transpose()).array();
    t = (1.0 + g * g) - (2.0 * g * sign) * t.max(-1.0).min(1.0);
    t = scale / (t * t.sqrt());
    if (even) e += pa.weights.dot(t.matrix() * pb.weights);
    if (odd) o += sign * (pa.lambda_w.transpose() * t.matrix() * pb.lambda_w);
  }
  if (even) *even = 2.0 * e;
  if (odd) *odd = 2.0 * o;
}

void assemble_scattering(const SphereMesh& mesh, const PhaseFunction& phase, const AngularQuadrature& quad,
                         Matrix* S_plus, Matrix* S_minus) {
  const ScatteringIntegrator integ(mesh, phase, quad);
  const int n = integ.size();
  if (S_plus) S_plus->setZero(n, n);
  if (S_minus) S_minus->setZero(3 * n, 3 * n);
  double even = 0.0;
  Eigen::Matrix3d odd;
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      integ.pair(a, b, S_plus ? &even : nullptr, S_minus ? &odd : nullptr);
      if (S_plus) (*S_plus)(a, b) = even;
      if (S_minus) S_minus->block<3, 3>(3 * a, 3 * b) = a == b ? Eigen::Matrix3d(0.5 * (odd + odd.transpose())) : odd;
    }
  }
  if (S_plus) *S_plus = S_plus->selfadjointView<Eigen::Upper>();
  if (S_minus) *S_minus = S_minus->selfadjointView<Eigen::Upper>();
}

AngularMatrices assemble_angular(const SphereMesh& mesh, const PhaseFunction& phase, const AngularQuadrature& quad,
                                 bool with_scattering) {
  check_symmetric(mesh);
  const int n = static_cast<int>(mesh.num_even());
  AngularMatrices out;
  out.odd_basis = make_odd_basis(mesh);
  out.M_plus.resize(n);
  out.M_minus_blocks.resize(n);

  std::vector<Triplet> mm, a1, a2;
  mm.reserve(9 * n);
  a1.reserve(3 * n);
  a2.reserve(3 * n);
  for (int k = 0; k < n; ++k) {
    const int rep = mesh.representatives[k];
    out.M_plus[k] = 2.0 * mesh.spherical_area(rep);
    const SphericalRule rule = spherical_quadrature(mesh, rep, quad.single_degree);
    Eigen::Matrix3d block = Eigen::Matrix3d::Zero();
    Eigen::Vector3d m1 = Eigen::Vector3d::Zero(), m2 = Eigen::Vector3d::Zero();
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec3& s = rule.points[q];
      const Eigen::Vector3d lam = out.odd_basis.eval(k, s);
      block += rule.weights[q] * lam * lam.transpose();
      m1 += rule.weights[q] * s.x() * lam;
      m2 += rule.weights[q] * s.y() * lam;
    }
    // The antipodal panel contributes the same amount.
    block = (block + block.transpose()).eval();
    out.M_minus_blocks[k] = block;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) mm.emplace_back(3 * k + i, 3 * k + j, block(i, j));
      a1.emplace_back(3 * k + i, k, 2.0 * m1[i]);
      a2.emplace_back(3 * k + i, k, 2.0 * m2[i]);
    }
  }
  out.M_minus.resize(3 * n, 3 * n);
  out.M_minus.setFromTriplets(mm.begin(), mm.end());
  out.A[0].resize(3 * n, n);
  out.A[0].setFromTriplets(a1.begin(), a1.end());
  out.A[1].resize(3 * n, n);
  out.A[1].setFromTriplets(a2.begin(), a2.end());

  if (with_scattering) assemble_scattering(mesh, phase, quad, &out.S_plus, &out.S_minus);
  return out;
}

SpMat BoundaryMatrices::block(std::size_t k) const {
  SpMat r(edge_mass.empty() ? 0 : edge_mass[0].rows(), edge_mass.empty() ? 0 : edge_mass[0].cols());
  for (std::size_t n = 0; n < edge_mass.size(); ++n) r += omega(static_cast<Index>(k), static_cast<Index>(n)) * edge_mass[n];
  return r;
}

BoundaryMatrices assemble_boundary(const SpatialMesh& smesh, const SphereMesh& amesh, int degree) {
  check_symmetric(amesh);
  const int nv = static_cast<int>(smesh.num_vertices());
  const std::size_t nn = smesh.normals.size();
  BoundaryMatrices out;

  std::vector<std::vector<Triplet>> trip(nn);
  for (const BoundaryEdge& e : smesh.boundary_edges) {
    const double m = e.length / 6.0;
    auto& t = trip[e.normal_id];
    t.emplace_back(e.vertices[0], e.vertices[0], 2.0 * m);
    t.emplace_back(e.vertices[1], e.vertices[1], 2.0 * m);
    t.emplace_back(e.vertices[0], e.vertices[1], m);
    t.emplace_back(e.vertices[1], e.vertices[0], m);
  }
  out.edge_mass.resize(nn);
  for (std::size_t n = 0; n < nn; ++n) {
    out.edge_mass[n].resize(nv, nv);
    out.edge_mass[n].setFromTriplets(trip[n].begin(), trip[n].end());
  }

  // |s.n| has a kink along the great circle orthogonal to n; panels it cuts
  // get a subdivided rule.
  constexpr int kKinkSubdivision = 4;
  const int ns = static_cast<int>(amesh.num_even());
  out.omega.resize(ns, static_cast<Index>(nn));
  for (int k = 0; k < ns; ++k) {
    const Tri& t = amesh.triangles[amesh.representatives[k]];
    for (std::size_t n = 0; n < nn; ++n) {
      const Vec3 normal(smesh.normals[n].x(), smesh.normals[n].y(), 0.0);
      bool pos = false, neg = false;
      for (int v : t) {
        const double d = amesh.vertices[v].dot(normal);
        pos |= d > 0.0;
        neg |= d < 0.0;
      }
      const SphericalRule rule =
          spherical_quadrature_subdivided(amesh.vertices[t[0]], amesh.vertices[t[1]], amesh.vertices[t[2]], degree,
                                          pos && neg ? kKinkSubdivision : 0);
      double sum = 0.0;
      for (std::size_t q = 0; q < rule.points.size(); ++q) sum += rule.weights[q] * std::abs(rule.points[q].dot(normal));
      out.omega(k, static_cast<Index>(n)) = 2.0 * sum;
    }
  }
  return out;
}

std::pair<Vector, Vector> assemble_rhs(const SpatialMatrices& spatial, const AngularMatrices& angular,
                                       std::size_t num_odd_cells, double inflow) {
  if (inflow != 0.0) throw std::logic_error("nonzero inflow boundary data is not implemented");
  const Index nr = spatial.source_plus.size();
  const Index ns = angular.M_plus.size();
  Vector q_plus(nr * ns);
  // int mu_k = int mu_k^2 since mu_k is an indicator.
  Eigen::Map<Matrix>(q_plus.data(), nr, ns) = spatial.source_plus * angular.M_plus.transpose();
  Vector q_minus = Vector::Zero(static_cast<Index>(num_odd_cells) * 3 * ns);
  return {std::move(q_plus), std::move(q_minus)};
}

AssembledSystem assemble_system(SpatialMesh smesh, SphereMesh amesh, OpticalField field, const AngularQuadrature& quad,
                                bool dense_scattering) {
  field.validate(smesh);
  AssembledSystem sys;
  sys.spatial = assemble_spatial(smesh, field);
  sys.angular = assemble_angular(amesh, field.phase, quad, dense_scattering);
  sys.boundary = assemble_boundary(smesh, amesh, quad.single_degree);
  auto [qp, qm] = assemble_rhs(sys.spatial, sys.angular, smesh.num_triangles());
  sys.q_plus = std::move(qp);
  sys.q_minus = std::move(qm);
  sys.c = field.scattering_ratio();
  sys.smesh = std::move(smesh);
  sys.amesh = std::move(amesh);
  sys.field = std::move(field);
  return sys;
}

}  // namespace rte
