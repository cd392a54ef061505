#include "rte/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

namespace rte {

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

std::array<int, 3> sorted(Tri t) {
  std::sort(t.begin(), t.end());
  return t;
}

void link_antipodes(SphereMesh& mesh) {
  const int nv = static_cast<int>(mesh.vertices.size());
  // Midpoint normalization commutes exactly with negation, so antipodal
  // vertices match bit for bit.
  std::map<std::array<double, 3>, int> by_position;
  for (int i = 0; i < nv; ++i) {
    const Vec3& p = mesh.vertices[i];
    by_position.emplace(std::array<double, 3>{p.x(), p.y(), p.z()}, i);
  }
  std::vector<int> vertex_antipode(nv, -1);
  for (int i = 0; i < nv; ++i) {
    const Vec3 q = -mesh.vertices[i];
    auto it = by_position.find({q.x(), q.y(), q.z()});
    if (it == by_position.end()) throw std::logic_error("sphere mesh is not antipodally symmetric");
    vertex_antipode[i] = it->second;
  }

  std::map<std::array<int, 3>, int> by_vertices;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t)
    by_vertices.emplace(sorted(mesh.triangles[t]), t);

  mesh.antipode_of.assign(mesh.triangles.size(), -1);
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const Tri& tri = mesh.triangles[t];
    const Tri neg{vertex_antipode[tri[0]], vertex_antipode[tri[1]], vertex_antipode[tri[2]]};
    auto it = by_vertices.find(sorted(neg));
    if (it == by_vertices.end()) throw std::logic_error("missing antipodal triangle");
    mesh.antipode_of[t] = it->second;
  }

  mesh.representatives.clear();
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t)
    if (in_reference_half_sphere(mesh.flat_centroid(t))) mesh.representatives.push_back(t);
  if (2 * mesh.representatives.size() != mesh.triangles.size())
    throw std::logic_error("half-sphere selection does not pick one triangle per antipodal pair");
}

}  // namespace

bool in_reference_half_sphere(const Vec3& m) {
  if (m.z() != 0.0) return m.z() > 0.0;
  if (m.y() != 0.0) return m.y() > 0.0;
  return m.x() > 0.0;
}

Vec3 SphereMesh::flat_centroid(int tri) const {
  const Tri& t = triangles[tri];
  return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
}

double SphereMesh::spherical_area(int tri) const {
  const Tri& t = triangles[tri];
  const Vec3& a = vertices[t[0]];
  const Vec3& b = vertices[t[1]];
  const Vec3& c = vertices[t[2]];
  // Van Oosterom-Strackee solid angle formula.
  const double num = std::abs(a.dot(b.cross(c)));
  const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(num, den);
}

double SphereMesh::diameter(int tri) const {
  const Tri& t = triangles[tri];
  return std::max({(vertices[t[0]] - vertices[t[1]]).norm(), (vertices[t[1]] - vertices[t[2]]).norm(),
                   (vertices[t[2]] - vertices[t[0]]).norm()});
}

SphereMesh build_sphere_mesh(int level) {
  if (level < 0) throw std::invalid_argument("sphere level must be non-negative");
  SphereMesh mesh;
  mesh.vertices = {Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0),
                   Vec3(0, -1, 0), Vec3(0, 0, 1), Vec3(0, 0, -1)};
  for (int sx : {1, -1})
    for (int sy : {1, -1})
      for (int sz : {1, -1}) {
        const int a = sx > 0 ? 0 : 1;
        const int b = sy > 0 ? 2 : 3;
        const int c = sz > 0 ? 4 : 5;
        if (sx * sy * sz > 0)
          mesh.triangles.push_back({a, b, c});
        else
          mesh.triangles.push_back({a, c, b});
      }

  for (int l = 0; l < level; ++l) {
    std::map<EdgeKey, int> midpoint;
    auto mid = [&](int a, int b) {
      auto [it, inserted] = midpoint.emplace(edge_key(a, b), -1);
      if (inserted) {
        it->second = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back((mesh.vertices[a] + mesh.vertices[b]).normalized());
      }
      return it->second;
    };
    std::vector<Tri> refined;
    refined.reserve(4 * mesh.triangles.size());
    for (const Tri& t : mesh.triangles) {
      const int ab = mid(t[0], t[1]);
      const int bc = mid(t[1], t[2]);
      const int ca = mid(t[2], t[0]);
      refined.push_back({t[0], ab, ca});
      refined.push_back({ab, t[1], bc});
      refined.push_back({ca, bc, t[2]});
      refined.push_back({ab, bc, ca});
    }
    mesh.triangles = std::move(refined);
  }
  mesh.level = level;
  link_antipodes(mesh);
  return mesh;
}

double SpatialMesh::area(int tri) const {
  const Tri& t = triangles[tri];
  const Vec2 e1 = vertices[t[1]] - vertices[t[0]];
  const Vec2 e2 = vertices[t[2]] - vertices[t[0]];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

Vec2 SpatialMesh::centroid(int tri) const {
  const Tri& t = triangles[tri];
  return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
}

std::vector<bool> SpatialMesh::boundary_vertex_mask() const {
  std::vector<bool> mask(vertices.size(), false);
  for (const auto& e : boundary_edges) {
    mask[e.vertices[0]] = true;
    mask[e.vertices[1]] = true;
  }
  return mask;
}

void finalize_spatial_mesh(SpatialMesh& mesh) {
  std::map<EdgeKey, int> count;
  std::map<EdgeKey, std::pair<int, int>> oriented;
  double h = 0.0;
  for (const Tri& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const int a = t[e];
      const int b = t[(e + 1) % 3];
      ++count[edge_key(a, b)];
      oriented[edge_key(a, b)] = {a, b};
      h = std::max(h, (mesh.vertices[a] - mesh.vertices[b]).norm());
    }
  }
  mesh.h = h;
  mesh.boundary_edges.clear();
  mesh.normals.clear();
  for (const auto& [key, n] : count) {
    if (n > 2) throw std::invalid_argument("non-conforming spatial mesh: edge shared by >2 triangles");
    if (n != 1) continue;
    const auto [a, b] = oriented[key];
    const Vec2 d = mesh.vertices[b] - mesh.vertices[a];
    BoundaryEdge edge;
    edge.vertices = {a, b};
    edge.length = d.norm();
    // Counter-clockwise triangles: the outward normal is the edge direction rotated clockwise.
    edge.normal = Vec2(d.y(), -d.x()) / edge.length;
    int id = -1;
    for (int k = 0; k < static_cast<int>(mesh.normals.size()); ++k)
      if ((mesh.normals[k] - edge.normal).norm() < 1e-12) id = k;
    if (id < 0) {
      id = static_cast<int>(mesh.normals.size());
      mesh.normals.push_back(edge.normal);
    }
    edge.normal_id = id;
    mesh.boundary_edges.push_back(edge);
  }
}

SpatialMesh build_rectangle_mesh(int nx, int ny, double lx, double ly, double x0, double y0) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("rectangle mesh needs at least one cell per side");
  SpatialMesh mesh;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.emplace_back(x0 + lx * i / nx, y0 + ly * j / ny);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        mesh.triangles.push_back({v00, v10, v11});
        mesh.triangles.push_back({v00, v11, v01});
      } else {
        mesh.triangles.push_back({v00, v10, v01});
        mesh.triangles.push_back({v10, v11, v01});
      }
    }
  }
  finalize_spatial_mesh(mesh);
  return mesh;
}

SpatialMesh refine_uniform(const SpatialMesh& mesh) {
  SpatialMesh fine;
  fine.vertices = mesh.vertices;
  std::map<EdgeKey, int> midpoint;
  auto mid = [&](int a, int b) {
    auto [it, inserted] = midpoint.emplace(edge_key(a, b), -1);
    if (inserted) {
      it->second = static_cast<int>(fine.vertices.size());
      fine.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
    }
    return it->second;
  };
  for (const Tri& t : mesh.triangles) {
    const int ab = mid(t[0], t[1]);
    const int bc = mid(t[1], t[2]);
    const int ca = mid(t[2], t[0]);
    fine.triangles.push_back({t[0], ab, ca});
    fine.triangles.push_back({ab, t[1], bc});
    fine.triangles.push_back({ca, bc, t[2]});
    fine.triangles.push_back({ab, bc, ca});
  }
  finalize_spatial_mesh(fine);
  return fine;
}

SpatialMesh build_lattice_mesh(int refine) {
  if (refine < 0) throw std::invalid_argument("spatial refinement must be non-negative");
  SpatialMesh mesh = build_rectangle_mesh(56, 56, 7.0, 7.0);
  for (int r = 0; r < refine; ++r) mesh = refine_uniform(mesh);
  return mesh;
}

void write_sphere_vtk(const std::string& path, const SphereMesh& mesh,
                      const std::vector<double>& cell_data, const std::string& field_name) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  out << "# vtk DataFile Version 3.0\nsphere mesh level " << mesh.level << "\nASCII\n"
      << "DATASET UNSTRUCTURED_GRID\nPOINTS " << mesh.vertices.size() << " double\n";
  for (const Vec3& v : mesh.vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  out << "CELLS " << mesh.triangles.size() << ' ' << 4 * mesh.triangles.size() << '\n';
  for (const Tri& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.triangles.size() << '\n';
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) out << "5\n";
  std::vector<double> data = cell_data;
  if (data.empty()) {
    data.assign(mesh.triangles.size(), 0.0);
    for (int r : mesh.representatives) data[r] = 1.0;
  }
  if (data.size() != mesh.triangles.size()) throw std::invalid_argument("cell data size mismatch");
  out << "CELL_DATA " << data.size() << "\nSCALARS " << field_name << " double 1\nLOOKUP_TABLE default\n";
  for (double d : data) out << d << '\n';
}

}  // namespace rte
