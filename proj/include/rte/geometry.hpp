#pragma once

#include "rte/types.hpp"

#include <string>
#include <utility>

namespace rte {

/// Antipodally symmetric triangulation of the unit sphere.
///
/// Every triangle K has a partner antipode_of[K] whose vertices are the
/// negated vertices of K. One triangle of each pair is a representative; the
/// representatives carry the even (piecewise constant) and odd (piecewise
/// linear) angular basis functions.
struct SphereMesh {
  std::vector<Vec3> vertices;
  std::vector<Tri> triangles;
  std::vector<int> antipode_of;
  std::vector<int> representatives;
  int level = 0;

  [[nodiscard]] std::size_t num_triangles() const { return triangles.size(); }
  /// n_S^+ : number of even angular basis functions.
  [[nodiscard]] std::size_t num_even() const { return representatives.size(); }
  /// n_S^- = 3 n_S^+ : number of odd angular basis functions.
  [[nodiscard]] std::size_t num_odd() const { return 3 * representatives.size(); }

  [[nodiscard]] Vec3 flat_centroid(int tri) const;
  /// Exact area of the geodesic triangle.
  [[nodiscard]] double spherical_area(int tri) const;
  /// Largest chordal edge length.
  [[nodiscard]] double diameter(int tri) const;
};

/// Octahedron refined `level` times; 8 * 4^level triangles.
SphereMesh build_sphere_mesh(int level);

/// Half-sphere rule: flat midpoint has s3 > 0, ties broken by s2 > 0, then s1 > 0.
bool in_reference_half_sphere(const Vec3& midpoint);

struct BoundaryEdge {
  std::array<int, 2> vertices;
  Vec2 normal;       ///< outward unit normal
  int normal_id = 0; ///< index into SpatialMesh::normals
  double length = 0.0;
};

/// Conforming triangulation of a planar polygon. Triangles are stored
/// counter-clockwise.
struct SpatialMesh {
  std::vector<Vec2> vertices;
  std::vector<Tri> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<Vec2> normals;  ///< distinct outward normals
  double h = 0.0;

  [[nodiscard]] std::size_t num_vertices() const { return vertices.size(); }   ///< n_R^+
  [[nodiscard]] std::size_t num_triangles() const { return triangles.size(); } ///< n_R^-
  [[nodiscard]] double area(int tri) const;
  [[nodiscard]] Vec2 centroid(int tri) const;
  /// Boundary vertices flagged true.
  [[nodiscard]] std::vector<bool> boundary_vertex_mask() const;
};

/// Structured grid of nx * ny rectangles on [x0,x0+lx] x [y0,y0+ly], each
/// split into two triangles along alternating diagonals.
SpatialMesh build_rectangle_mesh(int nx, int ny, double lx, double ly, double x0 = 0.0,
                                 double y0 = 0.0);

/// Uniform quadrisection via edge midpoints.
SpatialMesh refine_uniform(const SpatialMesh& mesh);

/// Lattice geometry (0,7)^2: 56x56 squares at refine=0, then `refine`
/// quadrisections. refine=0 gives 57^2 = 3249 vertices.
SpatialMesh build_lattice_mesh(int refine);

/// Recomputes boundary edges, normals and h from vertices/triangles.
void finalize_spatial_mesh(SpatialMesh& mesh);

/// Legacy-VTK triangle soup with one named cell-data field.
void write_sphere_vtk(const std::string& path, const SphereMesh& mesh,
                      const std::vector<double>& cell_data = {},
                      const std::string& field_name = "representative");

}  // namespace rte
