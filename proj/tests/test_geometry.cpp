#include <doctest.h>

#include "rte/assembly.hpp"
#include "rte/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <set>

using namespace rte;

TEST_CASE("sphere mesh is antipodally paired") {
  for (int level = 0; level <= 3; ++level) {
    const SphereMesh m = build_sphere_mesh(level);
    CHECK(m.num_triangles() == 8u * (1u << (2 * level)));
    CHECK(m.num_even() * 2 == m.num_triangles());
    CHECK(m.num_odd() == 3 * m.num_even());
    double area = 0.0;
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
      const int a = m.antipode_of[t];
      CHECK(m.antipode_of[a] == static_cast<int>(t));
      CHECK((m.flat_centroid(static_cast<int>(t)) + m.flat_centroid(a)).norm() < 1e-14);
      area += m.spherical_area(static_cast<int>(t));
    }
    CHECK(area == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-12));
    for (const auto& v : m.vertices) CHECK(std::abs(v.norm() - 1.0) < 1e-14);
  }
}

TEST_CASE("one representative per antipodal pair") {
  const SphereMesh m = build_sphere_mesh(2);
  std::set<int> reps(m.representatives.begin(), m.representatives.end());
  CHECK(reps.size() == m.num_even());
  for (int r : m.representatives) {
    CHECK(in_reference_half_sphere(m.flat_centroid(r)));
    CHECK_FALSE(reps.count(m.antipode_of[r]));
  }
}

TEST_CASE("rectangle mesh, refinement and boundary") {
  const SpatialMesh m = build_rectangle_mesh(3, 2, 3.0, 2.0);
  CHECK(m.num_triangles() == 12);
  CHECK(m.num_vertices() == 12);
  CHECK(m.boundary_edges.size() == 10);
  CHECK(m.normals.size() == 4);
  double area = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    CHECK(m.area(static_cast<int>(t)) > 0.0);
    area += m.area(static_cast<int>(t));
  }
  CHECK(area == doctest::Approx(6.0));
  const SpatialMesh r = refine_uniform(m);
  CHECK(r.num_triangles() == 48);
  CHECK(r.boundary_edges.size() == 20);
  double len = 0.0;
  for (const auto& e : r.boundary_edges) len += e.length;
  CHECK(len == doctest::Approx(10.0));
  const auto mask = r.boundary_vertex_mask();
  CHECK(std::count(mask.begin(), mask.end(), true) == 20);
}

TEST_CASE("lattice mesh sizes and materials") {
  const SpatialMesh m0 = build_lattice_mesh(0);
  CHECK(m0.num_vertices() == 3249);
  CHECK(m0.num_triangles() == 6272);
  CHECK(build_lattice_mesh(1).num_vertices() == 12769);
  CHECK(lattice_material({3.5, 3.5}) == 2);
  CHECK(lattice_material({0.5, 0.5}) == 0);
  int absorbers = 0;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) absorbers += lattice_material({i + 0.5, j + 0.5}) == 1;
  CHECK(absorbers == 11);
  const OpticalField f = lattice_field(m0, 0.5);
  CHECK(f.scattering_ratio() == doctest::Approx(10.0 / 10.01));
  double q = 0.0;
  for (std::size_t t = 0; t < m0.num_triangles(); ++t) q += f.source_q[t] * m0.area(static_cast<int>(t));
  CHECK(q == doctest::Approx(1.0));
}

TEST_CASE("optical field validation") {
  const SpatialMesh m = build_rectangle_mesh(1, 1, 1.0, 1.0);
  OpticalField f = homogeneous_field(m, 1.0, 1.0, 1.0, 0.0);
  CHECK_NOTHROW(f.validate(m));
  f.sigma_s[0] = -1.0;
  CHECK_THROWS_AS(f.validate(m), std::invalid_argument);
  CHECK_THROWS_AS(homogeneous_field(m, 0.0, 0.0, 1.0, 0.0), std::invalid_argument);
  f = homogeneous_field(m, 1.0, 1.0, 1.0, 0.0);
  f.sigma_a.pop_back();
  CHECK_THROWS_AS(f.validate(m), std::invalid_argument);
}
