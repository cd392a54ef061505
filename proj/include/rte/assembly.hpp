#pragma once

#include "rte/geometry.hpp"
#include "rte/kernel.hpp"

#include <memory>

namespace rte {

/// Piecewise constant optical parameters, one value per spatial triangle.
struct OpticalField {
  std::vector<double> sigma_a;
  std::vector<double> sigma_s;
  std::vector<double> source_q;  ///< isotropic source
  PhaseFunction phase;

  [[nodiscard]] double sigma_t(std::size_t cell) const { return sigma_a[cell] + sigma_s[cell]; }
  /// c = max over cells of sigma_s / sigma_t (cells with sigma_t = 0 contribute 0).
  [[nodiscard]] double scattering_ratio() const;
  /// Throws std::invalid_argument on size mismatch or negative coefficients.
  void validate(const SpatialMesh& mesh) const;
};

/// Lattice benchmark on (0,7)^2: 11 absorbing unit cells (sigma_s=0,
/// sigma_a=1), source cell [3,4]^2 with q=1, background sigma_s=10,
/// sigma_a=0.01. Cells are classified by triangle centroid.
OpticalField lattice_field(const SpatialMesh& mesh, double g);

/// Lattice material index of a point: 0 background, 1 absorber, 2 source.
int lattice_material(const Vec2& point);

OpticalField homogeneous_field(const SpatialMesh& mesh, double sigma_a, double sigma_s, double q, double g);

/// Spatial (Gothic) matrices.
struct SpatialMatrices {
  SpMat Mt_plus;  ///< P1 mass weighted by sigma_t, n_R^+ x n_R^+
  SpMat Ms_plus;  ///< P1 mass weighted by sigma_s
  Vector Mt_minus;  ///< diagonal of the P0 mass weighted by sigma_t, n_R^-
  Vector Ms_minus;  ///< diagonal of the P0 mass weighted by sigma_s
  std::array<SpMat, 2> D;  ///< (D_n)_{j,i} = int dphi_i/dr_n chi_j, n_R^- x n_R^+
  Vector source_plus;   ///< int q phi_i
  Vector source_minus;  ///< int q chi_j
};

SpatialMatrices assemble_spatial(const SpatialMesh& mesh, const OpticalField& field);

/// Quadrature settings for the angular integrals.
struct AngularQuadrature {
  int single_degree = 7;     ///< single spherical integrals
  int far_degree = 4;        ///< per panel in the double integrals
  int near_degree = 7;       ///< near-field panels when the kernel is peaked
  int near_subdivision = 1;  ///< 4^near_subdivision sub-panels in the near field
  double near_g = 0.7;       ///< near-field upgrade only for g >= near_g
  double near_factor = 2.0;  ///< near if distance < near_factor * panel diameter
};

/// Odd basis on representative k: psi_{3k+j}(s) = lambda_j(s) on T_k with
/// s = sum_j lambda_j(s) v_j, extended by psi(-s) = -psi(s).
struct OddBasis {
  std::vector<Eigen::Matrix3d> inverse_vertices;  ///< lambda(s) = inverse_vertices[k] * s

  [[nodiscard]] Eigen::Vector3d eval(int rep, const Vec3& s) const { return inverse_vertices[rep] * s; }
};

/// Angular (sans-serif) matrices.
struct AngularMatrices {
  Vector M_plus;  ///< diagonal Gramian of the even indicators (paired areas), n_S^+
  SpMat M_minus;  ///< 3x3 block-diagonal Gramian of the odd basis, n_S^-
  std::vector<Eigen::Matrix3d> M_minus_blocks;
  std::array<SpMat, 2> A;  ///< (A_n)_{l,k} = int s_n psi_l mu_k, n_S^- x n_S^+
  Matrix S_plus;   ///< dense even scattering Gramian (empty if not assembled)
  Matrix S_minus;  ///< dense odd scattering Gramian (empty if not assembled)
  OddBasis odd_basis;
};

/// Builds every angular matrix; the dense scattering Gramians are skipped when
/// with_scattering is false.
AngularMatrices assemble_angular(const SphereMesh& mesh, const PhaseFunction& phase,
                                 const AngularQuadrature& quad = {}, bool with_scattering = true);

/// Quadrature points of one representative panel: points (nq x 3), weights
/// rescaled to the exact spherical area, and weights times odd nodal values.
struct PanelRule {
  Eigen::Matrix<double, Eigen::Dynamic, 3> points;
  Vector weights;
  Eigen::Matrix<double, Eigen::Dynamic, 3> lambda_w;
};

/// Folded double integrals over pairs of antipodal panel pairs.
class ScatteringIntegrator {
 public:
  ScatteringIntegrator(const SphereMesh& mesh, const PhaseFunction& phase, const AngularQuadrature& quad = {});

  /// S+_{ab} and the 3x3 block S-_{ab}; either output may be null.
  void pair(int a, int b, double* even, Eigen::Matrix3d* odd) const;

  [[nodiscard]] int size() const { return static_cast<int>(far_.size()); }
  [[nodiscard]] const PanelRule& far_rule(int k) const { return far_[k]; }
  [[nodiscard]] const PhaseFunction& phase() const { return phase_; }

 private:
  PhaseFunction phase_;
  AngularQuadrature quad_;
  bool peaked_ = false;
  std::vector<PanelRule> far_, near_;
  std::vector<Vec3> center_;
  std::vector<double> radius_, diameter_;
};

/// Dense scattering Gramians only (S_plus, S_minus), symmetrized.
void assemble_scattering(const SphereMesh& mesh, const PhaseFunction& phase, const AngularQuadrature& quad,
                         Matrix* S_plus, Matrix* S_minus);

/// Boundary matrices: R_k = sum_n omega(k,n) * edge_mass[n].
struct BoundaryMatrices {
  std::vector<SpMat> edge_mass;  ///< per distinct outward normal, n_R^+ x n_R^+
  Matrix omega;                  ///< n_S^+ x (number of normals)

  [[nodiscard]] SpMat block(std::size_t k) const;
};

/// omega(k,n) = int over the k-th antipodal pair of |s.n|.
BoundaryMatrices assemble_boundary(const SpatialMesh& smesh, const SphereMesh& amesh,
                                   int degree = AngularQuadrature{}.single_degree);

/// q_plus = vec(F m^T) with F_i = int q phi_i and m_k = int mu_k; q_minus = 0
/// because the odd basis integrates to zero over each antipodal pair. A
/// nonzero inflow datum is not supported.
std::pair<Vector, Vector> assemble_rhs(const SpatialMatrices& spatial, const AngularMatrices& angular,
                                       std::size_t num_odd_cells, double inflow = 0.0);

/// Everything needed to apply the operators of the mixed system.
struct AssembledSystem {
  SpatialMesh smesh;
  SphereMesh amesh;
  OpticalField field;
  SpatialMatrices spatial;
  AngularMatrices angular;
  BoundaryMatrices boundary;
  Vector q_plus;
  Vector q_minus;
  double c = 0.0;  ///< max sigma_s / sigma_t

  [[nodiscard]] Index nR_plus() const { return static_cast<Index>(smesh.num_vertices()); }
  [[nodiscard]] Index nR_minus() const { return static_cast<Index>(smesh.num_triangles()); }
  [[nodiscard]] Index nS_plus() const { return static_cast<Index>(amesh.num_even()); }
  [[nodiscard]] Index nS_minus() const { return static_cast<Index>(amesh.num_odd()); }
  [[nodiscard]] Index even_size() const { return nR_plus() * nS_plus(); }
  [[nodiscard]] Index odd_size() const { return nR_minus() * nS_minus(); }
  [[nodiscard]] double g() const { return field.phase.g; }
};

AssembledSystem assemble_system(SpatialMesh smesh, SphereMesh amesh, OpticalField field,
                                const AngularQuadrature& quad = {}, bool dense_scattering = true);

}  // namespace rte
