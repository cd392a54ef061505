#pragma once

#include "rte/assembly.hpp"

namespace rte {

struct HConfig {
  double eta_adm = 1.4;  ///< admissibility parameter
  int p = 4;             ///< Chebyshev points per axis
  int n_min = 64;        ///< minimal cluster size
  double recompress_tol = 0.0;  ///< relative SVD truncation of low-rank blocks; 0 disables

  void validate() const;
  bool operator==(const HConfig&) const = default;
};

using Box3 = Eigen::AlignedBox3d;

struct ClusterNode {
  Index begin = 0;  ///< range into ClusterTree::perm
  Index end = 0;
  Box3 box;
  int children[2] = {-1, -1};
  int depth = 0;

  [[nodiscard]] Index size() const { return end - begin; }
  [[nodiscard]] bool is_leaf() const { return children[0] < 0; }
};

/// Binary geometric bisection tree; node 0 is the root.
struct ClusterTree {
  std::vector<int> perm;  ///< tree order -> original index
  std::vector<ClusterNode> nodes;

  [[nodiscard]] std::vector<int> leaves() const;
  [[nodiscard]] int depth() const;
};

/// Splits along the longest box axis at the median until clusters hold at
/// most n_min points. Boxes cover `points` or, when given, the per-point
/// support boxes, inflated by 1e-6.
ClusterTree build_cluster_tree(const std::vector<Vec3>& points, const HConfig& cfg,
                               const std::vector<Box3>* supports = nullptr);

enum class Parity { Even, Odd };

struct HBlock {
  int row_node = 0;
  int col_node = 0;
  bool low_rank = false;
  Matrix dense;  ///< full block when not low rank
  Matrix U;      ///< block = U * V^T
  Matrix V;
};

struct HStats {
  std::size_t dense_blocks = 0;
  std::size_t low_rank_blocks = 0;
  Index max_rank = 0;
  std::size_t stored_bytes = 0;
  std::size_t dense_bytes = 0;
};

/// Hierarchical approximation of a folded angular scattering Gramian.
class HMatrixApprox {
 public:
  HMatrixApprox() = default;

  [[nodiscard]] Index rows() const { return n_; }
  [[nodiscard]] Index cols() const { return n_; }
  /// y = H x
  [[nodiscard]] Vector apply(const Vector& x) const;
  /// Y = H X for a block of columns.
  [[nodiscard]] Matrix apply(const Matrix& X) const;
  /// Y = X H^T
  [[nodiscard]] Matrix apply_right(const Matrix& X) const;
  [[nodiscard]] Matrix to_dense() const;
  [[nodiscard]] HStats stats() const;
  [[nodiscard]] const std::vector<HBlock>& blocks() const { return blocks_; }
  [[nodiscard]] const ClusterTree& tree() const { return tree_; }
  [[nodiscard]] int multiplicity() const { return mult_; }

 private:
  friend HMatrixApprox compress_scattering(const SphereMesh&, const PhaseFunction&, Parity, const HConfig&,
                                           const AngularQuadrature&);
  Matrix gather(const Matrix& X) const;
  void add_scatter(const Matrix& Yp, Matrix& Y) const;

  Index n_ = 0;
  int mult_ = 1;  ///< basis functions per representative (1 even, 3 odd)
  ClusterTree tree_;
  std::vector<Index> order_;  ///< tree order -> original basis index
  std::vector<HBlock> blocks_;
};

/// Admissible blocks use tensor Chebyshev interpolation of the radially
/// extended kernel on the cluster boxes; the antipodal half of each basis
/// support is folded into the kernel. Everything else is integrated densely.
HMatrixApprox compress_scattering(const SphereMesh& mesh, const PhaseFunction& phase, Parity parity,
                                  const HConfig& cfg, const AngularQuadrature& quad = {});

}  // namespace rte
