#pragma once

#include "rte/assembly.hpp"
#include "rte/cholesky.hpp"
#include "rte/eigen_trunc.hpp"
#include "rte/hmatrix.hpp"

#include <memory>
#include <stdexcept>
#include <string>

namespace rte {

/// (B kron C) x = vec(C mat(x) B^T), column-major, without forming B kron C.
template <class AngularT, class SpatialT>
Vector kron_matvec(const AngularT& B, const SpatialT& C, const Vector& x) {
  if (x.size() != C.cols() * B.cols()) throw std::invalid_argument("kron_matvec: dimension mismatch");
  Eigen::Map<const Matrix> X(x.data(), C.cols(), B.cols());
  Matrix CX = C * X;
  Matrix Y = CX * B.transpose();
  return Eigen::Map<const Vector>(Y.data(), Y.size());
}

struct KroneckerTerm {
  SpMat angular;
  SpMat spatial;
};

/// Sum of Kronecker products angular_i kron spatial_i.
class KroneckerOperator {
 public:
  KroneckerOperator() = default;
  explicit KroneckerOperator(std::vector<KroneckerTerm> terms);

  [[nodiscard]] Index rows() const { return rows_; }
  [[nodiscard]] Index cols() const { return cols_; }
  [[nodiscard]] const std::vector<KroneckerTerm>& terms() const { return terms_; }
  [[nodiscard]] Vector apply(const Vector& x) const;
  [[nodiscard]] Vector apply_transpose(const Vector& y) const;
  [[nodiscard]] Matrix to_dense() const;

 private:
  std::vector<KroneckerTerm> terms_;
  Index rows_ = 0, cols_ = 0;
};

/// Symmetric angular scattering Gramian, dense or compressed.
class AngularScattering {
 public:
  AngularScattering() = default;
  explicit AngularScattering(Matrix dense);
  explicit AngularScattering(std::shared_ptr<const HMatrixApprox> h);

  /// X S
  [[nodiscard]] Matrix apply_right(const Matrix& X) const;
  [[nodiscard]] Matrix apply(const Matrix& X) const { return apply_right(X.transpose()).transpose(); }
  [[nodiscard]] Index size() const;
  [[nodiscard]] bool compressed() const { return h_ != nullptr; }
  [[nodiscard]] const Matrix& dense() const { return dense_; }
  [[nodiscard]] const HMatrixApprox* hmatrix() const { return h_.get(); }

 private:
  Matrix dense_;
  std::shared_ptr<const HMatrixApprox> h_;
};

struct OperatorConfig {
  double inner_tol = 1e-13;
  int inner_max_iter = 1000;
  int N_pre = 5;                     ///< odd truncation of the inner preconditioner
  Index compressed_switch = 4096;    ///< compressed scattering when n_S exceeds this
  HConfig hconfig;
  AngularQuadrature quad;
  EigenOptions eigen;

  void validate() const;
};

struct InnerSolveStats {
  int iterations = 0;
  std::vector<double> history;  ///< relative preconditioned residuals
};

class InnerSolveError : public std::runtime_error {
 public:
  InnerSolveError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  [[nodiscard]] const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// The even-parity operator E = A^T (M- - K-)^{-1} A + M+ + R and the
/// pieces it is built from. Vectors are vec(U) with U spatial x angular.
class EvenParityOperator {
 public:
  explicit EvenParityOperator(const AssembledSystem& sys, const OperatorConfig& cfg = {});

  [[nodiscard]] const AssembledSystem& system() const { return sys_; }
  [[nodiscard]] const OperatorConfig& config() const { return cfg_; }

  [[nodiscard]] Vector apply_A(const Vector& x_even) const;
  [[nodiscard]] Vector apply_At(const Vector& x_odd) const;
  [[nodiscard]] Vector apply_R(const Vector& x_even) const;
  [[nodiscard]] Vector apply_Mplus(const Vector& x_even) const;
  [[nodiscard]] Vector apply_Kplus(const Vector& x_even) const;
  [[nodiscard]] Vector apply_Mminus(const Vector& x_odd) const;
  [[nodiscard]] Vector apply_Minus_inv(const Vector& x_odd) const;  ///< (M-)^{-1}
  [[nodiscard]] Vector apply_Kminus(const Vector& x_odd) const;
  /// (M- - K-) x
  [[nodiscard]] Vector apply_MmK(const Vector& x_odd) const;
  /// (M- - K-_N) x with the truncation of order N <= N_pre.
  [[nodiscard]] Vector apply_MmK_N(int N, const Vector& x_odd) const;

  /// Exact inverse of M- - K-_N; N = -1 drops the eigenspace term.
  [[nodiscard]] Vector apply_MmK_inv_precond(int N, const Vector& b) const;
  [[nodiscard]] Vector apply_MmK_inv_precond(const Vector& b) const { return apply_MmK_inv_precond(cfg_.N_pre, b); }
  /// PCG on (M- - K-) x = b from x = 0. Throws InnerSolveError.
  [[nodiscard]] Vector solve_MmK(const Vector& b, double tol, int N, InnerSolveStats* stats = nullptr) const;
  [[nodiscard]] Vector solve_MmK(const Vector& b, InnerSolveStats* stats = nullptr) const {
    return solve_MmK(b, cfg_.inner_tol, cfg_.N_pre, stats);
  }

  [[nodiscard]] Vector apply_E(const Vector& x) const;
  /// (E - K+) x
  [[nodiscard]] Vector apply_B(const Vector& x) const;
  [[nodiscard]] Vector apply_E0(const Vector& x) const;
  [[nodiscard]] Vector apply_E0_inv(const Vector& x) const;
  /// l steps of z <- z - E0^{-1}(E z - b) from z = 0.
  [[nodiscard]] Vector apply_P1(int l, const Vector& b) const;

  [[nodiscard]] const EigenTruncation& odd_truncation() const { return odd_trunc_; }
  [[nodiscard]] const AngularScattering& S_plus() const { return S_plus_; }
  [[nodiscard]] const AngularScattering& S_minus() const { return S_minus_; }
  [[nodiscard]] const SpMat& M_minus_inverse() const { return Mminus_inv_; }
  /// (1 - c g)^{-1}
  [[nodiscard]] double e0_scale() const { return e0_scale_; }
  [[nodiscard]] SpMat E0_block(Index k) const;

  [[nodiscard]] long inner_iterations() const { return inner_iterations_; }
  [[nodiscard]] long e_applications() const { return e_applications_; }
  void reset_counters() const {
    inner_iterations_ = 0;
    e_applications_ = 0;
  }

 private:
  void build_scattering();
  void build_E0();
  void check_even(const Vector& x) const;
  void check_odd(const Vector& x) const;

  const AssembledSystem& sys_;
  OperatorConfig cfg_;
  KroneckerOperator A_;
  AngularScattering S_plus_, S_minus_;
  SpMat Mminus_inv_;
  EigenTruncation odd_trunc_;
  double e0_scale_ = 1.0;
  std::array<std::array<SpMat, 2>, 2> G_;  ///< D_i^T (Mt-)^{-1} D_j
  Eigen::Matrix<double, Eigen::Dynamic, 3> gamma_;  ///< per block: (0,0), (0,1), (1,1)
  std::vector<SparseCholesky> E0_chol_;
  mutable long inner_iterations_ = 0;
  mutable long e_applications_ = 0;
};

}  // namespace rte
