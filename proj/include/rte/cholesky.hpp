#pragma once

#include "rte/types.hpp"

#include <memory>

struct cholmod_common_struct;
struct cholmod_factor_struct;

namespace rte {

/// CHOLMOD workspace shared by every factor created from it.
class CholmodCommon {
 public:
  CholmodCommon();
  ~CholmodCommon();
  CholmodCommon(const CholmodCommon&) = delete;
  CholmodCommon& operator=(const CholmodCommon&) = delete;

  cholmod_common_struct* get() { return common_.get(); }

 private:
  std::unique_ptr<cholmod_common_struct> common_;
};

/// Sparse LL^T of a symmetric positive definite matrix; only the lower
/// triangle of the input is read.
class SparseCholesky {
 public:
  explicit SparseCholesky(std::shared_ptr<CholmodCommon> common = std::make_shared<CholmodCommon>());
  ~SparseCholesky();
  SparseCholesky(SparseCholesky&& other) noexcept;
  SparseCholesky& operator=(SparseCholesky&& other) noexcept;
  SparseCholesky(const SparseCholesky&) = delete;
  SparseCholesky& operator=(const SparseCholesky&) = delete;

  /// Fill-reducing ordering and symbolic factorization.
  void analyze(const SpMat& A);
  /// Another factor with the same symbolic structure, not yet factorized.
  [[nodiscard]] SparseCholesky clone_symbolic() const;
  /// Throws std::runtime_error when A is not positive definite.
  void factorize(const SpMat& A);

  [[nodiscard]] Vector solve(const Vector& b) const;
  [[nodiscard]] Matrix solve(const Matrix& B) const;
  [[nodiscard]] Index rows() const { return n_; }
  [[nodiscard]] std::size_t factor_nnz() const;

 private:
  std::shared_ptr<CholmodCommon> common_;
  cholmod_factor_struct* factor_ = nullptr;
  Index n_ = 0;
};

}  // namespace rte
