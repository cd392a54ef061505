#pragma once

#include "rte/types.hpp"

#include <functional>

namespace rte {

/// Leading generalized eigenpairs of a symmetric pencil (S, M).
struct EigenTruncation {
  Matrix W;       ///< n x d, M-orthonormal columns
  Vector lambda;  ///< non-increasing

  [[nodiscard]] Index dim() const { return W.cols(); }
};

/// d_N = (N+1)(N+2)/2, and 0 for N = -1.
Index truncation_dim(int N);

struct EigenOptions {
  Index dense_limit = 4096;  ///< dense solver up to this size, Krylov above
  double tol = 1e-10;        ///< relative residual for the Krylov path
  int max_restarts = 50;
  Index block = 0;           ///< Krylov block width, 0 picks d + 8
  int krylov_steps = 6;      ///< blocks per restart cycle
};

using BlockApply = std::function<Matrix(const Matrix&)>;

/// Leading d eigenpairs of S w = lambda M w. M must be SPD and is taken to
/// be cheap to factor (diagonal or small-block diagonal).
EigenTruncation truncated_eig(const Matrix& S, const SpMat& M, Index d, const EigenOptions& opt = {});

/// Same, with S only available through products S X.
EigenTruncation truncated_eig(const BlockApply& S, const SpMat& M, Index d, const EigenOptions& opt = {});

}  // namespace rte
