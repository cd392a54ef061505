#include "rte/eigen_trunc.hpp"

#include <Eigen/SparseCholesky>

#include <random>
#include <sstream>
#include <stdexcept>

namespace rte {

namespace {

using Factor = Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::NaturalOrdering<int>>;

void check_args(Index n, const SpMat& M, Index d) {
  if (M.rows() != n || M.cols() != n) throw std::invalid_argument("truncated_eig: dimension mismatch");
  if (d < 1 || d > n) throw std::invalid_argument("truncated_eig: requested dimension out of range");
}

void factor(Factor& llt, const SpMat& M) {
  llt.compute(M);
  if (llt.info() != Eigen::Success) throw std::runtime_error("truncated_eig: mass matrix is not positive definite");
}

// C = L^{-1} X, and back: W = L^{-T} V
Matrix lower_solve(const Factor& llt, Matrix X) {
  llt.matrixL().solveInPlace(X);
  return X;
}

Matrix upper_solve(const Factor& llt, Matrix X) {
  llt.matrixU().solveInPlace(X);
  return X;
}

EigenTruncation dense_path(const Matrix& S, const Factor& llt, Index d) {
  Matrix C = lower_solve(llt, S);
  C = lower_solve(llt, Matrix(C.transpose()));
  C = 0.5 * (C + C.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(C);
  if (es.info() != Eigen::Success) throw std::runtime_error("truncated_eig: dense eigensolver failed");
  EigenTruncation out;
  out.lambda = es.eigenvalues().tail(d).reverse();
  out.W = upper_solve(llt, es.eigenvectors().rightCols(d).rowwise().reverse());
  return out;
}

void orthonormalize_against(Matrix& X, const Matrix& Q) {
  for (int pass = 0; pass < 2; ++pass)
    if (Q.cols() > 0) X -= Q * (Q.transpose() * X);
}

// Orthonormal basis of range(X); drops numerically dependent columns.
Matrix orth(const Matrix& X) {
  Eigen::ColPivHouseholderQR<Matrix> qr(X);
  qr.setThreshold(1e-10);
  const Index r = qr.rank();
  Matrix Q = qr.householderQ() * Matrix::Identity(X.rows(), r);
  return Q;
}

}  // namespace

Index truncation_dim(int N) {
  if (N < -1) throw std::invalid_argument("truncation order must be >= -1");
  return static_cast<Index>(N + 1) * (N + 2) / 2;
}

EigenTruncation truncated_eig(const Matrix& S, const SpMat& M, Index d, const EigenOptions& opt) {
  if (S.rows() != S.cols()) throw std::invalid_argument("truncated_eig: S is not square");
  check_args(S.rows(), M, d);
  if (S.rows() > opt.dense_limit) return truncated_eig([&S](const Matrix& X) { return Matrix(S * X); }, M, d, opt);
  Factor llt;
  factor(llt, M);
  return dense_path(S, llt, d);
}

// Block Krylov with full reorthogonalization and thick restart on the
// congruence-transformed operator C = L^{-1} S L^{-T}.
EigenTruncation truncated_eig(const BlockApply& S, const SpMat& M, Index d, const EigenOptions& opt) {
  const Index n = M.rows();
  check_args(n, M, d);
  Factor llt;
  factor(llt, M);
  auto apply_C = [&](const Matrix& V) { return lower_solve(llt, S(upper_solve(llt, V))); };

  const Index b = std::min(n, opt.block > 0 ? opt.block : d + 8);
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> nd;
  Matrix X(n, b);
  for (Index j = 0; j < b; ++j)
    for (Index i = 0; i < n; ++i) X(i, j) = nd(rng);
  X = orth(X);

  double worst = 0.0;
  for (int cycle = 0; cycle <= opt.max_restarts; ++cycle) {
    Matrix Q = X;
    Matrix CQ = apply_C(X);
    Matrix blk = CQ;
    for (int s = 1; s < opt.krylov_steps && Q.cols() < n; ++s) {
      orthonormalize_against(blk, Q);
      Matrix N = orth(blk);
      if (N.cols() == 0) break;
      Matrix CN = apply_C(N);
      Matrix Qn(n, Q.cols() + N.cols()), CQn(n, Q.cols() + N.cols());
      Qn << Q, N;
      CQn << CQ, CN;
      Q.swap(Qn);
      CQ.swap(CQn);
      blk = CN;
    }
    Matrix H = Q.transpose() * CQ;
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    const Index m = H.rows();
    const Index keep = std::min(m, b);
    Matrix Y = es.eigenvectors().rightCols(keep).rowwise().reverse();
    Vector theta = es.eigenvalues().tail(keep).reverse();
    Matrix V = Q * Y;
    Matrix R = CQ * Y - V * theta.asDiagonal();
    const double scale = std::max(std::abs(theta(0)), 1e-300);
    worst = 0.0;
    for (Index j = 0; j < std::min(d, keep); ++j) worst = std::max(worst, R.col(j).norm() / scale);
    if (keep >= d && worst <= opt.tol) {
      EigenTruncation out;
      out.lambda = theta.head(d);
      out.W = upper_solve(llt, V.leftCols(d));
      return out;
    }
    X = orth(V);
  }
  std::ostringstream msg;
  msg << "truncated_eig: Krylov iteration did not converge, residual " << worst;
  throw std::runtime_error(msg.str());
}

}  // namespace rte
