#include "rte/operators.hpp"

#include <cmath>
#include <sstream>

namespace rte {

namespace {

Eigen::Map<const Matrix> as_matrix(const Vector& x, Index rows, Index cols) {
  return Eigen::Map<const Matrix>(x.data(), rows, cols);
}

Vector as_vector(const Matrix& X) { return Eigen::Map<const Vector>(X.data(), X.size()); }

// Z B for sparse B, column axpys
template <class Dense>
Matrix times_sparse(const Dense& Z, const SpMat& B) {
  Matrix Y = Matrix::Zero(Z.rows(), B.cols());
  for (Index j = 0; j < B.outerSize(); ++j)
    for (SpMat::InnerIterator it(B, j); it; ++it) Y.col(j).noalias() += it.value() * Z.col(it.row());
  return Y;
}

// Z B^T for sparse B
template <class Dense>
Matrix times_sparse_transpose(const Dense& Z, const SpMat& B) {
  Matrix Y = Matrix::Zero(Z.rows(), B.rows());
  for (Index j = 0; j < B.outerSize(); ++j)
    for (SpMat::InnerIterator it(B, j); it; ++it) Y.col(it.row()).noalias() += it.value() * Z.col(j);
  return Y;
}

}  // namespace

KroneckerOperator::KroneckerOperator(std::vector<KroneckerTerm> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) return;
  rows_ = terms_[0].angular.rows() * terms_[0].spatial.rows();
  cols_ = terms_[0].angular.cols() * terms_[0].spatial.cols();
  for (const auto& t : terms_) {
    if (t.angular.rows() != terms_[0].angular.rows() || t.angular.cols() != terms_[0].angular.cols() ||
        t.spatial.rows() != terms_[0].spatial.rows() || t.spatial.cols() != terms_[0].spatial.cols())
      throw std::invalid_argument("KroneckerOperator: inconsistent term dimensions");
  }
}

Vector KroneckerOperator::apply(const Vector& x) const {
  if (x.size() != cols_) throw std::invalid_argument("KroneckerOperator::apply: dimension mismatch");
  if (terms_.empty()) return Vector::Zero(rows_);
  Eigen::Map<const Matrix> X(x.data(), terms_[0].spatial.cols(), terms_[0].angular.cols());
  Matrix Y = Matrix::Zero(terms_[0].spatial.rows(), terms_[0].angular.rows());
  for (const auto& t : terms_) {
    Matrix CX = t.spatial * X;
    Y += times_sparse_transpose(CX, t.angular);
  }
  return as_vector(Y);
}

Vector KroneckerOperator::apply_transpose(const Vector& y) const {
  if (y.size() != rows_) throw std::invalid_argument("KroneckerOperator::apply_transpose: dimension mismatch");
  if (terms_.empty()) return Vector::Zero(cols_);
  Eigen::Map<const Matrix> Y(y.data(), terms_[0].spatial.rows(), terms_[0].angular.rows());
  Matrix X = Matrix::Zero(terms_[0].spatial.cols(), terms_[0].angular.cols());
  for (const auto& t : terms_) {
    Matrix CY = t.spatial.transpose() * Y;
    X += times_sparse(CY, t.angular);
  }
  return as_vector(X);
}

Matrix KroneckerOperator::to_dense() const {
  Matrix out = Matrix::Zero(rows_, cols_);
  for (const auto& t : terms_) {
    Matrix B = Matrix(t.angular), C = Matrix(t.spatial);
    for (Index i = 0; i < B.rows(); ++i)
      for (Index j = 0; j < B.cols(); ++j)
        if (B(i, j) != 0.0) out.block(i * C.rows(), j * C.cols(), C.rows(), C.cols()) += B(i, j) * C;
  }
  return out;
}

AngularScattering::AngularScattering(Matrix dense) : dense_(std::move(dense)) {
  if (dense_.rows() != dense_.cols()) throw std::invalid_argument("AngularScattering: matrix is not square");
}

AngularScattering::AngularScattering(std::shared_ptr<const HMatrixApprox> h) : h_(std::move(h)) {}

Matrix AngularScattering::apply_right(const Matrix& X) const {
  if (h_) return h_->apply_right(X);
  if (X.cols() != dense_.rows()) throw std::invalid_argument("AngularScattering: dimension mismatch");
  return X * dense_;
}

Index AngularScattering::size() const { return h_ ? h_->rows() : dense_.rows(); }

void OperatorConfig::validate() const {
  if (!(inner_tol > 0.0)) throw std::invalid_argument("inner_tol must be positive");
  if (inner_max_iter < 1) throw std::invalid_argument("inner_max_iter must be >= 1");
  if (N_pre < -1 || (N_pre >= 0 && N_pre % 2 == 0))
    throw std::invalid_argument("N_pre must be -1 or an odd nonnegative integer");
  hconfig.validate();
}

EvenParityOperator::EvenParityOperator(const AssembledSystem& sys, const OperatorConfig& cfg) : sys_(sys), cfg_(cfg) {
  cfg_.validate();
  sys_.field.validate(sys_.smesh);
  const auto& ang = sys_.angular;
  A_ = KroneckerOperator({{ang.A[0], sys_.spatial.D[0]}, {ang.A[1], sys_.spatial.D[1]}});

  std::vector<Triplet> trip;
  for (std::size_t k = 0; k < ang.M_minus_blocks.size(); ++k) {
    const Eigen::Matrix3d inv = ang.M_minus_blocks[k].inverse();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(3 * static_cast<int>(k) + i, 3 * static_cast<int>(k) + j, inv(i, j));
  }
  Mminus_inv_.resize(sys_.nS_minus(), sys_.nS_minus());
  Mminus_inv_.setFromTriplets(trip.begin(), trip.end());

  build_scattering();
  build_E0();
}

void EvenParityOperator::build_scattering() {
  const auto& ang = sys_.angular;
  auto pick = [&](const Matrix& dense, Parity parity, Index n) {
    if (n > cfg_.compressed_switch || dense.rows() != n) {
      auto h = std::make_shared<HMatrixApprox>(
          compress_scattering(sys_.amesh, sys_.field.phase, parity, cfg_.hconfig, cfg_.quad));
      return AngularScattering(std::shared_ptr<const HMatrixApprox>(h));
    }
    return AngularScattering(dense);
  };
  S_plus_ = pick(ang.S_plus, Parity::Even, sys_.nS_plus());
  S_minus_ = pick(ang.S_minus, Parity::Odd, sys_.nS_minus());

  const Index d = truncation_dim(cfg_.N_pre);
  if (d > sys_.nS_minus()) throw std::invalid_argument("N_pre exceeds the odd angular dimension");
  if (d > 0) {
    if (S_minus_.compressed()) {
      const AngularScattering& S = S_minus_;
      odd_trunc_ = truncated_eig([&S](const Matrix& X) { return S.apply(X); }, ang.M_minus, d, cfg_.eigen);
    } else {
      odd_trunc_ = truncated_eig(S_minus_.dense(), ang.M_minus, d, cfg_.eigen);
    }
  }
}

void EvenParityOperator::build_E0() {
  const double cg = sys_.c * sys_.g();
  if (cg >= 1.0) throw std::invalid_argument("E0 requires c g < 1");
  e0_scale_ = 1.0 / (1.0 - cg);

  const auto& sp = sys_.spatial;
  const Vector inv_mt = sp.Mt_minus.cwiseInverse();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      SpMat Dj = inv_mt.asDiagonal() * sp.D[j];
      G_[i][j] = SpMat(sp.D[i].transpose()) * Dj;
      G_[i][j].makeCompressed();
    }

  // A_i^T (M-)^{-1} A_j is diagonal; its entries per angular block
  const auto& ang = sys_.angular;
  const Index ns = sys_.nS_plus();
  gamma_.resize(ns, 3);
  for (Index k = 0; k < ns; ++k) {
    std::array<Eigen::Vector3d, 2> a;
    for (int i = 0; i < 2; ++i) {
      a[i].setZero();
      for (SpMat::InnerIterator it(ang.A[i], k); it; ++it) a[i](it.row() - 3 * k) = it.value();
    }
    const Eigen::Matrix3d inv = ang.M_minus_blocks[k].inverse();
    gamma_(k, 0) = a[0].dot(inv * a[0]);
    gamma_(k, 1) = a[0].dot(inv * a[1]);
    gamma_(k, 2) = a[1].dot(inv * a[1]);
  }

  SpMat pattern = G_[0][0] + G_[0][1] + G_[1][0] + G_[1][1] + sp.Mt_plus;
  for (const auto& e : sys_.boundary.edge_mass) pattern += e;
  pattern.makeCompressed();
  SparseCholesky symbolic;
  symbolic.analyze(pattern);

  E0_chol_.clear();
  E0_chol_.reserve(static_cast<std::size_t>(ns));
  for (Index k = 0; k < ns; ++k) {
    SparseCholesky f = symbolic.clone_symbolic();
    SpMat blk = E0_block(k);
    try {
      f.factorize(blk);
    } catch (const std::runtime_error& e) {
      std::ostringstream msg;
      msg << "E0 factorization failed in angular block " << k << ": " << e.what();
      throw std::runtime_error(msg.str());
    }
    E0_chol_.push_back(std::move(f));
  }
}

SpMat EvenParityOperator::E0_block(Index k) const {
  const auto& sp = sys_.spatial;
  SpMat blk = e0_scale_ * (gamma_(k, 0) * G_[0][0] + gamma_(k, 1) * (G_[0][1] + G_[1][0]) + gamma_(k, 2) * G_[1][1]) +
              sys_.angular.M_plus(k) * sp.Mt_plus;
  for (std::size_t n = 0; n < sys_.boundary.edge_mass.size(); ++n)
    blk += sys_.boundary.omega(k, static_cast<Index>(n)) * sys_.boundary.edge_mass[n];
  blk.makeCompressed();
  return blk;
}

void EvenParityOperator::check_even(const Vector& x) const {
  if (x.size() != sys_.even_size()) throw std::invalid_argument("even vector has the wrong dimension");
}

void EvenParityOperator::check_odd(const Vector& x) const {
  if (x.size() != sys_.odd_size()) throw std::invalid_argument("odd vector has the wrong dimension");
}

Vector EvenParityOperator::apply_A(const Vector& x) const {
  check_even(x);
  return A_.apply(x);
}

Vector EvenParityOperator::apply_At(const Vector& x) const {
  check_odd(x);
  return A_.apply_transpose(x);
}

Vector EvenParityOperator::apply_R(const Vector& x) const {
  check_even(x);
  const auto X = as_matrix(x, sys_.nR_plus(), sys_.nS_plus());
  const auto& bd = sys_.boundary;
  Matrix Y = Matrix::Zero(X.rows(), X.cols());
  for (std::size_t n = 0; n < bd.edge_mass.size(); ++n)
    Y += (bd.edge_mass[n] * X) * bd.omega.col(static_cast<Index>(n)).asDiagonal();
  return as_vector(Y);
}

Vector EvenParityOperator::apply_Mplus(const Vector& x) const {
  check_even(x);
  const auto X = as_matrix(x, sys_.nR_plus(), sys_.nS_plus());
  Matrix Y = (sys_.spatial.Mt_plus * X) * sys_.angular.M_plus.asDiagonal();
  return as_vector(Y);
}

Vector EvenParityOperator::apply_Kplus(const Vector& x) const {
  check_even(x);
  const auto X = as_matrix(x, sys_.nR_plus(), sys_.nS_plus());
  Matrix Y = S_plus_.apply_right(sys_.spatial.Ms_plus * X);
  return as_vector(Y);
}

Vector EvenParityOperator::apply_Mminus(const Vector& x) const {
  check_odd(x);
  const auto X = as_matrix(x, sys_.nR_minus(), sys_.nS_minus());
  Matrix Y = sys_.spatial.Mt_minus.asDiagonal() * times_sparse(X, sys_.angular.M_minus);
  return as_vector(Y);
}

Vector EvenParityOperator::apply_Minus_inv(const Vector& x) const {
  check_odd(x);
  const auto X = as_matrix(x, sys_.nR_minus(), sys_.nS_minus());
  Matrix Y = sys_.spatial.Mt_minus.cwiseInverse().asDiagonal() * times_sparse(X, Mminus_inv_);
  return as_vector(Y);
}

Vector EvenParityOperator::apply_Kminus(const Vector& x) const {
  check_odd(x);
  const auto X = as_matrix(x, sys_.nR_minus(), sys_.nS_minus());
  Matrix Y = S_minus_.apply_right(X);
  Y = sys_.spatial.Ms_minus.asDiagonal() * Y;
  return as_vector(Y);
}

Vector EvenParityOperator::apply_MmK(const Vector& x) const {
  check_odd(x);
  const auto X = as_matrix(x, sys_.nR_minus(), sys_.nS_minus());
  const auto& sp = sys_.spatial;
  Matrix Y = S_minus_.apply_right(X);
  Y = sp.Mt_minus.asDiagonal() * times_sparse(X, sys_.angular.M_minus) - sp.Ms_minus.asDiagonal() * Y;
  return as_vector(Y);
}

Vector EvenParityOperator::apply_MmK_N(int N, const Vector& x) const {
  check_odd(x);
  const Index d = truncation_dim(N);
  if (d > odd_trunc_.dim()) throw std::invalid_argument("requested truncation exceeds the precomputed one");
  const auto X = as_matrix(x, sys_.nR_minus(), sys_.nS_minus());
  const auto& sp = sys_.spatial;
  Matrix Y = sp.Mt_minus.asDiagonal() * times_sparse(X, sys_.angular.M_minus);
  if (d > 0) {
    // K-_N = (M W) Lambda (M W)^T kron Ms
    const Matrix MW = sys_.angular.M_minus * odd_trunc_.W.leftCols(d);
    Matrix P = sp.Ms_minus.asDiagonal() * X * MW;
    Y -= P * odd_trunc_.lambda.head(d).asDiagonal() * MW.transpose();
  }
  return as_vector(Y);
}

Vector EvenParityOperator::apply_MmK_inv_precond(int N, const Vector& b) const {
  check_odd(b);
  const Index d = truncation_dim(N);
  if (d > odd_trunc_.dim()) throw std::invalid_argument("requested truncation exceeds the precomputed one");
  const auto B = as_matrix(b, sys_.nR_minus(), sys_.nS_minus());
  const auto& sp = sys_.spatial;
  const Vector inv_mt = sp.Mt_minus.cwiseInverse();
  Matrix X = inv_mt.asDiagonal() * times_sparse(B, Mminus_inv_);
  if (d > 0) {
    const auto W = odd_trunc_.W.leftCols(d);
    const Matrix BW = B * W;
    Matrix P(BW.rows(), d);
    for (Index l = 0; l < d; ++l) {
      const Vector denom = sp.Mt_minus - odd_trunc_.lambda(l) * sp.Ms_minus;
      if ((denom.array() <= 0.0).any())
        throw std::domain_error("singular spatial factor in the truncated scattering inverse");
      P.col(l) = BW.col(l).cwiseQuotient(denom) - inv_mt.cwiseProduct(BW.col(l));
    }
    X += P * W.transpose();
  }
  return as_vector(X);
}

Vector EvenParityOperator::solve_MmK(const Vector& b, double tol, int N, InnerSolveStats* stats) const {
  check_odd(b);
  if (!(tol > 0.0)) throw std::invalid_argument("solve_MmK: tolerance must be positive");
  std::vector<double> history;
  Vector x = Vector::Zero(b.size());
  Vector r = b;
  Vector z = apply_MmK_inv_precond(N, r);
  double rz = r.dot(z);
  const double rz0 = rz;
  int it = 0;
  auto finish = [&] {
    inner_iterations_ += it;
    if (stats) {
      stats->iterations = it;
      stats->history = history;
    }
    return x;
  };
  if (rz0 <= 0.0) return finish();
  Vector p = z;
  while (it < cfg_.inner_max_iter) {
    const Vector Ap = apply_MmK(p);
    const double alpha = rz / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    ++it;
    z = apply_MmK_inv_precond(N, r);
    const double rz_new = r.dot(z);
    const double rel = std::sqrt(std::max(rz_new, 0.0) / rz0);
    history.push_back(rel);
    if (rel <= tol) return finish();
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  inner_iterations_ += it;
  std::ostringstream msg;
  msg << "solve_MmK: no convergence after " << it << " iterations, residual "
      << (history.empty() ? 1.0 : history.back());
  throw InnerSolveError(msg.str(), history);
}

Vector EvenParityOperator::apply_E(const Vector& x) const {
  check_even(x);
  ++e_applications_;
  Vector z = solve_MmK(apply_A(x));
  return apply_At(z) + apply_Mplus(x) + apply_R(x);
}

Vector EvenParityOperator::apply_B(const Vector& x) const { return apply_E(x) - apply_Kplus(x); }

Vector EvenParityOperator::apply_E0(const Vector& x) const {
  check_even(x);
  Vector y = e0_scale_ * apply_At(apply_Minus_inv(apply_A(x)));
  return y + apply_Mplus(x) + apply_R(x);
}

Vector EvenParityOperator::apply_E0_inv(const Vector& x) const {
  check_even(x);
  const auto X = as_matrix(x, sys_.nR_plus(), sys_.nS_plus());
  Matrix Y(X.rows(), X.cols());
  for (Index k = 0; k < X.cols(); ++k) Y.col(k) = E0_chol_[static_cast<std::size_t>(k)].solve(Vector(X.col(k)));
  return as_vector(Y);
}

Vector EvenParityOperator::apply_P1(int l, const Vector& b) const {
  if (l < 1) throw std::invalid_argument("apply_P1: l must be >= 1");
  Vector z = apply_E0_inv(b);
  for (int k = 1; k < l; ++k) z -= apply_E0_inv(apply_E(z) - b);
  return z;
}

}  // namespace rte
