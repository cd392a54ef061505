#include "rte/cholesky.hpp"

#include <cholmod.h>

#include <stdexcept>
#include <utility>

namespace rte {

namespace {

cholmod_sparse view(const SpMat& A) {
  if (!A.isCompressed()) throw std::invalid_argument("SparseCholesky: matrix must be compressed");
  if (A.rows() != A.cols()) throw std::invalid_argument("SparseCholesky: matrix is not square");
  cholmod_sparse s{};
  s.nrow = static_cast<std::size_t>(A.rows());
  s.ncol = static_cast<std::size_t>(A.cols());
  s.nzmax = static_cast<std::size_t>(A.nonZeros());
  s.p = const_cast<int*>(A.outerIndexPtr());
  s.i = const_cast<int*>(A.innerIndexPtr());
  s.x = const_cast<double*>(A.valuePtr());
  s.stype = -1;
  s.itype = CHOLMOD_INT;
  s.xtype = CHOLMOD_REAL;
  s.dtype = CHOLMOD_DOUBLE;
  s.sorted = 1;
  s.packed = 1;
  return s;
}

cholmod_dense view(const double* data, Index rows, Index cols) {
  cholmod_dense d{};
  d.nrow = static_cast<std::size_t>(rows);
  d.ncol = static_cast<std::size_t>(cols);
  d.nzmax = d.nrow * d.ncol;
  d.d = d.nrow;
  d.x = const_cast<double*>(data);
  d.xtype = CHOLMOD_REAL;
  d.dtype = CHOLMOD_DOUBLE;
  return d;
}

}  // namespace

CholmodCommon::CholmodCommon() : common_(std::make_unique<cholmod_common>()) {
  cholmod_start(common_.get());
  common_->print = 0;
  common_->error_handler = nullptr;
}

CholmodCommon::~CholmodCommon() { cholmod_finish(common_.get()); }

SparseCholesky::SparseCholesky(std::shared_ptr<CholmodCommon> common) : common_(std::move(common)) {}

SparseCholesky::~SparseCholesky() {
  if (factor_) cholmod_free_factor(&factor_, common_->get());
}

SparseCholesky::SparseCholesky(SparseCholesky&& other) noexcept
    : common_(other.common_), factor_(std::exchange(other.factor_, nullptr)), n_(other.n_) {}

SparseCholesky& SparseCholesky::operator=(SparseCholesky&& other) noexcept {
  if (this != &other) {
    if (factor_) cholmod_free_factor(&factor_, common_->get());
    common_ = other.common_;
    factor_ = std::exchange(other.factor_, nullptr);
    n_ = other.n_;
  }
  return *this;
}

void SparseCholesky::analyze(const SpMat& A) {
  cholmod_sparse s = view(A);
  if (factor_) cholmod_free_factor(&factor_, common_->get());
  factor_ = cholmod_analyze(&s, common_->get());
  if (!factor_) throw std::runtime_error("SparseCholesky: symbolic analysis failed");
  n_ = A.rows();
}

SparseCholesky SparseCholesky::clone_symbolic() const {
  if (!factor_) throw std::logic_error("SparseCholesky: analyze() has not been called");
  SparseCholesky out(common_);
  out.factor_ = cholmod_copy_factor(factor_, common_->get());
  if (!out.factor_) throw std::runtime_error("SparseCholesky: out of memory copying factor");
  out.n_ = n_;
  return out;
}

void SparseCholesky::factorize(const SpMat& A) {
  if (!factor_) analyze(A);
  if (A.rows() != n_) throw std::invalid_argument("SparseCholesky: size differs from analyzed pattern");
  cholmod_sparse s = view(A);
  cholmod_common* c = common_->get();
  const int ok = cholmod_factorize(&s, factor_, c);
  if (!ok || c->status == CHOLMOD_NOT_POSDEF) throw std::runtime_error("SparseCholesky: matrix is not positive definite");
  if (c->status < CHOLMOD_OK) throw std::runtime_error("SparseCholesky: factorization failed");
}

Matrix SparseCholesky::solve(const Matrix& B) const {
  if (!factor_) throw std::logic_error("SparseCholesky: not factorized");
  if (B.rows() != n_) throw std::invalid_argument("SparseCholesky: right-hand side size mismatch");
  if (B.cols() == 0) return B;
  cholmod_dense b = view(B.data(), B.rows(), B.cols());
  cholmod_common* c = common_->get();
  cholmod_dense* x = cholmod_solve(CHOLMOD_A, factor_, &b, c);
  if (!x) throw std::runtime_error("SparseCholesky: solve failed");
  Matrix out = Eigen::Map<const Matrix>(static_cast<const double*>(x->x), B.rows(), B.cols());
  cholmod_free_dense(&x, c);
  return out;
}

Vector SparseCholesky::solve(const Vector& b) const {
  Matrix B = b;
  return solve(B).col(0);
}

std::size_t SparseCholesky::factor_nnz() const {
  if (!factor_) return 0;
  if (factor_->is_super) return factor_->xsize;
  return factor_->nzmax;
}

}  // namespace rte
