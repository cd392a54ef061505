#include "rte/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace rte {

namespace {

SpMat diagonal(const Vector& d) {
  SpMat out(d.size(), d.size());
  out.reserve(Eigen::VectorXi::Ones(d.size()));
  for (Index i = 0; i < d.size(); ++i) out.insert(i, i) = d(i);
  out.makeCompressed();
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void SolverConfig::validate() const {
  if (l < 1) throw std::invalid_argument("l must be >= 1");
  if (N_corr < -1 || (N_corr >= 0 && N_corr % 2 != 0))
    throw std::invalid_argument("N_corr must be -1 or an even nonnegative integer");
  if (N_pre < -1 || (N_pre >= 0 && N_pre % 2 == 0))
    throw std::invalid_argument("N_pre must be -1 or an odd nonnegative integer");
  if (!(outer_tol > 0.0)) throw std::invalid_argument("outer_tol must be positive");
  if (!(inner_tol > 0.0)) throw std::invalid_argument("inner_tol must be positive");
  if (max_outer < 1) throw std::invalid_argument("max_outer must be >= 1");
  if (coupling_tol < 0.0) throw std::invalid_argument("coupling_tol must be nonnegative");
}

OperatorConfig SolverConfig::operator_config(OperatorConfig base) const {
  base.inner_tol = inner_tol;
  base.N_pre = N_pre;
  return base;
}

EigenTruncation build_correction_space(const EvenParityOperator& op, int N_corr) {
  if (N_corr < 0 || N_corr % 2 != 0) throw std::invalid_argument("N_corr must be even and nonnegative");
  const Index d = truncation_dim(N_corr);
  const SpMat M = diagonal(op.system().angular.M_plus);
  const auto& S = op.S_plus();
  if (S.compressed())
    return truncated_eig([&S](const Matrix& X) { return S.apply(X); }, M, d, op.config().eigen);
  return truncated_eig(S.dense(), M, d, op.config().eigen);
}

EigenTruncation full_odd_eig(const EvenParityOperator& op) {
  const auto& S = op.S_minus();
  const Matrix dense = S.compressed() ? S.hmatrix()->to_dense() : S.dense();
  EigenOptions opt = op.config().eigen;
  opt.dense_limit = std::max(opt.dense_limit, dense.rows());
  return truncated_eig(dense, op.system().angular.M_minus, dense.rows(), opt);
}

SpMat assemble_Ec(const EvenParityOperator& op, const EigenTruncation& space, const EigenTruncation& odd_full,
                  double coupling_tol) {
  const AssembledSystem& sys = op.system();
  const Index nR = sys.nR_plus();
  const Index d = space.dim();
  if (space.W.rows() != sys.nS_plus()) throw std::invalid_argument("assemble_Ec: correction space size mismatch");
  if (odd_full.dim() != sys.nS_minus() || odd_full.W.rows() != sys.nS_minus())
    throw std::invalid_argument("assemble_Ec: the complete odd eigendecomposition is required");

  // vertex adjacency, sorted, including the vertex itself
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(nR));
  for (Index p = 0; p < nR; ++p) adj[p].push_back(static_cast<int>(p));
  for (const auto& t : sys.smesh.triangles)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) adj[t[i]].push_back(t[j]);
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }

  const Index n = d * nR;
  std::vector<int> outer(static_cast<std::size_t>(n + 1), 0);
  for (Index b = 0; b < d; ++b)
    for (Index q = 0; q < nR; ++q)
      outer[b * nR + q + 1] = outer[b * nR + q] + static_cast<int>(d * adj[q].size());
  const std::size_t nnz = static_cast<std::size_t>(outer.back());
  std::vector<int> inner(nnz);
  std::vector<double> values(nnz, 0.0);
  for (Index b = 0; b < d; ++b)
    for (Index q = 0; q < nR; ++q) {
      int pos = outer[b * nR + q];
      for (Index a = 0; a < d; ++a)
        for (int p : adj[q]) inner[pos++] = static_cast<int>(a * nR + p);
    }

  auto locate = [&](int p, int q) {
    const auto& a = adj[q];
    return static_cast<int>(std::lower_bound(a.begin(), a.end(), p) - a.begin());
  };
  // value slot of block (a,b), entry (p,q), with local offset lp = locate(p,q)
  auto slot = [&](Index a, Index b, int q, int lp) -> double& {
    return values[outer[b * nR + q] + a * static_cast<Index>(adj[q].size()) + lp];
  };

  const auto& sp = sys.spatial;
  // mass and scattering: I kron Mt+ - Lambda kron Ms+
  for (Index q = 0; q < nR; ++q) {
    for (SpMat::InnerIterator it(sp.Mt_plus, q); it; ++it) {
      const int lp = locate(static_cast<int>(it.row()), static_cast<int>(q));
      for (Index a = 0; a < d; ++a) slot(a, a, static_cast<int>(q), lp) += it.value();
    }
    for (SpMat::InnerIterator it(sp.Ms_plus, q); it; ++it) {
      const int lp = locate(static_cast<int>(it.row()), static_cast<int>(q));
      for (Index a = 0; a < d; ++a) slot(a, a, static_cast<int>(q), lp) -= space.lambda(a) * it.value();
    }
  }

  // boundary: sum_k W(k,a) W(k,b) R_k
  const auto& bd = sys.boundary;
  for (std::size_t m = 0; m < bd.edge_mass.size(); ++m) {
    const Matrix Om = space.W.transpose() * bd.omega.col(static_cast<Index>(m)).asDiagonal() * space.W;
    for (Index q = 0; q < nR; ++q)
      for (SpMat::InnerIterator it(bd.edge_mass[m], q); it; ++it) {
        const int lp = locate(static_cast<int>(it.row()), static_cast<int>(q));
        for (Index b = 0; b < d; ++b)
          for (Index a = 0; a < d; ++a) slot(a, b, static_cast<int>(q), lp) += Om(a, b) * it.value();
      }
  }

  // streaming: W^T A^T (M- - K-)^{-1} A W expanded in the odd eigenbasis
  const auto& ang = sys.angular;
  std::array<Matrix, 2> C;
  for (int i = 0; i < 2; ++i) C[i] = odd_full.W.transpose() * (ang.A[i] * space.W);
  std::vector<Index> active;
  for (Index l = 0; l < odd_full.dim(); ++l)
    if (coupling_tol <= 0.0 || std::max(C[0].row(l).norm(), C[1].row(l).norm()) >= coupling_tol) active.push_back(l);
  std::array<Matrix, 2> Ca;
  for (int i = 0; i < 2; ++i) {
    Ca[i].resize(static_cast<Index>(active.size()), d);
    for (std::size_t r = 0; r < active.size(); ++r) Ca[i].row(static_cast<Index>(r)) = C[i].row(active[r]);
  }
  Vector lam(static_cast<Index>(active.size()));
  for (std::size_t r = 0; r < active.size(); ++r) lam(static_cast<Index>(r)) = odd_full.lambda(active[r]);

  using Coupling = std::array<std::array<Matrix, 2>, 2>;
  std::map<std::pair<double, double>, Coupling> cache;
  auto coupling = [&](double st, double ss) -> const Coupling& {
    auto key = std::make_pair(st, ss);
    auto found = cache.find(key);
    if (found != cache.end()) return found->second;
    const Vector denom = (Vector::Constant(lam.size(), st) - ss * lam);
    if ((denom.array() <= 0.0).any()) throw std::domain_error("assemble_Ec: singular odd spatial factor");
    const Vector inv = denom.cwiseInverse();
    Coupling out;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) out[i][j] = Ca[i].transpose() * inv.asDiagonal() * Ca[j];
    return cache.emplace(key, std::move(out)).first->second;
  };

  using RowMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
  const std::array<RowMat, 2> Drow = {RowMat(sp.D[0]), RowMat(sp.D[1])};
  const auto& field = sys.field;
  for (std::size_t t = 0; t < sys.smesh.num_triangles(); ++t) {
    const Coupling& cp = coupling(field.sigma_t(t), field.sigma_s[t]);
    const double inv_area = 1.0 / sys.smesh.area(static_cast<int>(t));
    const Tri& tri = sys.smesh.triangles[t];
    std::array<Eigen::Vector3d, 2> g;
    for (int i = 0; i < 2; ++i) {
      g[i].setZero();
      for (RowMat::InnerIterator it(Drow[i], static_cast<Index>(t)); it; ++it)
        for (int v = 0; v < 3; ++v)
          if (tri[v] == it.col()) g[i](v) = it.value();
    }
    for (int vp = 0; vp < 3; ++vp)
      for (int vq = 0; vq < 3; ++vq) {
        const int p = tri[vp], q = tri[vq];
        const int lp = locate(p, q);
        Matrix blk = Matrix::Zero(d, d);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) blk += (g[i](vp) * g[j](vq) * inv_area) * cp[i][j];
        for (Index b = 0; b < d; ++b)
          for (Index a = 0; a < d; ++a) slot(a, b, q, lp) += blk(a, b);
      }
  }

  SpMat Ec(n, n);
  Ec.resizeNonZeros(static_cast<Index>(nnz));
  std::copy(outer.begin(), outer.end(), Ec.outerIndexPtr());
  std::copy(inner.begin(), inner.end(), Ec.innerIndexPtr());
  std::copy(values.begin(), values.end(), Ec.valuePtr());
  return Ec;
}

SubspaceCorrection::SubspaceCorrection(const EvenParityOperator& op, int N_corr, double coupling_tol)
    : SubspaceCorrection(op, build_correction_space(op, N_corr), coupling_tol) {}

SubspaceCorrection::SubspaceCorrection(const EvenParityOperator& op, EigenTruncation space, double coupling_tol)
    : op_(op), space_(std::move(space)) {
  const EigenTruncation odd = full_odd_eig(op);
  SpMat Ec = assemble_Ec(op, space_, odd, coupling_tol);
  try {
    chol_.factorize(Ec);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(std::string("correction matrix: ") + e.what());
  }
}

Vector SubspaceCorrection::restrict(const Vector& x) const {
  const AssembledSystem& sys = op_.system();
  Eigen::Map<const Matrix> X(x.data(), sys.nR_plus(), sys.nS_plus());
  Matrix Y = X * space_.W;
  return Eigen::Map<const Vector>(Y.data(), Y.size());
}

Vector SubspaceCorrection::prolong(const Vector& uc) const {
  const AssembledSystem& sys = op_.system();
  Eigen::Map<const Matrix> U(uc.data(), sys.nR_plus(), space_.dim());
  Matrix Y = U * space_.W.transpose();
  return Eigen::Map<const Vector>(Y.data(), Y.size());
}

Vector SubspaceCorrection::solve(const Vector& qc) const { return chol_.solve(qc); }

Vector even_rhs(const EvenParityOperator& op) {
  const AssembledSystem& sys = op.system();
  if (sys.q_minus.squaredNorm() == 0.0) return sys.q_plus;
  return sys.q_plus + op.apply_At(op.solve_MmK(sys.q_minus));
}

SolveResult richardson_solve(const EvenParityOperator& op, const SubspaceCorrection* corr, const SolverConfig& cfg,
                             const std::optional<Vector>& u0, const IterationObserver& observer) {
  cfg.validate();
  const AssembledSystem& sys = op.system();
  if (!(sys.c < 1.0)) throw std::invalid_argument("scattering ratio c must be strictly less than one");
  const auto t0 = std::chrono::steady_clock::now();
  const Vector q = even_rhs(op);

  SolveResult out;
  IterationReport& rep = out.report;
  Vector u = u0 ? *u0 : Vector::Zero(sys.even_size());
  if (u.size() != sys.even_size()) throw std::invalid_argument("initial guess has the wrong dimension");
  Vector r = u0 ? Vector(op.apply_B(u) - q) : Vector(-q);

  for (int n = 1; n <= cfg.max_outer; ++n) {
    const long inner0 = op.inner_iterations();
    const Vector s = op.apply_P1(cfg.l, r);
    Vector u_next = u - s;
    if (corr) {
      const Vector qc = corr->restrict(op.apply_B(s) - r);
      u_next += corr->prolong(corr->solve(qc));
    }
    Vector r_next = op.apply_B(u_next) - q;
    const Vector delta = u_next - u;
    const double inc = std::sqrt(std::max(delta.dot(r_next - r), 0.0));
    if (n == 1) rep.reference_norm = std::sqrt(std::max(u_next.dot(r_next + q), 0.0));
    u.swap(u_next);
    r.swap(r_next);
    rep.increments.push_back(inc);
    rep.inner_iterations.push_back(op.inner_iterations() - inner0);
    rep.wall_time.push_back(seconds_since(t0));
    rep.iterations = n;
    if (observer) observer(n, u, r);
    if (inc < cfg.outer_tol * rep.reference_norm || rep.reference_norm == 0.0) {
      rep.converged = true;
      out.u_plus = std::move(u);
      return out;
    }
  }
  out.u_plus = std::move(u);
  std::ostringstream msg;
  msg << "richardson_solve: no convergence after " << cfg.max_outer << " iterations, last increment "
      << rep.increments.back();
  throw SolverError(msg.str(), rep);
}

Vector recover_odd(const EvenParityOperator& op, const Vector& u_plus) {
  const Vector rhs = op.system().q_minus - op.apply_A(u_plus);
  if (rhs.squaredNorm() == 0.0) return Vector::Zero(rhs.size());
  return op.solve_MmK(rhs);
}

double energy_norm(const EvenParityOperator& op, const Vector& x) {
  if (x.squaredNorm() == 0.0) return 0.0;
  const double v = x.dot(op.apply_B(x));
  if (v < -1e-12 * x.squaredNorm()) throw std::runtime_error("energy_norm: operator is not positive definite");
  return std::sqrt(std::max(v, 0.0));
}

double estimate_contraction(const EvenParityOperator& op, const SubspaceCorrection* corr, int l,
                            ContractionMode mode, const ContractionOptions& opt) {
  if (l < 1) throw std::invalid_argument("estimate_contraction: l must be >= 1");
  const Index n = op.system().even_size();
  struct Pair {
    Vector v, Bv;
  };
  auto Y = [&](const Pair& x) {
    Pair out;
    out.v = x.v - op.apply_P1(l, x.Bv);
    out.Bv = op.apply_B(out.v);
    return out;
  };
  auto X = [&](const Pair& x) {
    if (!corr) return x;
    Pair out;
    out.v = x.v - corr->correct(x.Bv);
    out.Bv = op.apply_B(out.v);
    return out;
  };
  auto T = [&](const Pair& x) { return mode == ContractionMode::Norm ? Y(X(Y(x))) : X(Y(X(x))); };

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd;
  Pair cur;
  cur.v.resize(n);
  for (Index i = 0; i < n; ++i) cur.v(i) = nd(rng);
  cur.Bv = op.apply_B(cur.v);
  double nrm = std::sqrt(cur.v.dot(cur.Bv));
  cur.v /= nrm;
  cur.Bv /= nrm;
  Pair prev{Vector::Zero(n), Vector::Zero(n)};
  std::vector<double> alpha, beta;
  double last = 0.0;
  auto value = [&](const Vector& theta) {
    double top = theta.maxCoeff();
    if (mode == ContractionMode::SpectralRadius) top = std::max(top, -theta.minCoeff());
    return mode == ContractionMode::Norm ? std::sqrt(std::max(top, 0.0)) : top;
  };
  for (int k = 0; k < opt.max_iter; ++k) {
    Pair w = T(cur);
    const double a = cur.v.dot(w.Bv);
    const double bprev = beta.empty() ? 0.0 : beta.back();
    w.v -= a * cur.v + bprev * prev.v;
    w.Bv -= a * cur.Bv + bprev * prev.Bv;
    alpha.push_back(a);
    const double b = std::sqrt(std::max(w.v.dot(w.Bv), 0.0));

    const Index m = static_cast<Index>(alpha.size());
    Matrix Tm = Matrix::Zero(m, m);
    for (Index i = 0; i < m; ++i) {
      Tm(i, i) = alpha[i];
      if (i + 1 < m) Tm(i, i + 1) = Tm(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(Tm);
    const Vector& theta = es.eigenvalues();
    Index idx = m - 1;
    if (mode == ContractionMode::SpectralRadius && -theta(0) > theta(m - 1)) idx = 0;
    const double scale = std::max(std::abs(theta(idx)), 1e-300);
    const double resid = b * std::abs(es.eigenvectors()(m - 1, idx));
    const double before = last;
    last = value(theta);
    if (resid <= opt.tol * scale || b <= 1e-14 * std::max(std::abs(a), 1.0)) return last;
    if (k >= 2 && std::abs(last - before) <= opt.tol * last) return last;
    beta.push_back(b);
    prev = std::move(cur);
    cur.v = w.v / b;
    cur.Bv = w.Bv / b;
  }
  std::ostringstream msg;
  msg << "estimate_contraction: Lanczos did not converge in " << opt.max_iter << " steps, last estimate " << last;
  throw ContractionError(msg.str(), last);
}

}  // namespace rte
