#pragma once

#include "rte/operators.hpp"

#include <functional>
#include <optional>

namespace rte {

struct SolverConfig {
  int l = 4;               ///< inner steps of P1
  int N_corr = 4;          ///< correction order, -1 disables the correction
  int N_pre = 5;           ///< odd truncation of the inner preconditioner
  double outer_tol = 1e-8;
  double inner_tol = 1e-13;
  int max_outer = 200;
  double coupling_tol = 1e-12;  ///< drop odd eigendirections with weaker coupling; 0 keeps all

  void validate() const;
  bool operator==(const SolverConfig&) const = default;
  [[nodiscard]] Index correction_dim() const { return N_corr < 0 ? 0 : truncation_dim(N_corr); }
  [[nodiscard]] OperatorConfig operator_config(OperatorConfig base = {}) const;
};

struct IterationReport {
  std::vector<double> increments;       ///< energy-norm increments per step
  std::vector<long> inner_iterations;   ///< inner CG iterations spent per step
  std::vector<double> wall_time;        ///< seconds since the start, per step
  double reference_norm = 0.0;          ///< energy norm of the first iterate
  bool converged = false;
  int iterations = 0;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, IterationReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  [[nodiscard]] const IterationReport& report() const { return report_; }

 private:
  IterationReport report_;
};

/// Leading even eigenpairs spanning the angular factor of the correction space.
EigenTruncation build_correction_space(const EvenParityOperator& op, int N_corr);

/// Complete generalized eigendecomposition of the odd scattering pencil.
EigenTruncation full_odd_eig(const EvenParityOperator& op);

/// W^T (E - K+) W for W = space.W kron I, assembled from its Kronecker pieces.
/// Unknowns are ordered angular-major: index a * n_R^+ + p.
SpMat assemble_Ec(const EvenParityOperator& op, const EigenTruncation& space, const EigenTruncation& odd_full,
                  double coupling_tol = 1e-12);

/// Galerkin correction on span(W kron I) with a factored reduced matrix.
class SubspaceCorrection {
 public:
  SubspaceCorrection(const EvenParityOperator& op, int N_corr, double coupling_tol = 1e-12);
  /// Any M+-orthonormal angular basis with matching S+ eigenvalues.
  SubspaceCorrection(const EvenParityOperator& op, EigenTruncation space, double coupling_tol = 1e-12);

  [[nodiscard]] Index dim() const { return space_.dim(); }
  [[nodiscard]] const EigenTruncation& space() const { return space_; }
  [[nodiscard]] Vector restrict(const Vector& x) const;  ///< W^T x
  [[nodiscard]] Vector prolong(const Vector& uc) const;  ///< W uc
  [[nodiscard]] Vector solve(const Vector& qc) const;    ///< Ec^{-1} qc
  /// W Ec^{-1} W^T y
  [[nodiscard]] Vector correct(const Vector& y) const { return prolong(solve(restrict(y))); }

 private:
  const EvenParityOperator& op_;
  EigenTruncation space_;
  SparseCholesky chol_;
};

struct SolveResult {
  Vector u_plus;
  IterationReport report;
};

using IterationObserver = std::function<void(int n, const Vector& u, const Vector& residual)>;

/// q+ + A^T (M- - K-)^{-1} q-
Vector even_rhs(const EvenParityOperator& op);

/// Preconditioned Richardson iteration with subspace correction for
/// (E - K+) u = q. `residual` passed to the observer is (E - K+) u - q.
SolveResult richardson_solve(const EvenParityOperator& op, const SubspaceCorrection* corr, const SolverConfig& cfg,
                             const std::optional<Vector>& u0 = std::nullopt, const IterationObserver& observer = {});

/// u- = (M- - K-)^{-1} (q- - A u+)
Vector recover_odd(const EvenParityOperator& op, const Vector& u_plus);

double energy_norm(const EvenParityOperator& op, const Vector& x);

enum class ContractionMode { Norm, SpectralRadius };

struct ContractionOptions {
  int max_iter = 300;
  double tol = 1e-5;  ///< relative change of the estimate between steps, or relative Ritz residual
  unsigned seed = 7;
};

class ContractionError : public std::runtime_error {
 public:
  ContractionError(const std::string& what, double last) : std::runtime_error(what), last_(last) {}
  [[nodiscard]] double last_estimate() const { return last_; }

 private:
  double last_;
};

/// eta (norm of the iteration matrix in the energy norm) or its spectral
/// radius, by Lanczos in the (E - K+) inner product.
double estimate_contraction(const EvenParityOperator& op, const SubspaceCorrection* corr, int l,
                            ContractionMode mode, const ContractionOptions& opt = {});

}  // namespace rte
