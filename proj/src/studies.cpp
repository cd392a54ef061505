#include "rte/studies.hpp"

#include "rte/io.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace rte {

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Vector random_vector(Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector x(n);
  for (Index i = 0; i < n; ++i) x(i) = u(rng);
  return x;
}

OperatorConfig operator_config(const RunConfig& cfg) {
  OperatorConfig oc = cfg.solver.operator_config();
  oc.compressed_switch = cfg.compressed_switch;
  oc.hconfig = cfg.hmatrix;
  return oc;
}

std::string label(const char* prefix, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%g", prefix, v);
  return buf;
}

SpatialMesh unit_square(int refine) {
  SpatialMesh m = build_rectangle_mesh(2, 2, 1.0, 1.0);
  for (int i = 0; i < refine; ++i) m = refine_uniform(m);
  return m;
}

}  // namespace

AssembledSystem build_problem(const RunConfig& cfg, double g) {
  SpatialMesh smesh = cfg.preset == "lattice" ? build_lattice_mesh(cfg.spatial_refine)
                                              : unit_square(cfg.spatial_refine);
  OpticalField field = cfg.preset == "lattice" ? lattice_field(smesh, g)
                                               : homogeneous_field(smesh, cfg.sigma_a, cfg.sigma_s, cfg.source, g);
  SphereMesh amesh = build_sphere_mesh(cfg.sphere_level);
  const bool dense = static_cast<Index>(amesh.num_odd()) <= cfg.compressed_switch;
  return assemble_system(std::move(smesh), std::move(amesh), std::move(field), {}, dense);
}

void run_solve(const RunConfig& cfg, const std::filesystem::path& out) {
  const auto t0 = Clock::now();
  const std::string comment = config_comment(cfg);
  const AssembledSystem sys = build_problem(cfg, cfg.g);
  EvenParityOperator op(sys, operator_config(cfg));
  std::unique_ptr<SubspaceCorrection> corr;
  if (cfg.solver.N_corr >= 0) corr = std::make_unique<SubspaceCorrection>(op, cfg.solver.N_corr, cfg.solver.coupling_tol);

  SolveResult res;
  try {
    res = richardson_solve(op, corr.get(), cfg.solver);
  } catch (const SolverError& e) {
    write_history_csv(out / "history.csv", e.report(), comment);
    throw;
  }
  write_history_csv(out / "history.csv", res.report, comment);
  const Vector u_minus = recover_odd(op, res.u_plus);
  write_coefficients(out / "u_even.bin", res.u_plus, sys.nR_plus(), sys.nS_plus());
  write_coefficients(out / "u_odd.bin", u_minus, sys.nR_minus(), sys.nS_minus());
  write_flux_vtk(out / "flux.vtk", sys.smesh, scalar_flux(sys, res.u_plus));

  double eta = std::numeric_limits<double>::quiet_NaN();
  if (cfg.estimate_eta) {
    try {
      eta = estimate_contraction(op, corr.get(), cfg.solver.l, ContractionMode::Norm);
    } catch (const ContractionError&) {
      eta = std::numeric_limits<double>::quiet_NaN();
    }
  }
  long inner = 0;
  for (long v : res.report.inner_iterations) inner += v;
  CsvWriter csv(out / "summary.csv", comment,
                {"iterations", "converged", "c", "eta", "n_R_plus", "n_S_plus", "inner_iterations_total", "wall_time"});
  csv << res.report.iterations << std::string(res.report.converged ? "true" : "false") << sys.c << eta
      << static_cast<long>(sys.nR_plus()) << static_cast<long>(sys.nS_plus()) << inner << seconds(t0);
  csv.end_row();
}

void run_precond_study(const RunConfig& cfg, const std::filesystem::path& out) {
  int max_N = -1;
  for (int N : cfg.study_N_pre) max_N = std::max(max_N, N);
  const std::size_t rows = cfg.study_N_pre.size(), cols = cfg.study_g.size();
  std::vector<std::vector<long>> its(rows, std::vector<long>(cols));
  std::vector<std::vector<double>> secs(rows, std::vector<double>(cols));
  for (std::size_t j = 0; j < cols; ++j) {
    const AssembledSystem sys = build_problem(cfg, cfg.study_g[j]);
    OperatorConfig oc = operator_config(cfg);
    oc.N_pre = max_N;
    EvenParityOperator op(sys, oc);
    const Vector b = op.apply_A(random_vector(sys.even_size(), 1));
    for (std::size_t i = 0; i < rows; ++i) {
      InnerSolveStats st;
      const auto t0 = Clock::now();
      try {
        (void)op.solve_MmK(b, cfg.solver.inner_tol, cfg.study_N_pre[i], &st);
        its[i][j] = st.iterations;
      } catch (const InnerSolveError&) {
        its[i][j] = -1;
      }
      secs[i][j] = seconds(t0);
    }
  }
  std::vector<std::string> header = {"N_pre", "d_N"};
  for (double g : cfg.study_g) header.push_back(label("iterations_g=", g));
  for (double g : cfg.study_g) header.push_back(label("seconds_g=", g));
  CsvWriter csv(out / "table.csv", config_comment(cfg), header);
  for (std::size_t i = 0; i < rows; ++i) {
    csv << cfg.study_N_pre[i] << static_cast<long>(truncation_dim(cfg.study_N_pre[i]));
    for (std::size_t j = 0; j < cols; ++j) csv << its[i][j];
    for (std::size_t j = 0; j < cols; ++j) csv << secs[i][j];
    csv.end_row();
  }
}

void run_spectral_study(const RunConfig& cfg, const std::filesystem::path& out) {
  CsvWriter csv(out / "table.csv", config_comment(cfg), {"g", "N_corr", "d_N", "l", "rho", "eta"});
  auto estimate = [](auto&& f) {
    try {
      return f();
    } catch (const ContractionError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  for (double g : cfg.study_g) {
    const AssembledSystem sys = build_problem(cfg, g);
    EvenParityOperator op(sys, operator_config(cfg));
    for (int N : cfg.study_N_corr) {
      std::unique_ptr<SubspaceCorrection> corr;
      if (N >= 0) corr = std::make_unique<SubspaceCorrection>(op, N, cfg.solver.coupling_tol);
      for (int l : cfg.study_l) {
        const double rho =
            estimate([&] { return estimate_contraction(op, corr.get(), l, ContractionMode::SpectralRadius); });
        const double eta = estimate([&] { return estimate_contraction(op, corr.get(), l, ContractionMode::Norm); });
        csv << g << N << static_cast<long>(N < 0 ? 0 : truncation_dim(N)) << l << rho << eta;
        csv.end_row();
      }
    }
  }
}

void run_compress_study(const RunConfig& cfg, const std::filesystem::path& out) {
  CsvWriter csv(out / "table.csv", config_comment(cfg),
                {"level", "n", "dense_bytes", "stored_bytes", "ratio", "low_rank_blocks", "dense_blocks", "max_rank",
                 "build_seconds", "matvec_seconds", "rel_error"});
  const PhaseFunction phase(cfg.g);
  for (int level : cfg.compress_levels) {
    const SphereMesh mesh = build_sphere_mesh(level);
    auto t0 = Clock::now();
    const HMatrixApprox H = compress_scattering(mesh, phase, Parity::Even, cfg.hmatrix);
    const double build = seconds(t0);
    const HStats st = H.stats();
    const Vector x = random_vector(H.cols(), 3);
    t0 = Clock::now();
    const Vector y = H.apply(x);
    const double matvec = seconds(t0);
    double err = std::numeric_limits<double>::quiet_NaN();
    if (level <= cfg.compress_error_max_level) {
      Matrix S;
      assemble_scattering(mesh, phase, {}, &S, nullptr);
      const Vector yd = S * x;
      err = (y - yd).norm() / yd.norm();
    }
    csv << level << static_cast<long>(H.rows()) << static_cast<long>(st.dense_bytes)
        << static_cast<long>(st.stored_bytes) << static_cast<double>(st.stored_bytes) / static_cast<double>(st.dense_bytes)
        << static_cast<long>(st.low_rank_blocks) << static_cast<long>(st.dense_blocks) << static_cast<long>(st.max_rank)
        << build << matvec << err;
    csv.end_row();
  }
}

void run(const RunConfig& cfg, const std::filesystem::path& out) {
  switch (cfg.mode) {
    case RunMode::Solve: return run_solve(cfg, out);
    case RunMode::PrecondStudy: return run_precond_study(cfg, out);
    case RunMode::SpectralStudy: return run_spectral_study(cfg, out);
    case RunMode::CompressStudy: return run_compress_study(cfg, out);
  }
}

}  // namespace rte
