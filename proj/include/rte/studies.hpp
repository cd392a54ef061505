#pragma once

#include "rte/config.hpp"

#include <filesystem>

namespace rte {

/// Lattice on (0,7)^2 or the homogeneous unit square (2x2 squares, then
/// spatial_refine quadrisections). Spatial and angular meshes, optical field and matrices for a run; g
/// overrides cfg.g. Dense scattering Gramians are skipped above the
/// compressed switch.
AssembledSystem build_problem(const RunConfig& cfg, double g);

/// history.csv, summary.csv, u_even.bin, u_odd.bin, flux.vtk. On solver
/// failure the history is written before SolverError propagates.
void run_solve(const RunConfig& cfg, const std::filesystem::path& out);

/// table.csv: one row per N_pre, inner PCG iterations (and seconds) per g.
void run_precond_study(const RunConfig& cfg, const std::filesystem::path& out);

/// table.csv: rho and eta per (g, N_corr, l).
void run_spectral_study(const RunConfig& cfg, const std::filesystem::path& out);

/// table.csv: compression statistics of the even scattering Gramian per level.
void run_compress_study(const RunConfig& cfg, const std::filesystem::path& out);

void run(const RunConfig& cfg, const std::filesystem::path& out);

}  // namespace rte
