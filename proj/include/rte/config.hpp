#pragma once

#include "rte/hmatrix.hpp"
#include "rte/solver.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace rte {

enum class RunMode { Solve, PrecondStudy, SpectralStudy, CompressStudy };

/// "solve", "precond_study" (or "precond-study"), ... Throws std::invalid_argument.
RunMode parse_mode(const std::string& text);
std::string mode_name(RunMode mode);

/// Run description. Every field has a key of the same name in the config
/// file except where noted; defaults are the values below.
struct RunConfig {
  RunMode mode = RunMode::Solve;
  std::string preset = "lattice";  ///< lattice | homogeneous
  double g = 0.5;
  double sigma_a = 0.01;  ///< homogeneous preset only
  double sigma_s = 10.0;  ///< homogeneous preset only
  double source = 1.0;    ///< homogeneous preset only
  int sphere_level = 2;   ///< n_S^+ = 4^(level+1)
  int spatial_refine = 0; ///< lattice: 57^2 vertices at 0
  SolverConfig solver;    ///< keys l, N_corr, N_pre, outer_tol, inner_tol, max_outer, coupling_tol
  HConfig hmatrix;        ///< keys h_eta, h_p, h_n_min, h_recompress_tol
  Index compressed_switch = 4096;
  bool estimate_eta = false;
  std::vector<double> study_g = {0.0, 0.5, 0.9};
  std::vector<int> study_N_pre = {-1, 1, 3, 5};
  std::vector<int> study_N_corr = {0, 2, 4};
  std::vector<int> study_l = {1, 2, 4};
  std::vector<int> compress_levels = {3, 4};
  int compress_error_max_level = 5;  ///< dense reference only up to this level

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message);
  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

/// key = value per line, '#' starts a comment. Unknown or duplicate keys,
/// malformed values and out-of-range parameters raise ConfigError.
RunConfig parse_config(const std::string& text);

/// Every key with its current value, parseable by parse_config.
std::string serialize_config(const RunConfig& cfg);

/// One-line summary for CSV comments.
std::string config_comment(const RunConfig& cfg);

}  // namespace rte
