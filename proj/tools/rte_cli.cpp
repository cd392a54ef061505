#include "rte/runtime.hpp"
#include "rte/studies.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kSolverFailure = 1;
constexpr int kConfigError = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Even-parity radiative transfer solver"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::string out_dir = ".";
  int workers = 1;

  std::vector<std::pair<std::string, rte::RunMode>> modes = {{"solve", rte::RunMode::Solve},
                                                             {"precond-study", rte::RunMode::PrecondStudy},
                                                             {"spectral-study", rte::RunMode::SpectralStudy},
                                                             {"compress-study", rte::RunMode::CompressStudy}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, mode] : modes) {
    CLI::App* sub = app.add_subcommand(name, "run " + name);
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--workers", workers, "upper bound on internal threads")->check(CLI::PositiveNumber);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  rte::RunMode mode = rte::RunMode::Solve;
  for (std::size_t i = 0; i < subs.size(); ++i)
    if (subs[i]->parsed()) mode = modes[i].second;

  rte::RunConfig cfg;
  try {
    std::string text;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw rte::ConfigError(0, "cannot read " + config_path);
      std::stringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    cfg = rte::parse_config(text);
    cfg.mode = mode;
  } catch (const rte::ConfigError& e) {
    std::cerr << "config error: " << (config_path.empty() ? "" : config_path + ": ") << e.what() << '\n';
    return kConfigError;
  }

  rte::configure_runtime(workers);
  try {
    std::filesystem::create_directories(out_dir);
    rte::run(cfg, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolverFailure;
  }
  return 0;
}
