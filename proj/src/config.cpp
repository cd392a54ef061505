#include "rte/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace rte {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) throw std::invalid_argument("cannot parse '" + text + "'");
  return value;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + text + "'");
}

template <class T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(trim(item)));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::string fmt_list(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>)
      out += fmt(v[i]);
    else
      out += std::to_string(v[i]);
  }
  return out;
}

struct Key {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Key number(T RunConfig::*field) {
  return {[field](RunConfig& c, const std::string& v) { c.*field = parse_number<T>(v); },
          [field](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>)
              return fmt(c.*field);
            else
              return std::to_string(c.*field);
          }};
}

template <class T>
Key list(std::vector<T> RunConfig::*field) {
  return {[field](RunConfig& c, const std::string& v) { c.*field = parse_list<T>(v); },
          [field](const RunConfig& c) { return fmt_list(c.*field); }};
}

template <class T>
Key solver_number(T SolverConfig::*field) {
  return {[field](RunConfig& c, const std::string& v) { c.solver.*field = parse_number<T>(v); },
          [field](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>)
              return fmt(c.solver.*field);
            else
              return std::to_string(c.solver.*field);
          }};
}

template <class T>
Key h_number(T HConfig::*field) {
  return {[field](RunConfig& c, const std::string& v) { c.hmatrix.*field = parse_number<T>(v); },
          [field](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>)
              return fmt(c.hmatrix.*field);
            else
              return std::to_string(c.hmatrix.*field);
          }};
}

// ordered as written by serialize_config
const std::vector<std::pair<std::string, Key>>& keys() {
  static const std::vector<std::pair<std::string, Key>> table = {
      {"mode", {[](RunConfig& c, const std::string& v) { c.mode = parse_mode(v); },
                [](const RunConfig& c) { return mode_name(c.mode); }}},
      {"preset", {[](RunConfig& c, const std::string& v) { c.preset = v; },
                  [](const RunConfig& c) { return c.preset; }}},
      {"g", number(&RunConfig::g)},
      {"sigma_a", number(&RunConfig::sigma_a)},
      {"sigma_s", number(&RunConfig::sigma_s)},
      {"source", number(&RunConfig::source)},
      {"sphere_level", number(&RunConfig::sphere_level)},
      {"spatial_refine", number(&RunConfig::spatial_refine)},
      {"l", solver_number(&SolverConfig::l)},
      {"N_corr", solver_number(&SolverConfig::N_corr)},
      {"N_pre", solver_number(&SolverConfig::N_pre)},
      {"outer_tol", solver_number(&SolverConfig::outer_tol)},
      {"inner_tol", solver_number(&SolverConfig::inner_tol)},
      {"max_outer", solver_number(&SolverConfig::max_outer)},
      {"coupling_tol", solver_number(&SolverConfig::coupling_tol)},
      {"h_eta", h_number(&HConfig::eta_adm)},
      {"h_p", h_number(&HConfig::p)},
      {"h_n_min", h_number(&HConfig::n_min)},
      {"h_recompress_tol", h_number(&HConfig::recompress_tol)},
      {"compressed_switch", number(&RunConfig::compressed_switch)},
      {"estimate_eta", {[](RunConfig& c, const std::string& v) { c.estimate_eta = parse_bool(v); },
                        [](const RunConfig& c) { return std::string(c.estimate_eta ? "true" : "false"); }}},
      {"study_g", list(&RunConfig::study_g)},
      {"study_N_pre", list(&RunConfig::study_N_pre)},
      {"study_N_corr", list(&RunConfig::study_N_corr)},
      {"study_l", list(&RunConfig::study_l)},
      {"compress_levels", list(&RunConfig::compress_levels)},
      {"compress_error_max_level", number(&RunConfig::compress_error_max_level)},
  };
  return table;
}

void check_g(double g) {
  if (!(g >= 0.0 && g < 1.0)) throw std::invalid_argument("g must satisfy 0 <= g < 1");
}

}  // namespace

RunMode parse_mode(const std::string& text) {
  if (text == "solve") return RunMode::Solve;
  if (text == "precond_study" || text == "precond-study") return RunMode::PrecondStudy;
  if (text == "spectral_study" || text == "spectral-study") return RunMode::SpectralStudy;
  if (text == "compress_study" || text == "compress-study") return RunMode::CompressStudy;
  throw std::invalid_argument("unknown mode '" + text + "'");
}

std::string mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::Solve: return "solve";
    case RunMode::PrecondStudy: return "precond_study";
    case RunMode::SpectralStudy: return "spectral_study";
    case RunMode::CompressStudy: return "compress_study";
  }
  return "solve";
}

void RunConfig::validate() const {
  if (preset != "lattice" && preset != "homogeneous") throw std::invalid_argument("preset must be lattice or homogeneous");
  check_g(g);
  if (sigma_a < 0.0 || sigma_s < 0.0 || source < 0.0) throw std::invalid_argument("optical parameters must be nonnegative");
  if (sigma_a + sigma_s <= 0.0) throw std::invalid_argument("sigma_a + sigma_s must be positive");
  if (sphere_level < 0 || sphere_level > 7) throw std::invalid_argument("sphere_level must be in [0, 7]");
  if (spatial_refine < 0 || spatial_refine > 4) throw std::invalid_argument("spatial_refine must be in [0, 4]");
  solver.validate();
  hmatrix.validate();
  if (compressed_switch < 1) throw std::invalid_argument("compressed_switch must be positive");
  for (double v : study_g) check_g(v);
  for (int v : study_N_pre)
    if (v < -1 || (v >= 0 && v % 2 == 0)) throw std::invalid_argument("study_N_pre entries must be -1 or odd");
  for (int v : study_N_corr)
    if (v < -1 || (v >= 0 && v % 2 != 0)) throw std::invalid_argument("study_N_corr entries must be -1 or even");
  for (int v : study_l)
    if (v < 1) throw std::invalid_argument("study_l entries must be >= 1");
  for (int v : compress_levels)
    if (v < 0 || v > 7) throw std::invalid_argument("compress_levels entries must be in [0, 7]");
}

ConfigError::ConfigError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

RunConfig parse_config(const std::string& text) {
  std::map<std::string, const Key*> lookup;
  for (const auto& [name, key] : keys()) lookup[name] = &key;
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string body = trim(raw.substr(0, raw.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected key = value");
    const std::string name = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    auto it = lookup.find(name);
    if (it == lookup.end()) throw ConfigError(line, "unknown key '" + name + "'");
    if (!seen.insert(name).second) throw ConfigError(line, "duplicate key '" + name + "'");
    try {
      it->second->set(cfg, value);
    } catch (const std::exception& e) {
      throw ConfigError(line, name + ": " + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(0, e.what());
  }
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [name, key] : keys()) out += name + " = " + key.get(cfg) + "\n";
  return out;
}

std::string config_comment(const RunConfig& cfg) {
  std::string out = "config:";
  for (const auto& [name, key] : keys()) out += " " + name + "=" + key.get(cfg) + ";";
  return out;
}

}  // namespace rte
