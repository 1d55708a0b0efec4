#pragma once
// Run configuration: a plain key=value file, then command-line overrides.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "addtwist/cache.hpp"
#include "addtwist/forms.hpp"

namespace addtwist {

struct RunConfig {
  std::int64_t coeff_count = 0;  // 0: sized from the largest requested denominator
  double tolerance = 1e-12;
  int workers = 1;
  std::string cache_dir;  // empty: ADDTWIST_CACHE_DIR or the default
  std::vector<double> x_grid = {100, 150, 200, 300};
  std::vector<std::string> forms = {"delta", "11.2.a", "5.4.a"};
  bool use_cache = true;
  bool verify_cache = false;  // recompute cache hits as they are read

  void validate() const {
    if (!(tolerance >= 1e-12 && tolerance <= 1e-4))
      throw std::invalid_argument("tolerance must lie in [1e-12, 1e-4]");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (coeff_count < 0) throw std::invalid_argument("coeff_count must be >= 0");
    for (std::size_t i = 1; i < x_grid.size(); ++i)
      if (!(x_grid[i] > x_grid[i - 1])) throw std::invalid_argument("x_grid must be strictly increasing");
    for (const auto& f : forms) registry_entry(f);
  }

  bool selected(const std::string& form_id) const {
    return std::find(forms.begin(), forms.end(), form_id) != forms.end();
  }

  std::string resolved_cache_dir() const { return cache_dir.empty() ? default_cache_dir() : cache_dir; }
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

/// Applies one key=value assignment.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  try {
    if (key == "coeff_count") {
      cfg.coeff_count = std::stoll(value);
    } else if (key == "tolerance") {
      cfg.tolerance = std::stod(value);
    } else if (key == "workers") {
      cfg.workers = std::stoi(value);
    } else if (key == "cache_dir") {
      cfg.cache_dir = value;
    } else if (key == "x_grid") {
      cfg.x_grid = parse_grid(value);
    } else if (key == "forms") {
      cfg.forms = split_list(value);
    } else if (key == "use_cache" || key == "verify_cache") {
      if (value != "0" && value != "1") throw std::invalid_argument("expected 0 or 1");
      (key == "use_cache" ? cfg.use_cache : cfg.verify_cache) = value == "1";
    } else {
      throw std::invalid_argument("unknown key");
    }
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("config key '" + key + "': " + e.what());
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("config key '" + key + "': value out of range");
  }
}

inline RunConfig parse_config(const std::string& text, RunConfig cfg = {}) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

inline RunConfig load_config(const std::string& path, RunConfig cfg = {}) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(cfg));
}

}  // namespace addtwist
