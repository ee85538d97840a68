// Copyright (c) dcalm contributors

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dcalm/applications/recovery.hpp"
#include "dcalm/core.hpp"

namespace dcalm {

enum class Family { Weber, Recovery };
enum class SolverChoice { Psalmdc, Dca, Both };

inline std::string to_string(Family family) {
  return family == Family::Weber ? "weber" : "recovery";
}

inline std::string to_string(SolverChoice choice) {
  switch (choice) {
    case SolverChoice::Psalmdc:
      return "psalmdc";
    case SolverChoice::Dca:
      return "dca";
    case SolverChoice::Both:
      return "both";
  }
  return "unknown";
}

inline SolverChoice parse_solver_choice(const std::string& text) {
  if (text == "psalmdc") return SolverChoice::Psalmdc;
  if (text == "dca") return SolverChoice::Dca;
  if (text == "both") return SolverChoice::Both;
  throw InputError("unknown solver '" + text + "' (expected psalmdc, dca or both)");
}

struct ExperimentConfig {
  Family family = Family::Recovery;

  // Weber family.
  std::vector<int> facilities{1};
  /// CSV with header x,y,w; empty selects the synthetic instance.
  std::string weber_data;
  std::uint64_t data_seed = 1;
  int weber_points = 50;
  double box_lo = 0.0;
  double box_hi = 10.0;
  /// Known optimal values aligned with `facilities`; computed when empty.
  std::vector<double> reference_objectives;
  int reference_starts = 200;
  int decimals = 3;

  // Recovery family.
  Index n = 256;
  Index m = 64;
  std::vector<Index> sparsities{5};
  MatrixKind matrix = MatrixKind::Gaussian;
  double refinement = 1.0;
  SparsityModel variant = SparsityModel::L1MinusTopK;
  double tolerance = 1e-3;

  int instances = 10;
  std::uint64_t seed = 0;
  SolverChoice solver = SolverChoice::Both;
  double time_limit = 3600.0;
  int max_outer_iterations = 1000;
  std::string output_dir = "out";
  int threads = 1;

  std::vector<std::string> solvers() const {
    if (solver == SolverChoice::Both) return {"psalmdc", "dca"};
    return {to_string(solver)};
  }

  void validate() const {
    if (instances < 1) throw InputError("config: instances must be at least 1");
    if (!(time_limit > 0.0)) throw InputError("config: time_limit must be positive");
    if (max_outer_iterations < 1) throw InputError("config: max_iterations must be positive");
    if (threads < 1) throw InputError("config: threads must be at least 1");
    if (output_dir.empty()) throw InputError("config: out must not be empty");
    if (family == Family::Weber) {
      if (facilities.empty()) throw InputError("config: facilities list is empty");
      for (int p : facilities) {
        if (p < 1) throw InputError("config: facilities must be positive");
      }
      if (!(box_lo < box_hi)) throw InputError("config: degenerate box");
      if (weber_points < 1) throw InputError("config: points must be positive");
      if (!reference_objectives.empty() && reference_objectives.size() != facilities.size()) {
        throw InputError("config: reference_objective needs one value per facility count");
      }
      if (decimals < 0 || decimals > 12) throw InputError("config: decimals out of range");
    } else {
      if (sparsities.empty()) throw InputError("config: sparsity list is empty");
      if (m < 1 || m > n) throw InputError("config: need 1 <= m <= n");
      for (Index s : sparsities) {
        if (s < 1 || s > n) throw InputError("config: sparsity must lie in [1, n]");
      }
      if (refinement < 1.0) throw InputError("config: refinement must be at least 1");
      if (!(tolerance > 0.0)) throw InputError("config: tolerance must be positive");
    }
  }
};

namespace detail {

inline std::string trim(const std::string& text) {
  const auto first = std::find_if_not(text.begin(), text.end(),
                                      [](unsigned char ch) { return std::isspace(ch); });
  const auto last = std::find_if_not(text.rbegin(), text.rend(),
                                     [](unsigned char ch) { return std::isspace(ch); })
                        .base();
  return first < last ? std::string(first, last) : std::string();
}

inline double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw InputError("config: '" + key + "' expects a number, got '" + text + "'");
}

inline long long parse_integer(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw InputError("config: '" + key + "' expects an integer, got '" + text + "'");
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  if (!text.empty() && text.front() != '-') {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(text, &used);
      if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
  }
  throw InputError("config: '" + key + "' expects an unsigned integer, got '" + text + "'");
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  return items;
}

}  // namespace detail

/// Applies one `key = value` assignment.
inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
  using detail::parse_double;
  using detail::parse_integer;
  if (key == "family") {
    if (value == "weber") {
      cfg.family = Family::Weber;
    } else if (value == "recovery") {
      cfg.family = Family::Recovery;
    } else {
      throw InputError("config: unknown family '" + value + "'");
    }
  } else if (key == "facilities") {
    cfg.facilities.clear();
    for (const auto& item : detail::split_list(value)) {
      cfg.facilities.push_back(static_cast<int>(parse_integer(key, item)));
    }
  } else if (key == "data") {
    cfg.weber_data = value;
  } else if (key == "data_seed") {
    cfg.data_seed = detail::parse_u64(key, value);
  } else if (key == "points") {
    cfg.weber_points = static_cast<int>(parse_integer(key, value));
  } else if (key == "box_lo") {
    cfg.box_lo = parse_double(key, value);
  } else if (key == "box_hi") {
    cfg.box_hi = parse_double(key, value);
  } else if (key == "reference_objective") {
    cfg.reference_objectives.clear();
    for (const auto& item : detail::split_list(value)) {
      cfg.reference_objectives.push_back(parse_double(key, item));
    }
  } else if (key == "reference_starts") {
    cfg.reference_starts = static_cast<int>(parse_integer(key, value));
  } else if (key == "decimals") {
    cfg.decimals = static_cast<int>(parse_integer(key, value));
  } else if (key == "n") {
    cfg.n = parse_integer(key, value);
  } else if (key == "m") {
    cfg.m = parse_integer(key, value);
  } else if (key == "sparsity") {
    cfg.sparsities.clear();
    for (const auto& item : detail::split_list(value)) {
      cfg.sparsities.push_back(parse_integer(key, item));
    }
  } else if (key == "matrix") {
    if (value == "gaussian") {
      cfg.matrix = MatrixKind::Gaussian;
    } else if (value == "dct") {
      cfg.matrix = MatrixKind::Dct;
    } else if (value == "oversampled-dct") {
      cfg.matrix = MatrixKind::OversampledDct;
    } else {
      throw InputError("config: unknown matrix kind '" + value + "'");
    }
  } else if (key == "refinement") {
    cfg.refinement = parse_double(key, value);
  } else if (key == "variant") {
    if (value == "l1-l2") {
      cfg.variant = SparsityModel::L1MinusL2;
    } else if (value == "l1-topk") {
      cfg.variant = SparsityModel::L1MinusTopK;
    } else {
      throw InputError("config: unknown variant '" + value + "'");
    }
  } else if (key == "tolerance") {
    cfg.tolerance = parse_double(key, value);
  } else if (key == "instances") {
    cfg.instances = static_cast<int>(parse_integer(key, value));
  } else if (key == "seed") {
    cfg.seed = detail::parse_u64(key, value);
  } else if (key == "solver") {
    cfg.solver = parse_solver_choice(value);
  } else if (key == "time_limit") {
    cfg.time_limit = parse_double(key, value);
  } else if (key == "max_iterations") {
    cfg.max_outer_iterations = static_cast<int>(parse_integer(key, value));
  } else if (key == "out") {
    cfg.output_dir = value;
  } else if (key == "threads") {
    cfg.threads = static_cast<int>(parse_integer(key, value));
  } else {
    throw InputError("config: unknown key '" + key + "'");
  }
}

/// Parses flat `key = value` text; `#` starts a comment.
inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("config: line " + std::to_string(line_no) + " is not key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw InputError("config: line " + std::to_string(line_no) + " has an empty key or value");
    }
    apply_config_entry(cfg, key, value);
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace dcalm
