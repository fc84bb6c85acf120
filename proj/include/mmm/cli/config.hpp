#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>

#include "mmm/market_model.hpp"

namespace mmm::cli {

/// Market parameters plus run controls, read from a flat `key = value` file.
///
/// Keys: n, omega, activities, lambda_hat, tau0, init, measure, n_paths, dt,
/// T, seed, out. Lists are comma separated; `init` is `stationary` or
/// `fixed:<y1,y2,...>`; `measure` is `P` or `Q`. Lines starting with `#` are
/// comments. omega and activities default to 1/n and 1.
struct RunConfig {
  market::MarketConfig market = market::MarketConfig::minimal(1);
  std::size_t n_paths = 1000;
  double dt = 0.01;
  double T = 1.0;
  std::uint64_t seed = 1;
  std::string out;
};

/// Throws ParameterError naming the offending key.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Canonical `key = value` rendering; parse_config(canonical(c)) == c.
std::string canonical(const RunConfig& config);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

std::string hash_hex(std::uint64_t hash);

}  // namespace mmm::cli
