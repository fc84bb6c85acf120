#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "mmm/market_model.hpp"
#include "mmm/market_time.hpp"

namespace mmm::cli {

/// Reads a `t,value` CSV. Malformed rows raise DataError carrying the 1-based line.
clock::TimeSeries read_series_csv(std::istream& in);
clock::TimeSeries load_series_csv(const std::string& path);

/// `# config_hash=<hex> seed=<seed>`
std::string header_comment(std::uint64_t hash, std::uint64_t seed);

/// One row per (path, node): path,tau,tau_1..,S_1..,S_FP,S_star,Z,tau_star.
void write_paths_csv(std::ostream& out, const market::MarketPaths& paths, std::size_t path_offset = 0,
                     bool with_header = true);

}  // namespace mmm::cli
