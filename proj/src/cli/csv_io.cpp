#include "mmm/cli/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string_view>
#include <vector>

#include "mmm/cli/config.hpp"
#include "mmm/error.hpp"

namespace mmm::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double field(std::string_view text, long line, const char* name) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
    throw DataError("line " + std::to_string(line) + ": malformed " + name + " '" + std::string(text) + "'", line);
  return v;
}

void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

clock::TimeSeries read_series_csv(std::istream& in) {
  std::string line;
  long number = 0;
  bool header = false;
  std::vector<double> t, v;
  while (std::getline(in, line)) {
    ++number;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (!header) {
      if (body != "t,value") throw DataError("line " + std::to_string(number) + ": expected header 't,value'", number);
      header = true;
      continue;
    }
    const auto comma = body.find(',');
    if (comma == std::string_view::npos || body.find(',', comma + 1) != std::string_view::npos)
      throw DataError("line " + std::to_string(number) + ": expected two fields", number);
    const double time = field(body.substr(0, comma), number, "time");
    const double value = field(body.substr(comma + 1), number, "value");
    if (!(value > 0.0))
      throw DataError("line " + std::to_string(number) + ": value must be positive", number);
    if (!t.empty() && !(time > t.back()))
      throw DataError("line " + std::to_string(number) + ": times must be strictly increasing", number);
    t.push_back(time);
    v.push_back(value);
  }
  if (!header) throw DataError("missing header 't,value'", number);
  if (t.size() < 2) throw DataError("need at least two observations", number);
  return clock::TimeSeries(std::move(t), std::move(v));
}

clock::TimeSeries load_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file '" + path + "'");
  return read_series_csv(in);
}

std::string header_comment(std::uint64_t hash, std::uint64_t seed) {
  return "# config_hash=" + hash_hex(hash) + " seed=" + std::to_string(seed);
}

void write_paths_csv(std::ostream& out, const market::MarketPaths& paths, std::size_t path_offset,
                     bool with_header) {
  const std::size_t n = paths.n_factors();
  if (with_header) {
    out << "path,tau";
    for (std::size_t k = 1; k <= n; ++k) out << ",tau_" << k;
    for (std::size_t k = 1; k <= n; ++k) out << ",S_" << k;
    out << ",S_FP,S_star,Z,tau_star\n";
  }
  for (std::size_t p = 0; p < paths.paths(); ++p) {
    for (std::size_t i = 0; i < paths.nodes(); ++i) {
      out << p + path_offset << ',';
      put(out, paths.market_grid[i]);
      for (std::size_t k = 0; k < n; ++k) {
        out << ',';
        put(out, paths.normalized_factors[k].grid[i]);
      }
      for (std::size_t k = 0; k < n; ++k) {
        out << ',';
        put(out, paths.factors[k](p, i));
      }
      for (double v : {paths.factor_portfolio(p, i), paths.benchmark(p, i), paths.squared_benchmark_vol(p, i),
                       paths.benchmark_time(p, i)}) {
        out << ',';
        put(out, v);
      }
      out << '\n';
    }
  }
  if (!out) throw IoError("write failed");
}

}  // namespace mmm::cli
