#include "mmm/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string_view>
#include <vector>

#include "mmm/error.hpp"

namespace mmm::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& why) { throw ParameterError(key + ": " + why); }

double parse_real(const std::string& key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v))
    bad(key, "expected a real number, got '" + std::string(text) + "'");
  return v;
}

std::uint64_t parse_count(const std::string& key, std::string_view text) {
  const double v = parse_real(key, text);
  if (v < 0.0 || v != std::floor(v) || v > 9.0e15) bad(key, "expected a nonnegative integer, got '" + std::string(trim(text)) + "'");
  return static_cast<std::uint64_t>(v);
}

std::vector<double> parse_list(const std::string& key, std::string_view text) {
  std::vector<double> out;
  text = trim(text);
  if (text.empty()) bad(key, "empty list");
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_real(key, text.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_real(v[i]);
  return s;
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  static const std::set<std::string> known = {"n",  "omega", "activities", "lambda_hat", "tau0", "init",
                                              "measure", "n_paths", "dt", "T", "seed", "out"};
  std::map<std::string, std::string> kv;
  std::string line;
  long number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw ParameterError("line " + std::to_string(number) + ": expected key = value");
    const std::string key(trim(body.substr(0, eq)));
    if (!known.count(key)) bad(key, "unknown configuration key");
    if (kv.count(key)) bad(key, "duplicate key");
    kv[key] = std::string(trim(body.substr(eq + 1)));
  }

  RunConfig c;
  auto& m = c.market;
  if (kv.count("n")) {
    const auto n = parse_count("n", kv["n"]);
    if (n == 0) bad("n", "number of factors must be positive");
    m = market::MarketConfig::minimal(n);
  }
  if (kv.count("omega")) {
    m.omega = parse_list("omega", kv["omega"]);
    if (m.omega.size() != m.n) bad("omega", "expected " + std::to_string(m.n) + " entries");
  }
  if (kv.count("activities")) {
    m.activities = parse_list("activities", kv["activities"]);
    if (m.activities.size() != m.n) bad("activities", "expected " + std::to_string(m.n) + " entries");
  }
  if (kv.count("lambda_hat")) m.lambda_hat = parse_real("lambda_hat", kv["lambda_hat"]);
  if (kv.count("tau0")) m.tau0 = parse_real("tau0", kv["tau0"]);
  if (kv.count("init")) {
    const std::string& v = kv["init"];
    if (v == "stationary") {
      m.initial = market::StationaryInitial{};
    } else if (v.rfind("fixed:", 0) == 0) {
      auto values = parse_list("init", std::string_view(v).substr(6));
      if (values.size() != m.n) bad("init", "expected " + std::to_string(m.n) + " fixed values");
      m.initial = market::FixedInitial{std::move(values)};
    } else {
      bad("init", "expected 'stationary' or 'fixed:<list>', got '" + v + "'");
    }
  }
  if (kv.count("measure")) {
    const std::string& v = kv["measure"];
    if (v == "P") m.measure = market::Measure::RealWorld;
    else if (v == "Q") m.measure = market::Measure::BenchmarkNeutral;
    else bad("measure", "expected P or Q, got '" + v + "'");
  }
  if (kv.count("n_paths")) {
    c.n_paths = parse_count("n_paths", kv["n_paths"]);
    if (c.n_paths == 0) bad("n_paths", "must be positive");
  }
  if (kv.count("dt")) {
    c.dt = parse_real("dt", kv["dt"]);
    if (!(c.dt > 0.0)) bad("dt", "must be positive");
  }
  if (kv.count("T")) {
    c.T = parse_real("T", kv["T"]);
    if (!(c.T > 0.0)) bad("T", "must be positive");
  }
  if (kv.count("seed")) c.seed = parse_count("seed", kv["seed"]);
  if (kv.count("out")) c.out = kv["out"];
  m.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string canonical(const RunConfig& c) {
  const auto& m = c.market;
  std::ostringstream s;
  s << "n = " << m.n << '\n'
    << "omega = " << format_list(m.omega) << '\n'
    << "activities = " << format_list(m.activities) << '\n'
    << "lambda_hat = " << format_real(m.lambda_hat) << '\n'
    << "tau0 = " << format_real(m.tau0) << '\n';
  if (const auto* f = std::get_if<market::FixedInitial>(&m.initial))
    s << "init = fixed:" << format_list(f->normalized) << '\n';
  else
    s << "init = stationary\n";
  s << "measure = " << (m.measure == market::Measure::RealWorld ? "P" : "Q") << '\n'
    << "n_paths = " << c.n_paths << '\n'
    << "dt = " << format_real(c.dt) << '\n'
    << "T = " << format_real(c.T) << '\n'
    << "seed = " << c.seed << '\n';
  if (!c.out.empty()) s << "out = " << c.out << '\n';
  return s.str();
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace mmm::cli
