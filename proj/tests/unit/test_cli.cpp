#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mmm/cli/commands.hpp"
#include "mmm/cli/config.hpp"
#include "mmm/cli/csv_io.hpp"
#include "mmm/error.hpp"

using namespace mmm;
using namespace mmm::cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "mmm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name, const std::string& content) {
  const auto dir = std::filesystem::temp_directory_path() / "mmm_cli_tests";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << content;
  return path;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing") {
  std::istringstream in("# reference\nn = 2\nlambda_hat = 0.05\ninit = fixed:0.5,1.5\nmeasure = Q\nn_paths = 7\n");
  const auto c = parse_config(in);
  CHECK(c.market.n == 2);
  CHECK(c.market.omega == std::vector<double>{0.5, 0.5});
  CHECK(c.market.lambda_hat == 0.05);
  CHECK(c.market.measure == market::Measure::BenchmarkNeutral);
  CHECK(std::get<market::FixedInitial>(c.market.initial).normalized == std::vector<double>{0.5, 1.5});
  CHECK(c.n_paths == 7);

  std::istringstream again(canonical(c));
  CHECK(canonical(parse_config(again)) == canonical(c));

  std::istringstream unknown("colour = red\n");
  CHECK_THROWS_AS(parse_config(unknown), ParameterError);
  std::istringstream twice("n = 1\nn = 2\n");
  CHECK_THROWS_AS(parse_config(twice), ParameterError);
  std::istringstream zero("n = 0\n");
  try {
    parse_config(zero);
    FAIL("expected ParameterError");
  } catch (const ParameterError& e) {
    CHECK(std::string(e.what()).find("n:") == 0);
  }
}

TEST_CASE("hash") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hash_hex(0xabcULL) == "0000000000000abc");
  CHECK(header_comment(0xabcULL, 9) == "# config_hash=0000000000000abc seed=9");
}

TEST_CASE("series CSV") {
  std::istringstream good("# index\nt,value\n0,1\n\n0.5,2\n1,4\n");
  const auto s = read_series_csv(good);
  CHECK(s.size() == 3);
  CHECK(s.values()[2] == 4.0);
  std::istringstream bad("t,value\n0,1\n0.5,abc\n");
  try {
    read_series_csv(bad);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::istringstream header("time,price\n0,1\n");
  CHECK_THROWS_AS(read_series_csv(header), DataError);
}

TEST_CASE("price-zcb") {
  const auto r = run({"price-zcb", "s_star=1", "dl=0.5"});
  CHECK(r.code == 0);
  CHECK(r.out == "price=0.632121 delta=0.367879\n");
  CHECK(run({"price-zcb", "--s_star", "1", "--dl", "-1"}).code == kInputError);
}

TEST_CASE("simulate writes deterministic CSV") {
  const auto config = scratch("ref.conf", "n = 2\nn_paths = 3\ndt = 0.1\nT = 0.5\nseed = 4\n");
  const auto a = scratch("a.csv", ""), b = scratch("b.csv", "");
  REQUIRE(run({"simulate", "--config", config.string(), "--out", a.string()}).code == 0);
  REQUIRE(run({"simulate", "--config", config.string(), "--out", b.string()}).code == 0);
  const auto text = slurp(a);
  CHECK(text == slurp(b));

  std::istringstream lines(text);
  std::string first, header, row;
  std::getline(lines, first);
  std::getline(lines, header);
  CHECK(first.rfind("# config_hash=", 0) == 0);
  CHECK(first.find("seed=4") != std::string::npos);
  CHECK(header == "path,tau,tau_1,tau_2,S_1,S_2,S_FP,S_star,Z,tau_star");
  std::size_t rows = 0;
  while (std::getline(lines, row))
    if (!row.empty()) ++rows;
  CHECK(rows == 3 * 6);

  const auto bad = scratch("bad.conf", "n = 0\n");
  const auto r = run({"simulate", "--config", bad.string()});
  CHECK(r.code == kInputError);
  CHECK(r.err.find("n:") != std::string::npos);
  CHECK(run({"simulate", "--config", "/nonexistent/dir/x.conf"}).code == kIoError);
}

TEST_CASE("market-time") {
  const auto flat = scratch("flat.csv", "t,value\n0,2\n0.5,2\n1,2\n");
  const auto r = run({"market-time", "--input", flat.string(), "--tau0", "0.3"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line.rfind("# config_hash=", 0) == 0);
  std::getline(lines, line);
  CHECK(line == "t,tau");
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    CHECK(std::stod(line.substr(line.find(',') + 1)) == doctest::Approx(0.3));
  }
  const auto bad = scratch("bad.csv", "t,value\n0,1\n0.5,1,2\n");
  const auto b = run({"market-time", "--input", bad.string()});
  CHECK(b.code == kInputError);
  CHECK(b.err.find("line 3") != std::string::npos);
  CHECK(run({"market-time", "--input", flat.string(), "--estimate"}).code == kInputError);
  CHECK(run({"market-time", "--input", "/nonexistent.csv"}).code == kIoError);
}

TEST_CASE("surprisal and kl") {
  const auto s = run({"surprisal", "--omega", "0.25"});
  REQUIRE(s.code == 0);
  const auto j = nlohmann::json::parse(s.out);
  CHECK(j.contains("surprisal"));

  const auto k = run({"kl", "lambda_hat=0.2", "samples=100000"});
  REQUIRE(k.code == 0);
  double value = 0.0, se = 0.0;
  REQUIRE(std::sscanf(k.out.c_str(), "I = %lf \xc2\xb1 %lf", &value, &se) == 2);
  CHECK(std::abs(value - 0.02) < 4.0 * se);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == kInputError);
  CHECK(run({"no-such-command"}).code == kInputError);
  CHECK(run({"--help"}).code == kSuccess);
}

}
