#include "mmm/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmm/bn_pricing.hpp"
#include "mmm/cli/config.hpp"
#include "mmm/cli/csv_io.hpp"
#include "mmm/error.hpp"
#include "mmm/info_theory.hpp"
#include "mmm/market_time.hpp"
#include "mmm/sde_kernel.hpp"
#include "mmm/special.hpp"
#include "mmm/stats_verify.hpp"

namespace mmm::cli {

namespace {

// key=value tokens become --key value
std::vector<std::string> normalize_args(int argc, const char* const* argv) {
  std::vector<std::string> out;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    const auto eq = a.find('=');
    const bool keyed = eq != std::string::npos && eq > 0 && a[0] != '-' &&
                       std::all_of(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(eq),
                                   [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
    if (keyed) {
      out.push_back("--" + a.substr(0, eq));
      out.push_back(a.substr(eq + 1));
    } else {
      out.push_back(a);
    }
  }
  return out;
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Writes to the named file, or to out when the name is empty.
void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(out);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open output file '" + path + "'");
  write(file);
  file.flush();
  if (!file) throw IoError("write to '" + path + "' failed");
}

int cmd_simulate(const std::string& config_path, const std::string& out_override, std::ostream& out) {
  auto config = load_config(config_path);
  if (!out_override.empty()) config.out = out_override;
  const auto& m = config.market;
  const auto grid = sde::TimeGrid::uniform(m.tau0, m.tau0 + config.T, config.dt);
  auto hashed = config;
  hashed.out.clear();  // where the rows go does not change them
  const auto hash = fnv1a(canonical(hashed));
  emit(config.out, out, [&](std::ostream& os) {
    os << header_comment(hash, config.seed) << '\n';
    constexpr std::size_t chunk = 1024;
    for (std::size_t offset = 0; offset < config.n_paths; offset += chunk) {
      const auto count = std::min(chunk, config.n_paths - offset);
      const auto paths = market::simulate_market(m, grid, count, config.seed, offset);
      write_paths_csv(os, paths, offset, offset == 0);
    }
  });
  return kSuccess;
}

std::vector<stats::TestReport> suite_reports(const std::string& suite, std::uint64_t seed) {
  std::vector<stats::TestReport> reports;
  const bool all = suite == "all";
  bool known = all;
  if (all || suite == "gamma") {
    known = true;
    for (std::size_t n : {1, 2, 4}) {
      auto c = market::MarketConfig::minimal(n);
      c.initial = market::FixedInitial{std::vector<double>(n, 1.0)};
      auto r = stats::verify_gamma_stationarity(c, 100.0, 10000, seed);
      const double rel = std::abs(r.details["sample_mean"] / r.details["reference_mean"] - 1.0);
      r.pass = r.pass && rel < 0.05;
      r.details["n"] = static_cast<double>(n);
      reports.push_back(r);
    }
  }
  if (all || suite == "surprisal") {
    known = true;
    const auto grid = info::log_grid();
    for (double omega : {0.25, 0.5, 1.0}) {
      const info::ConstraintSet cs{4.0 * omega, info::log_mean_gamma(omega)};
      const auto sol = info::minimize_surprisal(cs, grid);
      const sde::GammaDensity g(4.0 * omega);
      const auto ref = info::GridDensity::from_function(grid, [&](double y) { return g.pdf(y); });
      stats::TestReport r;
      r.statistic = info::l1_distance(sol, ref);
      r.p_value = r.statistic < 1e-3 ? 1.0 : 0.0;
      r.pass = r.statistic < 1e-3;
      r.n_samples = grid.size();
      r.description = "surprisal Lagrangian recovers the gamma density (L1 distance)";
      r.details["omega"] = omega;
      r.details["surprisal"] = info::surprisal(sol);
      reports.push_back(r);
    }
    const auto search = info::match_gamma_phi(3, 0.5);
    stats::TestReport r;
    r.statistic = static_cast<double>(search.matches.size());
    r.p_value = search.unique ? 1.0 : 0.0;
    r.pass = search.unique;
    r.n_samples = search.candidates;
    r.description = "phi(y) = y is the only polynomial volatility function with gamma stationary law";
    r.details["scaled_matches"] = static_cast<double>(search.scaled_matches.size());
    reports.push_back(r);
  }
  if (all || suite == "kl") {
    known = true;
    for (double lh : {0.05, 0.2, 1.0}) {
      const auto est = info::kl_divergence_mc(market::MarketConfig::minimal(1, lh), 1000000, seed);
      const double target = 0.5 * lh * lh;
      stats::TestReport r;
      r.statistic = est.value;
      r.p_value = std::abs(est.value / target - 1.0) < 0.01 ? 1.0 : 0.0;
      r.pass = r.p_value > 0.5;
      r.n_samples = est.samples;
      r.description = "Kullback-Leibler divergence equals lambda_hat^2 / 2";
      r.details["lambda_hat"] = lh;
      r.details["std_error"] = est.std_error;
      reports.push_back(r);
    }
  }
  if (all || suite == "student-t") {
    known = true;
    reports.push_back(stats::verify_student_t_returns(market::MarketConfig::minimal(1), 0.01, 100000, seed));
  }
  if (all || suite == "leverage") {
    known = true;
    reports.push_back(stats::verify_leverage(market::MarketConfig::minimal(1), 0.1, 1000, seed));
  }
  if (all || suite == "additivity") {
    known = true;
    reports.push_back(stats::verify_additivity(4, 2, 1.0, 10000, seed));
    reports.push_back(stats::verify_additivity(4, 4, 1.0, 10000, seed));
  }
  if (all || suite == "three-halves") {
    known = true;
    reports.push_back(stats::verify_three_halves_vol(market::MarketConfig::minimal(1), 100.0, 1e-4, 128, seed));
  }
  if (!known)
    throw ParameterError("suite: unknown suite '" + suite +
                         "' (gamma, surprisal, kl, student-t, leverage, additivity, three-halves, all)");
  return reports;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& path, std::ostream& out) {
  const auto reports = suite_reports(suite, seed);
  emit(path, out, [&](std::ostream& os) { os << stats::to_json(reports) << '\n'; });
  const bool ok = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
  return ok ? kSuccess : kFailure;
}

int cmd_price_zcb(double s_star, double dl, double l_now, std::ostream& out) {
  const auto q = bn::zcb_price(s_star, l_now, l_now + dl);
  out << "price=" << fixed(q.price) << " delta=" << fixed(q.delta) << '\n';
  return kSuccess;
}

int cmd_hedge(const std::string& config_path, double dl, const std::string& clock, std::ostream& out) {
  if (clock != "realized" && clock != "model") throw ParameterError("clock: expected realized or model");
  RunConfig config;
  if (config_path.empty()) {
    config.market = market::MarketConfig::minimal(2);
    config.market.initial = market::FixedInitial{{0.5, 0.5}};
    config.market.measure = market::Measure::BenchmarkNeutral;
    config.dt = 1e-4;
  } else {
    config = load_config(config_path);
  }
  if (!(dl > 0.0)) throw ParameterError("dl: must be positive");
  const double l_maturity = bn::bessel_time(config.market.tau0) + dl;
  const auto report = bn::hedge_zcb(config.market, l_maturity, config.dt, config.n_paths, config.seed,
                                    clock == "model" ? bn::HedgeClock::Model : bn::HedgeClock::Realized);
  nlohmann::json j;
  j["config_hash"] = hash_hex(fnv1a(canonical(config)));
  j["seed"] = config.seed;
  j["n_paths"] = config.n_paths;
  j["rebalance_dt"] = config.dt;
  j["bessel_time_to_maturity"] = dl;
  j["clock"] = clock;
  j["mean_abs_error"] = report.mean_abs_error;
  j["max_abs_error"] = report.max_abs_error;
  j["rebalance_count"] = report.rebalance_count;
  out << j.dump(2) << '\n';
  return kSuccess;
}

int cmd_market_time(const std::string& input, double tau0, bool estimate, const std::string& path,
                    std::ostream& out) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw IoError("cannot open input file '" + input + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::istringstream parse(text);
  const auto series = read_series_csv(parse);
  std::string fit_line;
  if (estimate) {
    const auto fit = clock::estimate_tau0(series);
    tau0 = fit.tau0;
    fit_line = "# tau0=" + fixed(fit.tau0, 10) + " slope=" + fixed(fit.slope, 10) +
               " fit_residual=" + fixed(fit.fit_residual, 10);
  }
  const auto clock = clock::market_time_from_series(series, tau0);
  emit(path, out, [&](std::ostream& os) {
    os << header_comment(fnv1a(text), 0) << '\n';
    if (!fit_line.empty()) os << fit_line << '\n';
    os << "t,tau\n";
    char buf[80];
    for (std::size_t i = 0; i < clock.tau.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", clock.times[i], clock.tau[i]);
      os << buf;
    }
  });
  return kSuccess;
}

int cmd_surprisal(double omega, double mean, double log_mean, std::ostream& out) {
  if (!(omega > 0.0)) throw ParameterError("omega: must be positive");
  const info::ConstraintSet cs{std::isnan(mean) ? 4.0 * omega : mean,
                               std::isnan(log_mean) ? info::log_mean_gamma(omega) : log_mean};
  const auto grid = info::log_grid();
  const auto sol = info::solve_surprisal_lagrangian(cs, grid);
  const sde::GammaDensity g(4.0 * omega);
  const auto ref = info::GridDensity::from_function(grid, [&](double y) { return g.pdf(y); });
  nlohmann::json j;
  j["omega"] = omega;
  j["mean_level"] = cs.mean_level;
  j["log_mean_level"] = cs.log_mean_level;
  j["surprisal"] = info::surprisal(sol.density);
  j["gamma_surprisal"] = gamma_entropy(2.0 * omega, 2.0);
  j["l1_to_gamma"] = info::l1_distance(sol.density, ref);
  j["lambda0"] = sol.lambda0;
  j["lambda1"] = sol.lambda1;
  j["lambda2"] = sol.lambda2;
  j["iterations"] = sol.iterations;
  out << j.dump(2) << '\n';
  return kSuccess;
}

int cmd_kl(double lambda_hat, std::size_t n, std::size_t samples, std::uint64_t seed, std::ostream& out) {
  if (n == 0) throw ParameterError("n: number of factors must be positive");
  const auto est = info::kl_divergence_mc(market::MarketConfig::minimal(n, lambda_hat), samples, seed);
  out << "I = " << fixed(est.value) << " ± " << fixed(est.std_error) << "  (lambda_hat^2/2 = "
      << fixed(0.5 * lambda_hat * lambda_hat) << ")\n";
  return kSuccess;
}

int guarded(const std::function<int()>& run, std::ostream& err) {
  try {
    return run();
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kIoError;
  } catch (const DataError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const ParameterError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const DomainError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const CalibrationError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimal market model: simulation, verification, pricing and market-time estimation", "mmm"};
  app.require_subcommand(1);

  std::string config_path, out_path, suite = "all", input, clock = "realized";
  std::uint64_t seed = 1;
  double s_star = 1.0, dl = 0.5, l_now = 1.0, tau0 = 0.0, omega = 0.5, lambda_hat = 0.2;
  double mean = std::nan(""), log_mean = std::nan("");
  bool estimate = false;
  std::size_t n = 1, samples = 1000000;

  auto* simulate = app.add_subcommand("simulate", "simulate market paths and write them as CSV");
  simulate->add_option("--config", config_path, "key = value configuration file")->required();
  simulate->add_option("--out", out_path, "output CSV (overrides the config's out; default stdout)");

  auto* verify = app.add_subcommand("verify", "run a verification suite and print JSON reports");
  verify->add_option("suite", suite, "gamma, surprisal, kl, student-t, leverage, additivity, three-halves or all");
  verify->add_option("--seed", seed);
  verify->add_option("--out", out_path, "write the reports here instead of stdout");

  auto* price = app.add_subcommand("price-zcb", "zero-coupon bond price and delta");
  price->add_option("--s_star,--s-star", s_star, "benchmark value")->required();
  price->add_option("--dl", dl, "Bessel time to maturity")->required();
  price->add_option("--l_now,--l-now", l_now, "current Bessel time");

  auto* hedge = app.add_subcommand("hedge", "delta-hedge the zero-coupon bond along simulated paths");
  hedge->add_option("--config", config_path, "market and run configuration (default: n = 2 reference)");
  hedge->add_option("--dl", dl, "Bessel time to maturity");
  hedge->add_option("--clock", clock, "realized (quadratic variation of sqrt S*) or model");

  auto* mtime = app.add_subcommand("market-time", "estimate the market-time clock of an index CSV (t,value)");
  mtime->add_option("--input", input, "input CSV")->required();
  mtime->add_option("--tau0", tau0, "initial market time");
  mtime->add_flag("--estimate", estimate, "calibrate tau0 by linear regression");
  mtime->add_option("--out", out_path, "output CSV (default stdout)");

  auto* surp = app.add_subcommand("surprisal", "solve the surprisal Lagrangian for mean/log-mean constraints");
  surp->add_option("--omega", omega, "risk premium parameter (mean 4 omega)");
  surp->add_option("--mean", mean, "mean constraint (default 4 omega)");
  surp->add_option("--log_mean,--log-mean", log_mean, "log-mean constraint (default ln 2 + psi(2 omega))");

  auto* kl = app.add_subcommand("kl", "Monte Carlo Kullback-Leibler divergence");
  kl->add_option("--lambda_hat,--lambda-hat", lambda_hat);
  kl->add_option("--n", n, "number of factors");
  kl->add_option("--samples", samples);
  kl->add_option("--seed", seed);

  auto args = normalize_args(argc, argv);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  if (simulate->parsed()) return guarded([&] { return cmd_simulate(config_path, out_path, out); }, err);
  if (verify->parsed()) return guarded([&] { return cmd_verify(suite, seed, out_path, out); }, err);
  if (price->parsed()) return guarded([&] { return cmd_price_zcb(s_star, dl, l_now, out); }, err);
  if (hedge->parsed()) return guarded([&] { return cmd_hedge(config_path, dl, clock, out); }, err);
  if (mtime->parsed())
    return guarded([&] { return cmd_market_time(input, tau0, estimate, out_path, out); }, err);
  if (surp->parsed()) return guarded([&] { return cmd_surprisal(omega, mean, log_mean, out); }, err);
  if (kl->parsed()) return guarded([&] { return cmd_kl(lambda_hat, n, samples, seed, out); }, err);
  return kInputError;
}

}  // namespace mmm::cli
