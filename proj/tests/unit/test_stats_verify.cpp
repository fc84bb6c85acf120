#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mmm/error.hpp"
#include "mmm/market_model.hpp"
#include "mmm/sde_kernel.hpp"
#include "mmm/stats_verify.hpp"
#include "support/oracles.hpp"

using namespace mmm;
using namespace mmm::stats;

namespace {

// sup |F_n - F| evaluated at both sides of every jump
double ks_distance(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

std::vector<double> uniforms(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_SUITE("stats_verify") {

TEST_CASE("one-sample KS statistic, size and power") {
  const auto uniform_cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  const auto x = uniforms(500, 1);
  CHECK(ks_one_sample(x, uniform_cdf).statistic == doctest::Approx(ks_distance(x, uniform_cdf)).epsilon(1e-12));

  int rejected = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) rejected += ks_one_sample(uniforms(1000, 100 + seed), uniform_cdf).p_value <= 0.01;
  CHECK(rejected <= 3);

  std::mt19937_64 rng(5);
  std::gamma_distribution<double> g(2.0, 2.0);
  std::vector<double> gam(10000);
  for (auto& v : gam) v = g(rng);
  const auto exp_cdf = [](double y) { return y > 0.0 ? 1.0 - std::exp(-y / 2.0) : 0.0; };
  CHECK(ks_one_sample(gam, exp_cdf).p_value < 1e-6);
  const sde::GammaDensity four(4.0);
  CHECK(ks_one_sample(gam, [&](double y) { return four.cdf(y); }).p_value > 0.01);

  const std::vector<double> few(10, 0.5);
  CHECK_THROWS_AS(ks_one_sample(few, uniform_cdf), ParameterError);
}

TEST_CASE("two-sample KS") {
  const auto x = uniforms(400, 3);
  const auto same = ks_two_sample(x, x);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == doctest::Approx(1.0));
  auto shifted = uniforms(400, 4);
  for (auto& v : shifted) v += 0.3;
  CHECK(ks_two_sample(x, shifted).p_value < 1e-6);
  CHECK(ks_two_sample(x, uniforms(400, 5)).p_value > 0.01);
}

TEST_CASE("Student-t maximum likelihood") {
  const auto draws = oracle::student_t_draws(4.0, 0.3, 2.0, 40000, 7);
  const auto fit = fit_student_t(draws);
  CHECK(fit.df == doctest::Approx(4.0).epsilon(0.1));
  CHECK(fit.location == doctest::Approx(0.3).epsilon(0.1));
  CHECK(fit.scale == doctest::Approx(2.0).epsilon(0.05));
  CHECK(student_t_cdf(fit, fit.location) == doctest::Approx(0.5));

  const auto normal = oracle::student_t_draws(1e6, 0.0, 1.0, 40000, 8);
  CHECK(fit_student_t(normal).df > 20.0);
}

TEST_CASE("correlation and bootstrap interval") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x(5000), y(5000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = z(rng);
    y[i] = -0.6 * x[i] + 0.8 * z(rng);
  }
  double mx = 0, my = 0, sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / 5000.0;
    my += y[i] / 5000.0;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  CHECK(correlation(x, y) == doctest::Approx(sxy / std::sqrt(sxx * syy)).epsilon(1e-12));
  const auto ci = bootstrap_correlation_ci(x, y, 0.99, 500, 2);
  CHECK(ci.lower < -0.6);
  CHECK(ci.upper > -0.6);
  CHECK(ci.lower < correlation(x, y));
  CHECK(ci.upper > correlation(x, y));
}

TEST_CASE("gamma stationarity check") {
  auto two = market::MarketConfig::minimal(2);
  two.initial = market::FixedInitial{{1.0, 1.0}};
  CHECK(verify_gamma_stationarity(two, 100.0, 10000, 4).pass);
  CHECK_FALSE(verify_gamma_stationarity(two, 100.0, 10000, 4, 4.0).pass);
  const auto a = verify_gamma_stationarity(two, 10.0, 2000, 4);
  const auto b = verify_gamma_stationarity(two, 10.0, 2000, 4);
  CHECK(a.statistic == b.statistic);
  CHECK(to_json(a) == to_json(b));
}

TEST_CASE("Student-t returns") {
  for (std::size_t n : {1, 4}) {
    const auto r = verify_student_t_returns(market::MarketConfig::minimal(n), 0.01, 50000, 10 + n);
    CHECK(r.details.at("df") >= 3.5);
    CHECK(r.details.at("df") <= 4.5);
  }
  const auto control = verify_student_t_returns(market::MarketConfig::minimal(1), 0.01, 50000, 3, true);
  CHECK(control.details.at("df") > 20.0);
  CHECK_FALSE(control.pass);
}

TEST_CASE("leverage") {
  const auto c = market::MarketConfig::minimal(2);
  const auto r = verify_leverage(c, 0.1, 300, 5);
  CHECK(r.pass);
  CHECK(r.statistic < -0.2);
  const auto control = verify_leverage(c, 0.1, 300, 5, true);
  CHECK_FALSE(control.pass);
  CHECK(std::abs(control.statistic) < 0.05);
}

TEST_CASE("additivity") {
  CHECK(verify_additivity(4, 2, 1.0, 5000, 6).pass);
  CHECK(verify_additivity(4, 4, 1.0, 5000, 7).pass);
  CHECK_FALSE(verify_additivity(4, 2, 1.0, 5000, 8, 1.0).pass);
}

TEST_CASE("3/2 volatility") {
  const auto r = verify_three_halves_vol(market::MarketConfig::minimal(1), 10.0, 1e-3, 400, 3);
  INFO("drift ", r.details.at("drift_coefficient"), " +- ", r.details.at("drift_std_error"), ", diffusion ",
       r.details.at("diffusion_coefficient"));
  CHECK(r.pass);
  CHECK(std::abs(r.details.at("drift_coefficient") - 1.0) < 4.0 * r.details.at("drift_std_error"));
  CHECK(r.details.at("identity_residual") < 1e-12);
}

TEST_CASE("JSON reports") {
  TestReport r;
  r.statistic = 0.1;
  r.p_value = 0.5;
  r.pass = true;
  r.n_samples = 10;
  r.description = "example";
  r.details["df"] = 4.0;
  const auto j = nlohmann::json::parse(to_json(r));
  CHECK(j.at("pass").get<bool>());
  CHECK(j.at("details").at("df").get<double>() == 4.0);
  const std::vector<TestReport> both{r, r};
  CHECK(nlohmann::json::parse(to_json(both)).size() == 2);
}

}
