#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mmm/market_model.hpp"

namespace mmm::stats {

inline constexpr double kDefaultThreshold = 0.01;

/// Outcome of one statistical check. pass is p_value > threshold unless the
/// check documents an extra condition (recorded in details).
struct TestReport {
  double statistic = 0.0;
  double p_value = 1.0;
  bool pass = false;
  std::size_t n_samples = 0;
  std::string description;
  std::map<std::string, double> details;
};

std::string to_json(const TestReport& report);
std::string to_json(std::span<const TestReport> reports);

TestReport ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf,
                         double threshold = kDefaultThreshold);
TestReport ks_two_sample(std::span<const double> a, std::span<const double> b,
                         double threshold = kDefaultThreshold);

struct StudentTFit {
  double location = 0.0;
  double scale = 1.0;
  double df = 4.0;
  double log_likelihood = 0.0;
};

/// Maximum-likelihood location-scale Student-t: profile over df with EM for (location, scale).
StudentTFit fit_student_t(std::span<const double> samples, double df_min = 0.5,
                          double df_max = 1000.0);

double student_t_cdf(const StudentTFit& fit, double x);

/// Pearson correlation.
double correlation(std::span<const double> x, std::span<const double> y);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Percentile bootstrap interval for the correlation of paired samples.
Interval bootstrap_correlation_ci(std::span<const double> x, std::span<const double> y,
                                  double level, std::size_t resamples, std::uint64_t seed);

/// KS test of the first normalized factor at market time tau0 + T against the
/// gamma law of the given reference dimension (default: the factor's own).
TestReport verify_gamma_stationarity(const market::MarketConfig& config, double T,
                                     std::size_t n_samples, std::uint64_t seed,
                                     double reference_dimension = 0.0);

/// Stationary one-step log-returns of the factor portfolio over horizon_dt.
std::vector<double> factor_portfolio_returns(const market::MarketConfig& config, double horizon_dt,
                                             std::size_t n_returns, std::uint64_t seed,
                                             bool frozen_volatility = false);

/// ML Student-t fit of factor-portfolio log-returns; passes when the fitted df
/// lies in [3.5, 4.5] and the KS p-value against the fitted law exceeds the threshold.
TestReport verify_student_t_returns(const market::MarketConfig& config, double horizon_dt,
                                    std::size_t n_returns, std::uint64_t seed,
                                    bool frozen_volatility = false);

struct LeverageSample {
  std::vector<double> returns;
  std::vector<double> vol_changes;  // changes of sqrt(4 / Y^FP)
};

LeverageSample leverage_sample(const market::MarketConfig& config, double T, double dt,
                               std::size_t n_paths, std::uint64_t seed);

/// Correlation of factor-portfolio log-returns with changes in its volatility.
/// Passes when the correlation is below -0.2 and the bootstrap 99% interval excludes 0.
TestReport verify_leverage(const market::MarketConfig& config, double T, std::size_t n_paths,
                           std::uint64_t seed, bool shuffle_control = false);

/// Two-sample KS between the sum of subset_size factors of an n-factor minimal
/// market at tau0 + T and a directly simulated square-root process of
/// dimension reference_dimension (default 4 subset_size / n) from the same start.
TestReport verify_additivity(std::size_t n, std::size_t subset_size, double T, std::size_t n_paths,
                             std::uint64_t seed, double reference_dimension = 0.0,
                             bool normalized = false, double lambda_hat = 0.0);

/// Checks (beta^k)^2 = 4 a^k / Y^k pathwise and regresses increments of the
/// squared volatility on the drift and squared diffusion of the 3/2 SDE.
TestReport verify_three_halves_vol(const market::MarketConfig& config, double T, double dt,
                                   std::size_t n_paths, std::uint64_t seed);

}  // namespace mmm::stats
