#include "mmm/market_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mmm/error.hpp"
#include "mmm/parallel.hpp"

namespace mmm::market {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_index(const MarketConfig& config, std::size_t k, const char* op) {
  if (k >= config.n)
    throw ParameterError(std::string(op) + ": factor index " + std::to_string(k) + " out of range for n = " +
                         std::to_string(config.n));
}

}  // namespace

MarketConfig MarketConfig::minimal(std::size_t n, double lambda_hat, double tau0) {
  if (n == 0) throw ParameterError("MarketConfig::minimal: n must be positive");
  MarketConfig c;
  c.n = n;
  c.omega.assign(n, 1.0 / static_cast<double>(n));
  c.activities.assign(n, 1.0);
  c.lambda_hat = lambda_hat;
  c.tau0 = tau0;
  return c;
}

void MarketConfig::validate() const {
  if (n == 0) throw ParameterError("n: number of factors must be positive");
  if (omega.size() != n) throw ParameterError("omega: expected " + std::to_string(n) + " entries");
  if (activities.size() != n) throw ParameterError("activities: expected " + std::to_string(n) + " entries");
  double sum = 0.0;
  for (double w : omega) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ParameterError("omega: entries must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ParameterError("omega: entries must sum to 1");
  for (double a : activities)
    if (!(a > 0.0) || !std::isfinite(a)) throw ParameterError("activities: entries must be positive");
  if (!std::isfinite(lambda_hat)) throw ParameterError("lambda_hat: must be finite");
  if (!std::isfinite(tau0)) throw ParameterError("tau0: must be finite");
  if (!(spike_cap > 0.0)) throw ParameterError("spike_cap: must be positive");
  if (const auto* fixed = std::get_if<FixedInitial>(&initial)) {
    if (fixed->normalized.size() != n) throw ParameterError("init: expected " + std::to_string(n) + " fixed values");
    for (double y : fixed->normalized)
      if (!(y > 0.0) || !std::isfinite(y)) throw ParameterError("init: fixed values must be positive");
  }
}

bool MarketConfig::is_minimal() const {
  const double w = 1.0 / static_cast<double>(n);
  return std::all_of(omega.begin(), omega.end(), [&](double x) { return std::abs(x - w) < 1e-12; }) &&
         std::all_of(activities.begin(), activities.end(), [](double a) { return a == 1.0; });
}

double PortfolioWeights::total() const { return savings + std::accumulate(risky.begin(), risky.end(), 0.0); }

double basis_exponential(double lambda_hat, double tau0, double tau) {
  if (tau < tau0) throw DomainError("basis_exponential: tau precedes tau0");
  return std::exp(lambda_hat * (tau - tau0));
}

double activity_time(const MarketConfig& config, std::size_t k, double tau) {
  require_index(config, k, "activity_time");
  return config.tau0 + (tau - config.tau0) * config.activities[k];
}

double growth_rate(const PortfolioWeights& weights, std::span<const double> beta, const MarketConfig& config) {
  if (weights.risky.size() != config.n || beta.size() != config.n)
    throw ParameterError("growth_rate: dimension mismatch");
  double invested = 0.0, g = 0.0;
  for (std::size_t k = 0; k < config.n; ++k) {
    if (!(beta[k] > 0.0)) throw ParameterError("growth_rate: volatilities must be positive");
    const double pi = weights.risky[k];
    invested += pi;
    g += beta[k] * beta[k] * pi * (config.omega[k] - 0.5 * pi);
  }
  return invested * config.lambda_hat + g;
}

std::vector<double> gop_weights(const MarketConfig& config) {
  config.validate();
  return config.omega;
}

PortfolioWeights np_weights(std::span<const double> beta, const MarketConfig& config) {
  if (beta.size() != config.n) throw ParameterError("np_weights: dimension mismatch");
  PortfolioWeights w;
  w.risky.resize(config.n);
  double inv_var_sum = 0.0;
  for (std::size_t k = 0; k < config.n; ++k) {
    if (beta[k] == 0.0) throw SingularityError("np_weights: zero volatility for factor " + std::to_string(k));
    if (!(beta[k] > 0.0)) throw ParameterError("np_weights: volatilities must be positive");
    const double inv_var = 1.0 / (beta[k] * beta[k]);
    inv_var_sum += inv_var;
    w.risky[k] = config.lambda_hat * inv_var + config.omega[k];
  }
  w.savings = -config.lambda_hat * inv_var_sum;
  return w;
}

std::vector<double> market_price_of_risk(std::span<const double> beta, const MarketConfig& config) {
  if (beta.size() != config.n) throw ParameterError("market_price_of_risk: dimension mismatch");
  std::vector<double> theta(config.n);
  for (std::size_t k = 0; k < config.n; ++k) {
    if (beta[k] == 0.0) throw SingularityError("market_price_of_risk: zero volatility");
    theta[k] = config.lambda_hat / beta[k] + config.omega[k] * beta[k];
  }
  return theta;
}

SpikeValue factor_vol(const MarketConfig& config, std::size_t k, double y) {
  require_index(config, k, "factor_vol");
  if (y < 0.0) throw ParameterError("factor_vol: negative normalized factor");
  if (y == 0.0) return {kInf, true};
  return {std::sqrt(4.0 * config.activities[k] / y), false};
}

SpikeValue squared_benchmark_vol(const MarketConfig& config, std::span<const double> y) {
  if (y.size() != config.n) throw ParameterError("squared_benchmark_vol: dimension mismatch");
  double z = 0.0;
  for (std::size_t k = 0; k < config.n; ++k) {
    if (y[k] < 0.0) throw ParameterError("squared_benchmark_vol: negative normalized factor");
    if (y[k] == 0.0) return {kInf, true};
    z += config.omega[k] * config.omega[k] * 4.0 * config.activities[k] / y[k];
  }
  return {z, false};
}

BenchmarkClock benchmark_activity_and_time(double z, double y_star, double prior_tau_star, double d_tau) {
  if (z < 0.0 || y_star < 0.0 || d_tau < 0.0) throw ParameterError("benchmark_activity_and_time: negative input");
  const double a = z * y_star / 4.0;
  return {a, prior_tau_star + a * d_tau};
}

MarketStepper::MarketStepper(const MarketConfig& config, RandomSource& rng)
    : config_(config), rng_(rng), tau_(config.tau0), tau_star_(config.tau0) {
  const std::size_t n = config.n;
  y_.resize(n);
  s_.resize(n);
  noise_.assign(n, 0.0);
  if (const auto* fixed = std::get_if<FixedInitial>(&config.initial)) {
    y_ = fixed->normalized;
  } else {
    for (std::size_t k = 0; k < n; ++k) y_[k] = sde::GammaDensity(config.dimension(k)).sample(rng_);
  }
  const double level = std::exp(config.tau0);
  for (std::size_t k = 0; k < n; ++k) s_[k] = y_[k] * level;
  s_star_ = std::accumulate(s_.begin(), s_.end(), 0.0);
  const auto z0 = z();
  last_activity_ = z0.spike ? config.spike_cap : std::min(z0.value * normalized_benchmark() / 4.0, config.spike_cap);
}

double MarketStepper::clock_increment(std::size_t k, double d_tau) const {
  const double a = config_.activities[k];
  const double rate = config_.lambda_hat + a;
  const double level = a * std::exp(config_.tau0 + rate * (tau_ - config_.tau0));
  if (std::abs(rate) < 1e-14) return level * d_tau;
  return level * std::expm1(rate * d_tau) / rate;
}

void MarketStepper::step(double d_tau) {
  if (!(d_tau >= 0.0)) throw ParameterError("MarketStepper::step: negative step");
  const double activity = benchmark_activity();
  const double tau_next = tau_ + d_tau;
  const double basis_next = std::exp(config_.lambda_hat * (tau_next - config_.tau0));
  const bool neutral = config_.measure == Measure::BenchmarkNeutral;
  double relative = 0.0;
  for (std::size_t k = 0; k < config_.n; ++k) {
    const double a = config_.activities[k];
    const double delta = config_.dimension(k);
    const double level_next = basis_next * std::exp(config_.tau0 + (tau_next - config_.tau0) * a);
    double y_next = 0.0, s_next = 0.0;
    if (neutral) {
      s_next = sde::besq_exact_step(delta, s_[k], clock_increment(k, d_tau), rng_);
      y_next = s_next / level_next;
    } else {
      y_next = sde::cir_exact_step(sde::SrouSpec{delta, a}, y_[k], d_tau, rng_);
      s_next = y_next * level_next;
    }
    const double y_mid = 0.5 * (y_[k] + y_next);
    double drift = a * (delta - y_mid);
    if (neutral) drift -= config_.lambda_hat * y_mid;
    noise_[k] = (y_next - y_[k] - drift * d_tau) / (2.0 * std::sqrt(a));
    relative += config_.omega[k] * (s_[k] > 0.0 ? s_next / s_[k] : 1.0);
    y_[k] = y_next;
    s_[k] = s_next;
  }
  s_star_ *= relative;
  tau_star_ += activity * d_tau;
  tau_ = tau_next;
  basis_ = basis_next;
  if (const auto zn = z(); !zn.spike)
    last_activity_ = std::min(zn.value * normalized_benchmark() / 4.0, config_.spike_cap);
}

double MarketStepper::factor_portfolio() const { return std::accumulate(s_.begin(), s_.end(), 0.0); }

double MarketStepper::normalized_benchmark() const { return s_star_ * std::exp(-tau_star_); }

double MarketStepper::bessel_time() const { return std::exp(tau_star_); }

SpikeValue MarketStepper::z() const { return squared_benchmark_vol(config_, y_); }

bool MarketStepper::spike() const {
  return std::any_of(y_.begin(), y_.end(), [](double y) { return y == 0.0; });
}

double MarketStepper::benchmark_activity() const { return last_activity_; }

MarketPaths simulate_market(const MarketConfig& config, const sde::TimeGrid& grid, std::size_t n_paths,
                            std::uint64_t seed, std::size_t path_offset) {
  config.validate();
  if (n_paths == 0) throw ParameterError("simulate_market: n_paths must be positive");
  if (std::abs(grid.front() - config.tau0) > 1e-12 * std::max(1.0, std::abs(config.tau0)))
    throw ParameterError("simulate_market: grid must start at tau0");

  const std::size_t n = config.n, nodes = grid.size();
  MarketPaths out;
  out.market_grid = grid;
  out.measure = config.measure;
  out.seed = seed;
  out.basis.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) out.basis[i] = basis_exponential(config.lambda_hat, config.tau0, grid[i]);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> activity_grid(nodes);
    for (std::size_t i = 0; i < nodes; ++i) activity_grid[i] = activity_time(config, k, grid[i]);
    out.normalized_factors.push_back(
        sde::PathSet{sde::TimeGrid(std::move(activity_grid)), Matrix<double>(n_paths, nodes), seed});
    out.factors.emplace_back(n_paths, nodes);
    out.noise_increments.emplace_back(n_paths, nodes - 1);
  }
  out.factor_portfolio = Matrix<double>(n_paths, nodes);
  out.benchmark = Matrix<double>(n_paths, nodes);
  out.normalized_benchmark = Matrix<double>(n_paths, nodes);
  out.benchmark_time = Matrix<double>(n_paths, nodes);
  out.squared_benchmark_vol = Matrix<double>(n_paths, nodes);
  out.spike = Matrix<std::uint8_t>(n_paths, nodes);

  parallel_for(n_paths, [&](std::size_t p) {
    RandomSource rng(seed, path_offset + p);
    MarketStepper state(config, rng);
    for (std::size_t i = 0; i < nodes; ++i) {
      if (i > 0) {
        state.step(grid[i] - grid[i - 1]);
        for (std::size_t k = 0; k < n; ++k) out.noise_increments[k](p, i - 1) = state.last_noise()[k];
      }
      for (std::size_t k = 0; k < n; ++k) {
        out.normalized_factors[k].values(p, i) = state.normalized()[k];
        out.factors[k](p, i) = state.factors()[k];
      }
      out.factor_portfolio(p, i) = state.factor_portfolio();
      out.benchmark(p, i) = state.benchmark();
      out.normalized_benchmark(p, i) = state.normalized_benchmark();
      out.benchmark_time(p, i) = state.tau_star();
      out.squared_benchmark_vol(p, i) = state.z().value;
      out.spike(p, i) = state.spike() ? 1 : 0;
    }
  });
  return out;
}

Matrix<double> sum_factors(const MarketPaths& paths, std::span<const std::size_t> subset) {
  if (subset.empty()) throw ParameterError("sum_factors: empty subset");
  for (std::size_t k : subset)
    if (k >= paths.n_factors()) throw ParameterError("sum_factors: factor index out of range");
  Matrix<double> out(paths.paths(), paths.nodes());
  for (std::size_t p = 0; p < paths.paths(); ++p)
    for (std::size_t i = 0; i < paths.nodes(); ++i) {
      double s = 0.0;
      for (std::size_t k : subset) s += paths.factors[k](p, i);
      out(p, i) = s;
    }
  return out;
}

}  // namespace mmm::market
