#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "mmm/matrix.hpp"
#include "mmm/random.hpp"
#include "mmm/sde_kernel.hpp"

namespace mmm::market {

enum class Measure { RealWorld, BenchmarkNeutral };

struct StationaryInitial {};
struct FixedInitial {
  std::vector<double> normalized;  // Y^k at tau0, one per factor
};
using InitialPolicy = std::variant<StationaryInitial, FixedInitial>;

/// Parameterization of a stationary market of n factors plus the savings account.
struct MarketConfig {
  std::size_t n = 1;
  std::vector<double> omega;       // risk premium parameters, sum to one
  std::vector<double> activities;  // a^k > 0
  double lambda_hat = 0.0;         // net risk-adjusted return (constant)
  double tau0 = 0.0;               // initial market time
  InitialPolicy initial = StationaryInitial{};
  Measure measure = Measure::RealWorld;
  double spike_cap = 1e6;          // cap on benchmark activity at spike nodes

  /// omega = 1/n, unit activities.
  static MarketConfig minimal(std::size_t n, double lambda_hat = 0.0, double tau0 = 0.0);

  void validate() const;
  bool is_minimal() const;
  /// CIR dimension 4 omega^k of the k-th normalized factor.
  double dimension(std::size_t k) const { return 4.0 * omega.at(k); }
};

struct PortfolioWeights {
  double savings = 0.0;
  std::vector<double> risky;

  double total() const;
};

/// A value that may be infinite because a normalized factor sits at zero.
struct SpikeValue {
  double value = 0.0;
  bool spike = false;
};

/// Joint trajectories of the market. Every matrix is paths x nodes except
/// noise_increments, which is paths x steps.
struct MarketPaths {
  sde::TimeGrid market_grid{{0.0, 0.0}};
  Measure measure = Measure::RealWorld;
  std::uint64_t seed = 0;
  std::vector<double> basis;                     // B_tau per node
  std::vector<sde::PathSet> normalized_factors;  // Y^k on the k-th activity-time grid
  std::vector<Matrix<double>> factors;           // S^k
  /// Increments of the martingale part int sqrt(Y^k) dW^k over each step,
  /// recovered from the exact transition through the factor SDE.
  std::vector<Matrix<double>> noise_increments;
  Matrix<double> factor_portfolio;
  Matrix<double> benchmark;
  Matrix<double> normalized_benchmark;
  Matrix<double> benchmark_time;
  Matrix<double> squared_benchmark_vol;  // +inf at spike nodes
  Matrix<std::uint8_t> spike;            // 1 where some normalized factor is zero

  std::size_t paths() const noexcept { return factor_portfolio.rows(); }
  std::size_t nodes() const noexcept { return market_grid.size(); }
  std::size_t n_factors() const noexcept { return factors.size(); }
};

double basis_exponential(double lambda_hat, double tau0, double tau);

double activity_time(const MarketConfig& config, std::size_t k, double tau);

/// Drift of the log of a self-financing portfolio with the given weights.
double growth_rate(const PortfolioWeights& weights, std::span<const double> beta,
                   const MarketConfig& config);

std::vector<double> gop_weights(const MarketConfig& config);

/// Numeraire portfolio of the market extended by the savings account.
PortfolioWeights np_weights(std::span<const double> beta, const MarketConfig& config);

/// theta_k = lambda_hat / beta_k + omega_k beta_k.
std::vector<double> market_price_of_risk(std::span<const double> beta, const MarketConfig& config);

/// beta^k = sqrt(4 a^k / y); spike when y == 0.
SpikeValue factor_vol(const MarketConfig& config, std::size_t k, double y);

/// Z = sum_k (omega^k)^2 4 a^k / y^k, which is (1/n^2) sum 4 a^k / y^k for the minimal model.
SpikeValue squared_benchmark_vol(const MarketConfig& config, std::span<const double> y);

struct BenchmarkClock {
  double activity = 0.0;
  double tau_star = 0.0;
};

/// a* = Z Y* / 4; tau* advanced by a* d_tau.
BenchmarkClock benchmark_activity_and_time(double z, double y_star, double prior_tau_star,
                                           double d_tau);

/// State of one market path, advanced one market-time step at a time.
class MarketStepper {
 public:
  MarketStepper(const MarketConfig& config, RandomSource& rng);

  void step(double d_tau);

  double tau() const noexcept { return tau_; }
  double basis() const noexcept { return basis_; }
  std::span<const double> normalized() const noexcept { return y_; }
  std::span<const double> factors() const noexcept { return s_; }
  std::span<const double> last_noise() const noexcept { return noise_; }
  double factor_portfolio() const;
  double benchmark() const noexcept { return s_star_; }
  double normalized_benchmark() const;
  double tau_star() const noexcept { return tau_star_; }
  double bessel_time() const;
  SpikeValue z() const;
  bool spike() const;
  /// Benchmark activity used for the next step (left-limit at spikes, capped).
  double benchmark_activity() const;

 private:
  double clock_increment(std::size_t k, double d_tau) const;

  const MarketConfig& config_;
  RandomSource& rng_;
  double tau_;
  double basis_ = 1.0;
  std::vector<double> y_;
  std::vector<double> s_;
  std::vector<double> noise_;
  double s_star_ = 0.0;
  double tau_star_;
  double last_activity_ = 1.0;
};

/// Simulates n_paths market paths on a market-time grid starting at config.tau0.
/// Path i draws from substream (seed, path_offset + i).
MarketPaths simulate_market(const MarketConfig& config, const sde::TimeGrid& grid,
                            std::size_t n_paths, std::uint64_t seed, std::size_t path_offset = 0);

/// Pointwise sum of the factors in the subset (zero-based indices).
Matrix<double> sum_factors(const MarketPaths& paths, std::span<const std::size_t> subset);

}  // namespace mmm::market
