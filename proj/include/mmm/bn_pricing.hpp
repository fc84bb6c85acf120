#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "mmm/estimate.hpp"
#include "mmm/market_model.hpp"

namespace mmm::bn {

/// Zero-coupon bond quote in units of the savings account.
struct ZcbQuote {
  double price = 1.0;
  double delta = 0.0;  // units of benchmark per unit claim
};

struct HedgeReport {
  std::vector<double> terminal_errors;  // portfolio value at maturity minus payoff
  double mean_abs_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t rebalance_count = 0;      // rebalances per path, averaged and rounded up
};

/// l = exp(tau*): the internal clock in which the benchmark is BESQ(4) under Q.
double bessel_time(double tau_star);

/// 1 - exp(-s*/(2 dl)) and its derivative in s*, dl = l_maturity - l_now.
ZcbQuote zcb_price(double s_star, double l_now, double l_maturity);

/// Claim payoff in savings-account units, read from one path at its stopping node.
using Claim = std::function<double(const market::MarketPaths&, std::size_t path, std::size_t node)>;

struct AtFinalNode {};
/// First node whose Bessel time reaches the level.
struct AtBesselTime {
  double level = 0.0;
};
using StoppingRule = std::variant<AtFinalNode, AtBesselTime>;

std::size_t stopping_node(const market::MarketPaths& paths, std::size_t path, const StoppingRule& rule);

struct BnPrice {
  McEstimate estimate;
  /// False when n <= 2: the measure-equivalence statement assumes n > 2.
  bool within_equivalence_hypotheses = true;
};

/// S*_0 E^Q[H / S*_stop] by simulation under the benchmark-neutral measure.
BnPrice bn_price_mc(const Claim& claim, const market::MarketConfig& config,
                    const sde::TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                    const StoppingRule& stop = AtFinalNode{});

/// S*_0 E^P[Lambda_stop H / S*_stop], equivalently real-world pricing with the
/// numeraire portfolio. Simulates under the real-world measure.
McEstimate real_world_price_mc(const Claim& claim, const market::MarketConfig& config,
                               const sde::TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                               const StoppingRule& stop = AtFinalNode{});

struct PathHedge {
  double terminal_error = 0.0;
  std::size_t rebalances = 0;
  bool matured = false;
};

/// Self-financing delta hedge of the bond along a given benchmark path and
/// Bessel clock. spike[i] != 0 makes the rebalance at node i use the
/// left-limit benchmark value.
PathHedge hedge_along_path(std::span<const double> benchmark, std::span<const double> bessel,
                           double l_maturity, std::span<const std::uint8_t> spike = {});

/// Source of the Bessel time used by the hedger.
enum class HedgeClock {
  Realized,  // exp(tau*_0) plus the realized quadratic variation of sqrt(S*), observable from the benchmark alone
  Model      // exp(tau*) from the simulator's benchmark-time quadrature
};

/// Delta hedge of the bond maturing at Bessel time l_maturity, rebalanced every
/// rebalance_dt of market time, on n_paths paths simulated under Q.
HedgeReport hedge_zcb(const market::MarketConfig& config, double l_maturity, double rebalance_dt,
                      std::size_t n_paths, std::uint64_t seed, HedgeClock clock = HedgeClock::Realized);

HedgeReport summarize_hedge(std::vector<double> errors, std::size_t rebalances);

}  // namespace mmm::bn
