#include "mmm/bn_pricing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmm/error.hpp"
#include "mmm/info_theory.hpp"
#include "mmm/parallel.hpp"
#include "mmm/random.hpp"

namespace mmm::bn {

namespace {

constexpr std::size_t kChunk = 4096;

// Runs value(paths, p) over n_paths simulated in chunks to bound memory.
template <typename F>
std::vector<double> chunked_values(const market::MarketConfig& config, const sde::TimeGrid& grid,
                                   std::size_t n_paths, std::uint64_t seed, F&& value) {
  std::vector<double> out;
  out.reserve(n_paths);
  for (std::size_t offset = 0; offset < n_paths; offset += kChunk) {
    const std::size_t count = std::min(kChunk, n_paths - offset);
    const auto paths = market::simulate_market(config, grid, count, seed, offset);
    value(paths, out);
  }
  return out;
}

}  // namespace

double bessel_time(double tau_star) { return std::exp(tau_star); }

ZcbQuote zcb_price(double s_star, double l_now, double l_maturity) {
  if (!(s_star > 0.0)) throw ParameterError("zcb_price: benchmark value must be positive");
  if (!(l_now > 0.0) || !(l_maturity > 0.0)) throw ParameterError("zcb_price: Bessel times must be positive");
  const double dl = l_maturity - l_now;
  if (dl < 0.0) throw DomainError("zcb_price: maturity precedes the current Bessel time");
  if (dl == 0.0) return {1.0, 0.0};
  const double e = std::exp(-s_star / (2.0 * dl));
  return {-std::expm1(-s_star / (2.0 * dl)), e / (2.0 * dl)};
}

std::size_t stopping_node(const market::MarketPaths& paths, std::size_t path, const StoppingRule& rule) {
  if (path >= paths.paths()) throw ParameterError("stopping_node: path index out of range");
  if (std::holds_alternative<AtFinalNode>(rule)) return paths.nodes() - 1;
  const double level = std::get<AtBesselTime>(rule).level;
  for (std::size_t i = 0; i < paths.nodes(); ++i)
    if (bessel_time(paths.benchmark_time(path, i)) >= level) return i;
  throw DomainError("stopping_node: Bessel time " + std::to_string(level) + " not reached on the grid");
}

BnPrice bn_price_mc(const Claim& claim, const market::MarketConfig& config, const sde::TimeGrid& grid,
                    std::size_t n_paths, std::uint64_t seed, const StoppingRule& stop) {
  if (n_paths == 0) throw ParameterError("bn_price_mc: n_paths must be positive");
  market::MarketConfig q = config;
  q.measure = market::Measure::BenchmarkNeutral;
  const auto values = chunked_values(q, grid, n_paths, seed, [&](const market::MarketPaths& paths, auto& out) {
    for (std::size_t p = 0; p < paths.paths(); ++p) {
      const std::size_t i = stopping_node(paths, p, stop);
      const double v = paths.benchmark(p, 0) * claim(paths, p, i) / paths.benchmark(p, i);
      if (!std::isfinite(v)) throw DataError("bn_price_mc: claim produced a non-finite value");
      out.push_back(v);
    }
  });
  return {mean_estimate(values), config.n > 2};
}

McEstimate real_world_price_mc(const Claim& claim, const market::MarketConfig& config, const sde::TimeGrid& grid,
                               std::size_t n_paths, std::uint64_t seed, const StoppingRule& stop) {
  if (n_paths == 0) throw ParameterError("real_world_price_mc: n_paths must be positive");
  market::MarketConfig p_config = config;
  p_config.measure = market::Measure::RealWorld;
  const auto values = chunked_values(p_config, grid, n_paths, seed, [&](const market::MarketPaths& paths, auto& out) {
    const auto lambda = info::radon_nikodym_path(paths, p_config);
    for (std::size_t p = 0; p < paths.paths(); ++p) {
      const std::size_t i = stopping_node(paths, p, stop);
      const double v = lambda(p, i) * paths.benchmark(p, 0) * claim(paths, p, i) / paths.benchmark(p, i);
      if (!std::isfinite(v)) throw DataError("real_world_price_mc: claim produced a non-finite value");
      out.push_back(v);
    }
  });
  return mean_estimate(values);
}

PathHedge hedge_along_path(std::span<const double> benchmark, std::span<const double> bessel, double l_maturity,
                           std::span<const std::uint8_t> spike) {
  if (benchmark.size() != bessel.size() || benchmark.empty())
    throw ParameterError("hedge_along_path: benchmark and clock must have equal nonzero length");
  if (!spike.empty() && spike.size() != benchmark.size()) throw ParameterError("hedge_along_path: spike size mismatch");
  if (l_maturity < bessel[0]) throw DomainError("hedge_along_path: maturity before start");

  PathHedge h;
  double value = zcb_price(benchmark[0], bessel[0], l_maturity).price;
  for (std::size_t i = 0; i + 1 < benchmark.size(); ++i) {
    if (bessel[i] >= l_maturity) {
      h.matured = true;
      h.terminal_error = value - 1.0;
      return h;
    }
    const double s = (i > 0 && !spike.empty() && spike[i]) ? benchmark[i - 1] : benchmark[i];
    const double units = zcb_price(s, bessel[i], l_maturity).delta;
    value += units * (benchmark[i + 1] - benchmark[i]);
    ++h.rebalances;
  }
  const std::size_t last = benchmark.size() - 1;
  if (bessel[last] >= l_maturity) {
    h.matured = true;
    h.terminal_error = value - 1.0;
  } else {
    h.terminal_error = value - zcb_price(benchmark[last], bessel[last], l_maturity).price;
  }
  return h;
}

HedgeReport summarize_hedge(std::vector<double> errors, std::size_t rebalances) {
  if (errors.empty()) throw ParameterError("summarize_hedge: no paths");
  HedgeReport r;
  for (double e : errors) {
    r.mean_abs_error += std::abs(e);
    r.max_abs_error = std::max(r.max_abs_error, std::abs(e));
  }
  r.mean_abs_error /= static_cast<double>(errors.size());
  r.terminal_errors = std::move(errors);
  r.rebalance_count = std::max<std::size_t>(rebalances, 1);
  return r;
}

HedgeReport hedge_zcb(const market::MarketConfig& config, double l_maturity, double rebalance_dt,
                      std::size_t n_paths, std::uint64_t seed, HedgeClock clock) {
  config.validate();
  if (!(rebalance_dt > 0.0)) throw ParameterError("hedge_zcb: rebalance_dt must be positive");
  if (n_paths == 0) throw ParameterError("hedge_zcb: n_paths must be positive");
  if (!(l_maturity > 0.0) || l_maturity < bessel_time(config.tau0))
    throw DomainError("hedge_zcb: maturity precedes the initial Bessel time");
  market::MarketConfig q = config;
  q.measure = market::Measure::BenchmarkNeutral;

  constexpr std::size_t max_steps = 100'000'000;
  std::vector<double> errors(n_paths);
  std::vector<std::size_t> counts(n_paths);
  parallel_for(n_paths, [&](std::size_t p) {
    RandomSource rng(seed, p);
    market::MarketStepper state(q, rng);
    double realized = state.bessel_time();
    auto ell = [&] { return clock == HedgeClock::Realized ? realized : state.bessel_time(); };
    double value = zcb_price(state.benchmark(), ell(), l_maturity).price;
    double left_limit = state.benchmark();
    std::size_t steps = 0;
    while (ell() < l_maturity) {
      if (++steps > max_steps) throw NumericError("hedge_zcb: maturity not reached");
      const double s = state.spike() ? left_limit : state.benchmark();
      const double units = zcb_price(s, ell(), l_maturity).delta;
      const double before = state.benchmark();
      state.step(rebalance_dt);
      left_limit = before;
      value += units * (state.benchmark() - before);
      const double d = std::sqrt(state.benchmark()) - std::sqrt(before);
      realized += d * d;
    }
    errors[p] = value - 1.0;
    counts[p] = steps;
  });
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  return summarize_hedge(std::move(errors), (total + n_paths - 1) / n_paths);
}

}  // namespace mmm::bn
