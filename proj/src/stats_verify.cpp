#include "mmm/stats_verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "mmm/error.hpp"
#include "mmm/parallel.hpp"
#include "mmm/random.hpp"
#include "mmm/sde_kernel.hpp"
#include "mmm/special.hpp"

namespace mmm::stats {

namespace {

constexpr std::size_t kMinKsSamples = 50;

double ks_p_value(double d, double effective_n) {
  const double root = std::sqrt(effective_n);
  return kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
}

nlohmann::json report_json(const TestReport& r) {
  nlohmann::json j;
  j["description"] = r.description;
  j["statistic"] = r.statistic;
  j["p_value"] = r.p_value;
  j["pass"] = r.pass;
  j["n_samples"] = r.n_samples;
  j["details"] = r.details;
  return j;
}

market::MarketConfig stationary_copy(const market::MarketConfig& config) {
  market::MarketConfig c = config;
  c.initial = market::StationaryInitial{};
  c.measure = market::Measure::RealWorld;
  c.validate();
  return c;
}

// Normalized factor portfolio Y^FP = sum_k Y^k.
double normalized_fp(const market::MarketStepper& s) {
  const auto y = s.normalized();
  return std::accumulate(y.begin(), y.end(), 0.0);
}

}  // namespace

std::string to_json(const TestReport& report) { return report_json(report).dump(2); }

std::string to_json(std::span<const TestReport> reports) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reports) j.push_back(report_json(r));
  return j.dump(2);
}

TestReport ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf,
                         double threshold) {
  if (samples.size() < kMinKsSamples) throw ParameterError("ks_one_sample: need at least 50 samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  TestReport r;
  r.statistic = d;
  r.p_value = ks_p_value(d, n);
  r.pass = r.p_value > threshold;
  r.n_samples = x.size();
  r.description = "one-sample Kolmogorov-Smirnov";
  return r;
}

TestReport ks_two_sample(std::span<const double> a, std::span<const double> b, double threshold) {
  if (a.size() < kMinKsSamples || b.size() < kMinKsSamples)
    throw ParameterError("ks_two_sample: need at least 50 samples in each set");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  TestReport r;
  r.statistic = d;
  r.p_value = ks_p_value(d, n * m / (n + m));
  r.pass = r.p_value > threshold;
  r.n_samples = x.size() + y.size();
  r.description = "two-sample Kolmogorov-Smirnov";
  return r;
}

StudentTFit fit_student_t(std::span<const double> samples, double df_min, double df_max) {
  if (samples.size() < 10) throw ParameterError("fit_student_t: need at least 10 samples");
  if (!(df_min > 0.0) || !(df_max > df_min)) throw ParameterError("fit_student_t: bad df range");
  const double n = static_cast<double>(samples.size());

  double mu0 = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double var0 = 0.0;
  for (double x : samples) var0 += (x - mu0) * (x - mu0) / n;
  if (!(var0 > 0.0)) throw DataError("fit_student_t: samples have zero variance");

  // EM for location and scale at fixed df, warm-started from the last solution
  double mu = mu0, s2 = var0;
  auto profile = [&](double df) {
    for (int it = 0; it < 500; ++it) {
      double sw = 0.0, swx = 0.0;
      for (double x : samples) {
        const double w = (df + 1.0) / (df + (x - mu) * (x - mu) / s2);
        sw += w;
        swx += w * x;
      }
      const double mu_new = swx / sw;
      double ss = 0.0;
      for (double x : samples) ss += (df + 1.0) / (df + (x - mu) * (x - mu) / s2) * (x - mu_new) * (x - mu_new);
      const double s2_new = ss / n;
      const bool done = std::abs(mu_new - mu) < 1e-12 * std::sqrt(s2) && std::abs(s2_new / s2 - 1.0) < 1e-10;
      mu = mu_new;
      s2 = s2_new;
      if (done) break;
    }
    const double c = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * M_PI) -
                     0.5 * std::log(s2);
    double ll = 0.0;
    for (double x : samples) ll += c - 0.5 * (df + 1.0) * std::log1p((x - mu) * (x - mu) / (s2 * df));
    return StudentTFit{mu, std::sqrt(s2), df, ll};
  };

  const double lo = std::log(df_min), hi = std::log(df_max);
  constexpr int scan = 40;
  StudentTFit best = profile(std::exp(lo));
  int best_i = 0;
  for (int i = 1; i <= scan; ++i) {
    const auto f = profile(std::exp(lo + (hi - lo) * i / scan));
    if (f.log_likelihood > best.log_likelihood) {
      best = f;
      best_i = i;
    }
  }
  double a = lo + (hi - lo) * std::max(0, best_i - 1) / scan;
  double b = lo + (hi - lo) * std::min(scan, best_i + 1) / scan;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  mu = best.location;
  s2 = best.scale * best.scale;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  auto f1 = profile(std::exp(x1)), f2 = profile(std::exp(x2));
  while (b - a > 1e-6) {
    if (f1.log_likelihood > f2.log_likelihood) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = profile(std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = profile(std::exp(x2));
    }
  }
  for (const auto& f : {f1, f2})
    if (f.log_likelihood > best.log_likelihood) best = f;
  return best;
}

double student_t_cdf(const StudentTFit& fit, double x) {
  if (!(fit.scale > 0.0) || !(fit.df > 0.0)) throw ParameterError("student_t_cdf: bad parameters");
  return boost::math::cdf(boost::math::students_t_distribution<double>(fit.df), (x - fit.location) / fit.scale);
}

double correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("correlation: need two equal samples of size >= 2");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DataError("correlation: constant sample");
  return sxy / std::sqrt(sxx * syy);
}

Interval bootstrap_correlation_ci(std::span<const double> x, std::span<const double> y, double level,
                                  std::size_t resamples, std::uint64_t seed) {
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("bootstrap_correlation_ci: level must be in (0, 1)");
  if (resamples < 10) throw ParameterError("bootstrap_correlation_ci: too few resamples");
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("bootstrap_correlation_ci: bad samples");
  std::vector<double> stats(resamples);
  parallel_for(resamples, [&](std::size_t r) {
    RandomSource rng(seed, r);
    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    std::vector<double> bx(x.size()), by(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const std::size_t j = pick(rng.engine());
      bx[i] = x[j];
      by[i] = y[j];
    }
    stats[r] = correlation(bx, by);
  });
  std::sort(stats.begin(), stats.end());
  const double alpha = 0.5 * (1.0 - level);
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(resamples - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, resamples - 1);
    return stats[lo] + (pos - static_cast<double>(lo)) * (stats[hi] - stats[lo]);
  };
  return {quantile(alpha), quantile(1.0 - alpha)};
}

TestReport verify_gamma_stationarity(const market::MarketConfig& config, double T, std::size_t n_samples,
                                     std::uint64_t seed, double reference_dimension) {
  config.validate();
  if (!(T > 0.0)) throw ParameterError("verify_gamma_stationarity: T must be positive");
  const double dim = reference_dimension > 0.0 ? reference_dimension : config.dimension(0);
  market::MarketConfig p = config;
  p.measure = market::Measure::RealWorld;
  // exact transitions: the step only sets how often the state is revisited
  const auto steps = static_cast<std::size_t>(std::ceil(T));
  const double dt = T / static_cast<double>(steps);
  std::vector<double> y(n_samples);
  parallel_for(n_samples, [&](std::size_t i) {
    RandomSource rng(seed, i);
    market::MarketStepper s(p, rng);
    for (std::size_t k = 0; k < steps; ++k) s.step(dt);
    y[i] = s.normalized()[0];
  });
  const sde::GammaDensity ref(dim);
  auto r = ks_one_sample(y, [&](double v) { return ref.cdf(v); });
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  r.description = "gamma stationarity of the normalized factor";
  r.details["reference_dimension"] = dim;
  r.details["sample_mean"] = mean;
  r.details["reference_mean"] = ref.mean();
  r.details["T"] = T;
  return r;
}

std::vector<double> factor_portfolio_returns(const market::MarketConfig& config, double horizon_dt,
                                             std::size_t n_returns, std::uint64_t seed, bool frozen_volatility) {
  const auto c = stationary_copy(config);
  if (!(horizon_dt > 0.0)) throw ParameterError("factor_portfolio_returns: horizon must be positive");
  if (n_returns == 0) throw ParameterError("factor_portfolio_returns: n_returns must be positive");
  std::vector<double> r(n_returns);
  if (frozen_volatility) {
    // volatility frozen at its value for Y^FP at its stationary mean of 4
    const double sigma = std::sqrt(4.0 / (4.0 * std::exp(c.tau0)));
    parallel_for(n_returns, [&](std::size_t i) {
      RandomSource rng(seed, i);
      r[i] = -0.5 * sigma * sigma * horizon_dt + sigma * std::sqrt(horizon_dt) * rng.normal();
    });
    return r;
  }
  parallel_for(n_returns, [&](std::size_t i) {
    RandomSource rng(seed, i);
    market::MarketStepper s(c, rng);
    const double before = s.factor_portfolio();
    s.step(horizon_dt);
    r[i] = std::log(s.factor_portfolio() / before);
  });
  return r;
}

TestReport verify_student_t_returns(const market::MarketConfig& config, double horizon_dt, std::size_t n_returns,
                                    std::uint64_t seed, bool frozen_volatility) {
  const auto r = factor_portfolio_returns(config, horizon_dt, n_returns, seed, frozen_volatility);
  const auto fit = fit_student_t(r);
  auto report = ks_one_sample(r, [&](double x) { return student_t_cdf(fit, x); });
  report.description = frozen_volatility ? "Student-t(4) log-returns, frozen-volatility control"
                                         : "Student-t(4) log-returns of the factor portfolio";
  report.pass = report.p_value > kDefaultThreshold && fit.df >= 3.5 && fit.df <= 4.5;
  report.details["df"] = fit.df;
  report.details["location"] = fit.location;
  report.details["scale"] = fit.scale;
  report.details["horizon"] = horizon_dt;
  return report;
}

LeverageSample leverage_sample(const market::MarketConfig& config, double T, double dt, std::size_t n_paths,
                               std::uint64_t seed) {
  const auto c = stationary_copy(config);
  if (!(T > 0.0) || !(dt > 0.0) || dt > T) throw ParameterError("leverage_sample: need 0 < dt <= T");
  if (n_paths == 0) throw ParameterError("leverage_sample: n_paths must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  LeverageSample out;
  out.returns.resize(n_paths * steps);
  out.vol_changes.resize(n_paths * steps);
  parallel_for(n_paths, [&](std::size_t p) {
    RandomSource rng(seed, p);
    market::MarketStepper s(c, rng);
    double fp = s.factor_portfolio(), vol = std::sqrt(4.0 / normalized_fp(s));
    for (std::size_t k = 0; k < steps; ++k) {
      s.step(dt);
      const double fp_next = s.factor_portfolio(), vol_next = std::sqrt(4.0 / normalized_fp(s));
      out.returns[p * steps + k] = std::log(fp_next / fp);
      out.vol_changes[p * steps + k] = vol_next - vol;
      fp = fp_next;
      vol = vol_next;
    }
  });
  return out;
}

TestReport verify_leverage(const market::MarketConfig& config, double T, std::size_t n_paths, std::uint64_t seed,
                           bool shuffle_control) {
  constexpr double dt = 0.01;
  auto sample = leverage_sample(config, T, std::min(dt, T), n_paths, seed);
  if (shuffle_control) {
    RandomSource rng(seed, 0xffffffffULL);
    std::shuffle(sample.returns.begin(), sample.returns.end(), rng.engine());
  }
  TestReport r;
  r.statistic = correlation(sample.returns, sample.vol_changes);
  const auto ci = bootstrap_correlation_ci(sample.returns, sample.vol_changes, 0.99, 1000, seed + 1);
  // Fisher z test of zero correlation
  const double n = static_cast<double>(sample.returns.size());
  const double z = std::atanh(r.statistic) * std::sqrt(n - 3.0);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(), std::abs(z)));
  r.pass = r.statistic < -0.2 && ci.upper < 0.0;
  r.n_samples = sample.returns.size();
  r.description = shuffle_control ? "leverage effect, permutation control" : "leverage effect of the factor portfolio";
  r.details["ci_lower"] = ci.lower;
  r.details["ci_upper"] = ci.upper;
  r.details["dt"] = std::min(dt, T);
  return r;
}

TestReport verify_additivity(std::size_t n, std::size_t subset_size, double T, std::size_t n_paths,
                             std::uint64_t seed, double reference_dimension, bool normalized, double lambda_hat) {
  if (subset_size == 0 || subset_size > n) throw ParameterError("verify_additivity: subset_size must be in [1, n]");
  if (!(T > 0.0)) throw ParameterError("verify_additivity: T must be positive");
  auto config = market::MarketConfig::minimal(n, lambda_hat);
  const double y0 = 4.0 / static_cast<double>(n);
  config.initial = market::FixedInitial{std::vector<double>(n, y0)};
  const double dim = reference_dimension > 0.0 ? reference_dimension
                                               : 4.0 * static_cast<double>(subset_size) / static_cast<double>(n);

  const sde::TimeGrid grid({config.tau0, config.tau0 + T});
  const auto paths = market::simulate_market(config, grid, n_paths, seed);
  std::vector<std::size_t> subset(subset_size);
  std::iota(subset.begin(), subset.end(), 0);
  const auto sums = market::sum_factors(paths, subset);

  // The subset sum equals B e^tau Y^A with Y^A a square-root process of the summed dimension.
  const double scale = paths.basis.back() * std::exp(grid.back());
  const auto direct = sde::simulate_paths(sde::SrouSpec{dim, 1.0},
                                          sde::FixedStart{y0 * static_cast<double>(subset_size)}, grid, n_paths,
                                          seed ^ 0x5a5a5a5a5a5a5a5aULL);
  std::vector<double> a(n_paths), b(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    a[p] = normalized ? sums(p, 1) / scale : sums(p, 1);
    b[p] = normalized ? direct.values(p, 1) : direct.values(p, 1) * scale;
  }
  auto r = ks_two_sample(a, b);
  r.description = "additivity of factors";
  r.details["reference_dimension"] = dim;
  r.details["summed_dimension"] = 4.0 * static_cast<double>(subset_size) / static_cast<double>(n);
  r.details["T"] = T;
  return r;
}

TestReport verify_three_halves_vol(const market::MarketConfig& config, double T, double dt, std::size_t n_paths,
                                   std::uint64_t seed) {
  const auto c = stationary_copy(config);
  if (!(T > 0.0) || !(dt > 0.0) || dt > T) throw ParameterError("verify_three_halves_vol: need 0 < dt <= T");
  if (n_paths == 0) throw ParameterError("verify_three_halves_vol: n_paths must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  const double a = c.activities[0], omega = c.omega[0];

  struct Sums {
    double dd = 0.0, xd = 0.0, z2 = 0.0, identity = 0.0;
  };
  std::vector<Sums> per_path(n_paths);
  parallel_for(n_paths, [&](std::size_t p) {
    RandomSource rng(seed, p);
    market::MarketStepper s(c, rng);
    Sums& acc = per_path[p];
    auto squared_vol = [&] {
      const double y = s.normalized()[0];
      const double beta = market::factor_vol(c, 0, y).value;
      acc.identity = std::max(acc.identity, std::abs(beta * beta - 4.0 * a / y) / (4.0 * a / y));
      return beta * beta;
    };
    double v = squared_vol();
    for (std::size_t k = 0; k < steps; ++k) {
      s.step(dt);
      const double v_next = squared_vol();
      const double dv = v_next - v;
      const double drift = (a + (1.0 - omega) * v) * v * dt;
      const double w = 1.0 / (v * v * v * dt);  // inverse conditional variance of dv
      acc.dd += w * drift * drift;
      acc.xd += w * drift * dv;
      // squared residual over its conditional variance; a plain ratio of sums
      // would be dominated by the infinite-mean tail of v^3
      acc.z2 += w * (dv - drift) * (dv - drift);
      v = v_next;
    }
  });
  Sums total;
  for (const auto& s : per_path) {
    total.dd += s.dd;
    total.xd += s.xd;
    total.z2 += s.z2;
    total.identity = std::max(total.identity, s.identity);
  }
  const double drift_coef = total.xd / total.dd;
  const double drift_se = 1.0 / std::sqrt(total.dd);
  const double diffusion_coef = total.z2 / static_cast<double>(n_paths * steps);
  TestReport r;
  r.statistic = drift_coef;
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(),
                                                            std::abs(drift_coef - 1.0) / drift_se));
  r.pass = drift_coef >= 0.95 && drift_coef <= 1.05 && diffusion_coef >= 0.95 && diffusion_coef <= 1.05;
  r.n_samples = n_paths * steps;
  r.description = "3/2 dynamics of the squared factor volatility";
  r.details["drift_coefficient"] = drift_coef;
  r.details["drift_std_error"] = drift_se;
  r.details["diffusion_coefficient"] = diffusion_coef;
  r.details["identity_residual"] = total.identity;
  return r;
}

}  // namespace mmm::stats
