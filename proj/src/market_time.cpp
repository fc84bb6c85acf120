#include "mmm/market_time.hpp"

#include <cmath>
#include <string>

#include "mmm/error.hpp"

namespace mmm::clock {

TimeSeries::TimeSeries(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.size() != values_.size()) throw DataError("TimeSeries: times and values differ in length");
  if (times_.size() < 2) throw DataError("TimeSeries: need at least two observations");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]) || !std::isfinite(values_[i]))
      throw DataError("TimeSeries: non-finite entry", static_cast<long>(i));
    if (!(values_[i] > 0.0))
      throw DataError("TimeSeries: values must be positive, got " + std::to_string(values_[i]), static_cast<long>(i));
    if (i > 0 && !(times_[i] > times_[i - 1]))
      throw DataError("TimeSeries: times must be strictly increasing", static_cast<long>(i));
  }
}

std::vector<double> realized_qv_sqrt(const TimeSeries& series) {
  const auto v = series.values();
  std::vector<double> qv(v.size(), 0.0);
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double d = std::sqrt(v[i]) - std::sqrt(v[i - 1]);
    qv[i] = qv[i - 1] + d * d;
  }
  return qv;
}

ClockEstimate market_time_from_series(const TimeSeries& series, double tau0) {
  if (!std::isfinite(tau0)) throw ParameterError("market_time_from_series: tau0 must be finite");
  const auto qv = realized_qv_sqrt(series);
  ClockEstimate c;
  c.times.assign(series.times().begin(), series.times().end());
  c.tau.resize(qv.size());
  const double start = std::exp(tau0);
  for (std::size_t i = 0; i < qv.size(); ++i) c.tau[i] = std::log(qv[i] + start);
  c.tau[0] = tau0;
  c.tau0 = tau0;
  // RMS of the linear fit; zero for a flat clock
  const double n = static_cast<double>(qv.size());
  double mt = 0.0, mu = 0.0;
  for (std::size_t i = 0; i < qv.size(); ++i) {
    mt += c.times[i] / n;
    mu += c.tau[i] / n;
  }
  double stt = 0.0, stu = 0.0;
  for (std::size_t i = 0; i < qv.size(); ++i) {
    stt += (c.times[i] - mt) * (c.times[i] - mt);
    stu += (c.times[i] - mt) * (c.tau[i] - mu);
  }
  const double slope = stu / stt;
  double ssr = 0.0;
  for (std::size_t i = 0; i < qv.size(); ++i) {
    const double r = c.tau[i] - mu - slope * (c.times[i] - mt);
    ssr += r * r;
  }
  c.fit_residual = std::sqrt(ssr / n);
  return c;
}

ClockEstimate benchmark_time_from_series(const TimeSeries& series, double tau_star0) {
  return market_time_from_series(series, tau_star0);
}

Tau0Fit linear_clock_fit(const TimeSeries& series, double tau0) {
  const auto c = market_time_from_series(series, tau0);
  const double n = static_cast<double>(c.tau.size());
  double mt = 0.0, mu = 0.0;
  for (std::size_t i = 0; i < c.tau.size(); ++i) {
    mt += c.times[i] / n;
    mu += c.tau[i] / n;
  }
  double stt = 0.0, stu = 0.0, suu = 0.0;
  for (std::size_t i = 0; i < c.tau.size(); ++i) {
    stt += (c.times[i] - mt) * (c.times[i] - mt);
    stu += (c.times[i] - mt) * (c.tau[i] - mu);
    suu += (c.tau[i] - mu) * (c.tau[i] - mu);
  }
  if (!(suu > 0.0)) throw CalibrationError("linear_clock_fit: estimated clock is flat (zero quadratic variation)");
  Tau0Fit f;
  f.tau0 = tau0;
  f.slope = stu / stt;
  f.intercept = mu - f.slope * mt;
  const double ssr = std::max(0.0, suu - f.slope * stu);
  f.fit_residual = c.fit_residual;
  f.objective = ssr / suu;
  return f;
}

Tau0Fit estimate_tau0(const TimeSeries& series, double lower, double upper) {
  if (series.size() < 10) throw DataError("estimate_tau0: need at least 10 observations");
  if (!(upper > lower)) throw ParameterError("estimate_tau0: empty search interval");
  const auto qv = realized_qv_sqrt(series);
  if (!(qv.back() > 0.0)) throw CalibrationError("estimate_tau0: degenerate series with zero quadratic variation");

  auto objective = [&](double t0) { return linear_clock_fit(series, t0).objective; };
  constexpr int scan = 400;
  const double h = (upper - lower) / scan;
  int best = 0;
  double best_value = objective(lower);
  for (int i = 1; i <= scan; ++i) {
    const double v = objective(lower + h * i);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  double a = lower + h * std::max(0, best - 1), b = lower + h * std::min(scan, best + 1);
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  while (b - a > 1e-10) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = objective(x2);
    }
  }
  return linear_clock_fit(series, 0.5 * (a + b));
}

}  // namespace mmm::clock
