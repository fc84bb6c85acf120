#pragma once

#include <span>
#include <vector>

namespace mmm::clock {

/// Calendar times (years, strictly increasing) and strictly positive index values.
class TimeSeries {
 public:
  TimeSeries(std::vector<double> times, std::vector<double> values);

  std::span<const double> times() const noexcept { return times_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return times_.size(); }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
};

struct ClockEstimate {
  std::vector<double> times;
  std::vector<double> tau;
  double tau0 = 0.0;
  double fit_residual = 0.0;
};

struct Tau0Fit {
  double tau0 = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double fit_residual = 0.0;  // RMS residual of the linear fit
  double objective = 0.0;     // residual sum of squares over total sum of squares
};

/// Cumulative sum of squared increments of sqrt(value), starting at 0.
std::vector<double> realized_qv_sqrt(const TimeSeries& series);

/// tau_t = ln([sqrt S]_{t0,t} + exp(tau0)).
ClockEstimate market_time_from_series(const TimeSeries& series, double tau0);

/// Same formula on a benchmark proxy; the result is tau*, with Bessel time exp(tau*).
ClockEstimate benchmark_time_from_series(const TimeSeries& series, double tau_star0);

/// Linear-fit quality of the estimated clock against calendar time for a given tau0.
Tau0Fit linear_clock_fit(const TimeSeries& series, double tau0);

/// Chooses tau0 so that the estimated clock is closest to linear in calendar
/// time: grid scan over [lower, upper] followed by golden-section refinement.
Tau0Fit estimate_tau0(const TimeSeries& series, double lower = -10.0, double upper = 10.0);

}  // namespace mmm::clock
