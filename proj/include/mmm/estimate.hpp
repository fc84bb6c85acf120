#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace mmm {

/// Monte Carlo mean with its standard error.
struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

inline McEstimate mean_estimate(std::span<const double> xs) {
  McEstimate e;
  e.samples = xs.size();
  if (xs.empty()) return e;
  // Welford
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double x : xs) {
    ++k;
    const double d = x - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (x - mean);
  }
  e.value = mean;
  if (k > 1) e.std_error = std::sqrt(m2 / static_cast<double>(k - 1) / static_cast<double>(k));
  return e;
}

}  // namespace mmm
