#pragma once

#include <cstdint>
#include <random>

namespace mmm {

/// Seeded random source. Each (seed, stream) pair names an independent
/// substream, so path i of a simulation can be regenerated without
/// replaying paths 0..i-1 and results do not depend on thread scheduling.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, std::uint64_t stream = 0);

  double uniform();
  double normal();
  /// Gamma variate with the given shape and scale (shape > 0).
  double gamma(double shape, double scale);
  std::uint64_t poisson(double mean);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace mmm
