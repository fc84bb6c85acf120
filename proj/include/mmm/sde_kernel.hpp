#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "mmm/matrix.hpp"
#include "mmm/random.hpp"

namespace mmm::sde {

/// Square-root diffusion dY = (dimension - Y) speed dt + sqrt(4 speed Y) dW.
/// speed == 0 selects the squared Bessel process dX = dimension dt + 2 sqrt(X) dW.
struct SrouSpec {
  double dimension = 4.0;
  double speed = 1.0;

  void validate() const;
  bool is_squared_bessel() const noexcept { return speed == 0.0; }
};

/// Nondecreasing node times (process-internal units), at least two nodes.
/// Zero-length steps are allowed and leave the state unchanged.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times);

  /// Nodes start, start + step, ..., up to and including the first node >= end.
  static TimeGrid uniform(double start, double end, double step);
  static TimeGrid with_steps(double start, double step, std::size_t steps);

  std::span<const double> times() const noexcept { return times_; }
  std::size_t size() const noexcept { return times_.size(); }
  double operator[](std::size_t i) const { return times_[i]; }
  double front() const { return times_.front(); }
  double back() const { return times_.back(); }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  std::vector<double> times_;
};

struct FixedStart {
  double value = 0.0;
};
/// Draw the initial state from the stationary gamma law of the process.
struct StationaryStart {};
using InitialLaw = std::variant<FixedStart, StationaryStart>;

/// Simulated trajectories: one row per path, one column per grid node.
struct PathSet {
  TimeGrid grid;
  Matrix<double> values;
  std::uint64_t seed = 0;

  std::size_t paths() const noexcept { return values.rows(); }
};

struct TransitionMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Gamma law with shape dimension/2 and scale 2: the stationary law of the
/// square-root diffusion with the given dimension.
class GammaDensity {
 public:
  explicit GammaDensity(double dimension);

  double operator()(double y) const { return pdf(y); }
  double pdf(double y) const;
  double log_pdf(double y) const;
  double cdf(double y) const;
  double sample(RandomSource& rng) const;

  double dimension() const noexcept { return dimension_; }
  double shape() const noexcept { return 0.5 * dimension_; }
  double scale() const noexcept { return 2.0; }
  double mean() const noexcept { return dimension_; }
  double variance() const noexcept { return 2.0 * dimension_; }

 private:
  double dimension_;
  double log_norm_;
};

/// One draw from the noncentral chi-square law.
double sample_noncentral_chisq(double df, double noncentrality, RandomSource& rng);

/// Exact transition of the square-root diffusion over dt (speed > 0).
double cir_exact_step(const SrouSpec& spec, double y, double dt, RandomSource& rng);

/// Exact transition of BESQ(dimension) over internal time dl.
double besq_exact_step(double dimension, double x, double dl, RandomSource& rng);

/// Full-truncation Euler step. Kept as an independent cross-check of the exact scheme.
double euler_full_truncation_step(const SrouSpec& spec, double y, double dt, double noise);

/// n_paths independent exact trajectories. Path i uses substream (seed, i),
/// so the result is identical for any worker count.
PathSet simulate_paths(const SrouSpec& spec, const InitialLaw& initial, const TimeGrid& grid,
                       std::size_t n_paths, std::uint64_t seed);

GammaDensity gamma_stationary_density(double dimension);

TransitionMoments cir_transition_moments(const SrouSpec& spec, double y, double dt);

}  // namespace mmm::sde
