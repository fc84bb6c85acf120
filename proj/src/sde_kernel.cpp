#include "mmm/sde_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmm/error.hpp"
#include "mmm/parallel.hpp"
#include "mmm/special.hpp"

namespace mmm::sde {

void SrouSpec::validate() const {
  if (!(dimension > 0.0) || !std::isfinite(dimension))
    throw ParameterError("SrouSpec: dimension must be positive, got " + std::to_string(dimension));
  if (!(speed >= 0.0) || !std::isfinite(speed))
    throw ParameterError("SrouSpec: speed must be nonnegative, got " + std::to_string(speed));
}

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw ParameterError("TimeGrid: need at least two nodes");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i])) throw ParameterError("TimeGrid: non-finite node");
    if (i > 0 && times_[i] < times_[i - 1]) throw ParameterError("TimeGrid: nodes must be nondecreasing");
  }
}

TimeGrid TimeGrid::uniform(double start, double end, double step) {
  if (!(step > 0.0)) throw ParameterError("TimeGrid::uniform: step must be positive");
  if (!(end > start)) throw ParameterError("TimeGrid::uniform: end must exceed start");
  const auto steps = static_cast<std::size_t>(std::ceil((end - start) / step - 1e-9));
  return with_steps(start, step, std::max<std::size_t>(steps, 1));
}

TimeGrid TimeGrid::with_steps(double start, double step, std::size_t steps) {
  if (steps == 0) throw ParameterError("TimeGrid::with_steps: need at least one step");
  std::vector<double> t(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) t[i] = start + step * static_cast<double>(i);
  return TimeGrid(std::move(t));
}

GammaDensity::GammaDensity(double dimension) : dimension_(dimension) {
  if (!(dimension > 0.0)) throw ParameterError("GammaDensity: dimension must be positive");
  log_norm_ = shape() * std::log(2.0) + std::lgamma(shape());
}

double GammaDensity::log_pdf(double y) const {
  if (y <= 0.0) return -INFINITY;
  return (shape() - 1.0) * std::log(y) - 0.5 * y - log_norm_;
}

double GammaDensity::pdf(double y) const { return y <= 0.0 ? 0.0 : std::exp(log_pdf(y)); }

double GammaDensity::cdf(double y) const { return regularized_gamma_p(shape(), 0.5 * y); }

double GammaDensity::sample(RandomSource& rng) const { return rng.gamma(shape(), 2.0); }

GammaDensity gamma_stationary_density(double dimension) { return GammaDensity(dimension); }

double sample_noncentral_chisq(double df, double noncentrality, RandomSource& rng) {
  if (!(df > 0.0)) throw ParameterError("sample_noncentral_chisq: df must be positive");
  if (!(noncentrality >= 0.0)) throw ParameterError("sample_noncentral_chisq: negative noncentrality");
  if (noncentrality == 0.0) return rng.gamma(0.5 * df, 2.0);
  if (df > 1.0) {
    // (Z + sqrt(nc))^2 + chi2(df - 1)
    const double z = rng.normal() + std::sqrt(noncentrality);
    return z * z + rng.gamma(0.5 * (df - 1.0), 2.0);
  }
  // Poisson mixture of central chi-squares
  const auto k = rng.poisson(0.5 * noncentrality);
  return rng.gamma(0.5 * df + static_cast<double>(k), 2.0);
}

double cir_exact_step(const SrouSpec& spec, double y, double dt, RandomSource& rng) {
  spec.validate();
  if (spec.is_squared_bessel()) throw ParameterError("cir_exact_step: speed must be positive");
  if (!(y >= 0.0)) throw ParameterError("cir_exact_step: negative state");
  if (!(dt >= 0.0)) throw ParameterError("cir_exact_step: negative step");
  if (dt == 0.0) return y;
  const double decay = std::exp(-spec.speed * dt);
  const double c = -std::expm1(-spec.speed * dt);
  return c * sample_noncentral_chisq(spec.dimension, y * decay / c, rng);
}

double besq_exact_step(double dimension, double x, double dl, RandomSource& rng) {
  if (!(dimension > 0.0)) throw ParameterError("besq_exact_step: dimension must be positive");
  if (!(x >= 0.0)) throw ParameterError("besq_exact_step: negative state");
  if (!(dl >= 0.0)) throw ParameterError("besq_exact_step: negative step");
  if (dl == 0.0) return x;
  return dl * sample_noncentral_chisq(dimension, x / dl, rng);
}

double euler_full_truncation_step(const SrouSpec& spec, double y, double dt, double noise) {
  spec.validate();
  if (!(dt > 0.0)) throw ParameterError("euler_full_truncation_step: dt must be positive");
  const double yp = std::max(0.0, y);
  const double drift = spec.is_squared_bessel() ? spec.dimension : (spec.dimension - yp) * spec.speed;
  const double diffusion = spec.is_squared_bessel() ? 4.0 * yp : 4.0 * spec.speed * yp;
  return std::max(0.0, yp + drift * dt + std::sqrt(diffusion * dt) * noise);
}

PathSet simulate_paths(const SrouSpec& spec, const InitialLaw& initial, const TimeGrid& grid,
                       std::size_t n_paths, std::uint64_t seed) {
  spec.validate();
  if (n_paths == 0) throw ParameterError("simulate_paths: n_paths must be positive");
  if (const auto* fixed = std::get_if<FixedStart>(&initial); fixed && !(fixed->value >= 0.0))
    throw ParameterError("simulate_paths: negative initial value");
  if (spec.is_squared_bessel() && std::holds_alternative<StationaryStart>(initial))
    throw ParameterError("simulate_paths: squared Bessel process has no stationary law");

  PathSet out{grid, Matrix<double>(n_paths, grid.size()), seed};
  const GammaDensity stationary(spec.dimension);
  parallel_for(n_paths, [&](std::size_t p) {
    RandomSource rng(seed, p);
    auto row = out.values.row(p);
    row[0] = std::holds_alternative<FixedStart>(initial) ? std::get<FixedStart>(initial).value
                                                         : stationary.sample(rng);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double dt = grid[i] - grid[i - 1];
      row[i] = spec.is_squared_bessel() ? besq_exact_step(spec.dimension, row[i - 1], dt, rng)
                                        : cir_exact_step(spec, row[i - 1], dt, rng);
    }
  });
  return out;
}

TransitionMoments cir_transition_moments(const SrouSpec& spec, double y, double dt) {
  spec.validate();
  if (!(y >= 0.0) || !(dt >= 0.0)) throw ParameterError("cir_transition_moments: negative input");
  if (spec.is_squared_bessel()) {
    return {y + spec.dimension * dt, 2.0 * spec.dimension * dt * dt + 4.0 * y * dt};
  }
  if (std::isinf(dt)) return {spec.dimension, 2.0 * spec.dimension};
  const double decay = std::exp(-spec.speed * dt);
  const double c = -std::expm1(-spec.speed * dt);
  return {y * decay + spec.dimension * c, 4.0 * y * decay * c + 2.0 * spec.dimension * c * c};
}

}  // namespace mmm::sde
