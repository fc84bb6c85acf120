#pragma once

// Reference computations for the tests. Each one reaches its answer by a
// route that shares no code with the library: direct quadrature, ODE
// integration, brute-force optimization or an alternative sampler.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

/// Adaptive Simpson quadrature on [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, 60);
}

/// Integral over (0, upper] of a density-like integrand, split into log-spaced
/// panels so that integrable singularities at the origin are resolved.
inline double integrate_positive(const std::function<double(double)>& f, double upper = 400.0,
                                 double lower = 1e-300) {
  double total = 0.0;
  for (double a = lower; a < upper; a *= 2.0) total += integrate(f, a, std::min(2.0 * a, upper), 1e-13);
  return total;
}

inline double gamma_pdf(double shape, double scale, double x) {
  if (x <= 0.0) return 0.0;
  return std::exp((shape - 1.0) * std::log(x) - x / scale - std::lgamma(shape) - shape * std::log(scale));
}

/// -int p ln p for Gamma(shape, scale), by quadrature.
inline double gamma_entropy_quadrature(double shape, double scale) {
  return integrate_positive([&](double x) {
    const double p = gamma_pdf(shape, scale, x);
    return p > 0.0 ? -p * std::log(p) : 0.0;
  });
}

/// E ln X for Gamma(shape, scale), by quadrature.
inline double gamma_log_mean_quadrature(double shape, double scale) {
  return integrate_positive([&](double x) { return gamma_pdf(shape, scale, x) * std::log(x); });
}

/// psi(x) as the central difference of lgamma.
inline double digamma_fd(double x) {
  const double h = 1e-5 * std::max(1.0, x);
  return (std::lgamma(x + h) - std::lgamma(x - h)) / (2.0 * h);
}

/// Central differences with two levels of Richardson extrapolation. A wide
/// base step keeps cancellation small when f sits close to a constant.
inline double richardson_derivative(const std::function<double(double)>& f, double x, double h) {
  auto central = [&](double step) { return (f(x + step) - f(x - step)) / (2.0 * step); };
  const double d1 = central(h), d2 = central(h / 2), d4 = central(h / 4);
  const double r1 = (4.0 * d2 - d1) / 3.0, r2 = (4.0 * d4 - d2) / 3.0;
  return (16.0 * r2 - r1) / 15.0;
}

/// Mean and variance of dY = a(delta - Y)dt + sqrt(4aY)dW by RK4 on the moment ODEs
/// m' = a(delta - m), v' = -2a v + 4a m.
struct Moments {
  double mean;
  double variance;
};
inline Moments cir_moments_ode(double a, double delta, double y0, double t, int steps = 20000) {
  double m = y0, v = 0.0;
  const double h = t / steps;
  auto dm = [&](double mm) { return a * (delta - mm); };
  auto dv = [&](double mm, double vv) { return -2.0 * a * vv + 4.0 * a * mm; };
  for (int i = 0; i < steps; ++i) {
    const double k1m = dm(m), k1v = dv(m, v);
    const double k2m = dm(m + 0.5 * h * k1m), k2v = dv(m + 0.5 * h * k1m, v + 0.5 * h * k1v);
    const double k3m = dm(m + 0.5 * h * k2m), k3v = dv(m + 0.5 * h * k2m, v + 0.5 * h * k2v);
    const double k4m = dm(m + h * k3m), k4v = dv(m + h * k3m, v + h * k3v);
    m += h / 6.0 * (k1m + 2 * k2m + 2 * k3m + k4m);
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
  }
  return {m, v};
}

/// Instantaneous growth rate of a portfolio holding pi[k] in factor k and the
/// rest in the savings account: sum pi mu - 1/2 sum (pi beta)^2, with factor
/// expected return mu_k = lambda_hat + omega_k beta_k^2.
inline double growth(const std::vector<double>& pi, const std::vector<double>& beta,
                     const std::vector<double>& omega, double lambda_hat) {
  double g = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    const double mu = lambda_hat + omega[k] * beta[k] * beta[k];
    g += pi[k] * mu - 0.5 * pi[k] * pi[k] * beta[k] * beta[k];
  }
  return g;
}

/// Maximizes growth by finite-difference gradient ascent. With fully_invested
/// the weights are kept on the plane sum pi = 1.
inline std::vector<double> maximize_growth(const std::vector<double>& beta, const std::vector<double>& omega,
                                           double lambda_hat, bool fully_invested) {
  const std::size_t n = beta.size();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), grad(n);
  double curvature = 0.0;
  for (double b : beta) curvature = std::max(curvature, b * b);
  const double step = 1.0 / curvature;
  for (int it = 0; it < 200000; ++it) {
    for (std::size_t k = 0; k < n; ++k) {
      const double h = 1e-3 * std::max(1.0, std::abs(pi[k]));  // central differences are exact for quadratics
      auto up = pi, down = pi;
      up[k] += h;
      down[k] -= h;
      grad[k] = (growth(up, beta, omega, lambda_hat) - growth(down, beta, omega, lambda_hat)) / (2.0 * h);
    }
    if (fully_invested) {
      double mean = 0.0;
      for (double g : grad) mean += g / static_cast<double>(n);
      for (double& g : grad) g -= mean;
    }
    double moved = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      pi[k] += step * grad[k];
      moved = std::max(moved, std::abs(step * grad[k]));
    }
    if (moved < 1e-13) break;
  }
  return pi;
}

/// S_0 E[1 / S_dl] for BESQ(4) started at s0, sampled as the squared norm of a
/// four-dimensional Brownian motion. Returns mean and standard error.
struct McResult {
  double mean;
  double std_error;
};
inline McResult besq4_bond_mc(double s0, double dl, std::size_t draws, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const double start = std::sqrt(s0), sd = std::sqrt(dl);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double x0 = start + sd * z(rng);
    double r2 = x0 * x0;
    for (int d = 1; d < 4; ++d) {
      const double x = sd * z(rng);
      r2 += x * x;
    }
    const double v = s0 / r2;
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / static_cast<double>(draws);
  const double var = sum2 / static_cast<double>(draws) - mean * mean;
  return {mean, std::sqrt(var / static_cast<double>(draws))};
}

/// Student-t draws by the normal / chi-square construction.
inline std::vector<double> student_t_draws(double df, double location, double scale, std::size_t n,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::chi_squared_distribution<double> chi(df);
  std::vector<double> out(n);
  for (auto& x : out) x = location + scale * z(rng) / std::sqrt(chi(rng) / df);
  return out;
}

}  // namespace oracle
