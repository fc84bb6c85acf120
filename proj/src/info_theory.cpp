#include "mmm/info_theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <boost/math/special_functions/trigamma.hpp>

#include "mmm/error.hpp"
#include "mmm/parallel.hpp"
#include "mmm/random.hpp"
#include "mmm/special.hpp"

namespace mmm::info {

namespace {

double log_sum_exp(std::span<const double> x) {
  const double top = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double v : x) s += std::exp(v - top);
  return top + std::log(s);
}

// Masses from log density values at the nodes, normalized in log space.
std::vector<double> masses_from_log(const QuadratureGrid& grid, std::span<const double> log_density) {
  std::vector<double> lw(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) lw[i] = log_density[i] + std::log(grid.weights[i]);
  const double norm = log_sum_exp(lw);
  if (!std::isfinite(norm)) throw IntegrabilityError("density is not normalizable on the grid");
  for (double& v : lw) v = std::exp(v - norm);
  return lw;
}

}  // namespace

QuadratureGrid log_grid(double lower, double upper, std::size_t count) {
  if (!(lower > 0.0) || !(upper > lower)) throw ParameterError("log_grid: need 0 < lower < upper");
  if (count < 2) throw ParameterError("log_grid: need at least two nodes");
  QuadratureGrid g;
  g.nodes.resize(count);
  g.weights.resize(count);
  const double u0 = std::log(lower);
  const double h = (std::log(upper) - u0) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    g.nodes[i] = std::exp(u0 + h * static_cast<double>(i));
    g.weights[i] = h * g.nodes[i];
  }
  g.weights.front() *= 0.5;
  g.weights.back() *= 0.5;
  return g;
}

GridDensity::GridDensity(QuadratureGrid grid, std::vector<double> masses)
    : grid_(std::move(grid)), masses_(std::move(masses)) {
  if (grid_.nodes.size() != masses_.size() || grid_.weights.size() != masses_.size())
    throw ParameterError("GridDensity: size mismatch");
  for (std::size_t i = 0; i < masses_.size(); ++i) {
    if (!(grid_.nodes[i] > 0.0)) throw ParameterError("GridDensity: nodes must be positive");
    if (i > 0 && !(grid_.nodes[i] > grid_.nodes[i - 1]))
      throw ParameterError("GridDensity: nodes must be strictly increasing");
    if (!(masses_[i] >= 0.0) || !std::isfinite(masses_[i]))
      throw ParameterError("GridDensity: masses must be finite and nonnegative");
  }
  const double total = std::accumulate(masses_.begin(), masses_.end(), 0.0);
  if (!(total > 0.0)) throw ParameterError("GridDensity: zero total mass");
  for (double& m : masses_) m /= total;
}

double GridDensity::expectation(double (*f)(double)) const {
  double s = 0.0;
  for (std::size_t i = 0; i < masses_.size(); ++i) s += masses_[i] * f(grid_.nodes[i]);
  return s;
}

double GridDensity::mean() const {
  return expectation([](double y) { return y; });
}

double GridDensity::log_mean() const {
  return expectation([](double y) { return std::log(y); });
}

double l1_distance(const GridDensity& a, const GridDensity& b) {
  if (a.nodes().size() != b.nodes().size() || !std::equal(a.nodes().begin(), a.nodes().end(), b.nodes().begin()))
    throw ParameterError("l1_distance: densities live on different grids");
  double d = 0.0;
  for (std::size_t i = 0; i < a.masses().size(); ++i) d += std::abs(a.masses()[i] - b.masses()[i]);
  return d;
}

double Polynomial::operator()(double y) const {
  double v = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * y + *it;
  return v;
}

std::size_t Polynomial::degree() const {
  std::size_t d = 0;
  for (std::size_t j = 0; j < coeffs.size(); ++j)
    if (coeffs[j] != 0.0) d = j;
  return d;
}

bool Polynomial::is_identity() const {
  for (std::size_t j = 0; j < coeffs.size(); ++j)
    if (coeffs[j] != (j == 1 ? 1.0 : 0.0)) return false;
  return coeffs.size() >= 2;
}

double surprisal(const GridDensity& density) {
  double s = 0.0;
  for (std::size_t i = 0; i < density.masses().size(); ++i) {
    const double m = density.masses()[i];
    if (m <= 0.0)
      throw DomainError("surprisal: zero mass at node y = " + std::to_string(density.nodes()[i]));
    s -= m * std::log(density.value(i));
  }
  return s;
}

double surprisal(std::span<const GridDensity> marginals) {
  double s = 0.0;
  for (const auto& d : marginals) s += surprisal(d);
  return s;
}

double stationary_log_density(const Polynomial& phi, double omega, double y) {
  if (!(y > 0.0)) throw DomainError("stationary_log_density: y must be positive");
  const double p = phi(y);
  if (!(p > 0.0)) throw ParameterError("stationary_log_density: phi must be positive, phi(" + std::to_string(y) +
                                       ") = " + std::to_string(p));
  const double ly = std::log(y);
  // int_1^y phi(u)/u du
  double integral = phi.coeffs.empty() ? 0.0 : phi.coeffs[0] * ly;
  for (std::size_t j = 1; j < phi.coeffs.size(); ++j)
    integral += phi.coeffs[j] * (std::pow(y, static_cast<double>(j)) - 1.0) / static_cast<double>(j);
  return std::log(p) - std::log(4.0) - 2.0 * ly + 2.0 * (omega * ly - 0.25 * integral);
}

GridDensity stationary_density_from_phi(const Polynomial& phi, double omega, const QuadratureGrid& grid) {
  if (!(omega > 0.0)) throw ParameterError("stationary_density_from_phi: omega must be positive");
  std::vector<double> logp(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) logp[i] = stationary_log_density(phi, omega, grid.nodes[i]);
  auto masses = masses_from_log(grid, logp);
  // A normalizable density carries almost no mass per unit of ln y at either
  // end of a wide window; power-law tails carry a fixed fraction.
  const std::size_t last = grid.size() - 1;
  const double h = std::log(grid.nodes[1] / grid.nodes[0]);
  const double lower_edge = masses[0] / (0.5 * h), upper_edge = masses[last] / (0.5 * h);
  if (lower_edge > 1e-2 || upper_edge > 1e-2) {
    std::ostringstream msg;
    msg << "stationary_density_from_phi: density not normalizable (edge mass per log unit " << lower_edge << ", "
        << upper_edge << ")";
    throw IntegrabilityError(msg.str());
  }
  return GridDensity(grid, std::move(masses));
}

LagrangeSolution solve_surprisal_lagrangian(const ConstraintSet& constraints, const QuadratureGrid& grid,
                                            int max_iterations) {
  const double m = constraints.mean_level, z = constraints.log_mean_level;
  if (!(m > 0.0) || !std::isfinite(z)) throw ParameterError("minimize_surprisal: mean_level must be positive");
  if (!(z < std::log(m)))
    throw NoSolutionError("minimize_surprisal: infeasible, log-mean must be below ln(mean) (Jensen)");
  if (!(m > grid.nodes.front() && m < grid.nodes.back()) ||
      !(z > std::log(grid.nodes.front()) && z < std::log(grid.nodes.back())))
    throw NoSolutionError("minimize_surprisal: constraints outside the grid window");

  const std::size_t n = grid.size();
  std::vector<double> ly(n), lw(n), expo(n);
  for (std::size_t i = 0; i < n; ++i) {
    ly[i] = std::log(grid.nodes[i]);
    lw[i] = std::log(grid.weights[i]);
  }
  // Dual: F(l1, l2) = ln sum w exp(l1 y + l2 ln y) - l1 m - l2 z, convex.
  auto dual = [&](double l1, double l2) {
    for (std::size_t i = 0; i < n; ++i) expo[i] = lw[i] + l1 * grid.nodes[i] + l2 * ly[i];
    return log_sum_exp(expo) - l1 * m - l2 * z;
  };

  double l1 = -1.0 / m, l2 = 0.0;
  double f = dual(l1, l2);
  double g1 = 0.0, g2 = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    // moments of the current tilted density (expo holds the current exponents)
    const double norm = log_sum_exp(expo);
    double ey = 0.0, el = 0.0, eyy = 0.0, eyl = 0.0, ell = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = std::exp(expo[i] - norm);
      const double y = grid.nodes[i], l = ly[i];
      ey += p * y;
      el += p * l;
      eyy += p * y * y;
      eyl += p * y * l;
      ell += p * l * l;
    }
    g1 = ey - m;
    g2 = el - z;
    if (std::hypot(g1 / m, g2) < 1e-13) {
      std::vector<double> masses(n);
      for (std::size_t i = 0; i < n; ++i) masses[i] = std::exp(expo[i] - norm);
      return {GridDensity(grid, std::move(masses)), -norm, l1, l2, it};
    }
    const double h11 = eyy - ey * ey, h12 = eyl - ey * el, h22 = ell - el * el;
    const double det = h11 * h22 - h12 * h12;
    if (!(det > 0.0)) break;
    const double d1 = -(h22 * g1 - h12 * g2) / det;
    const double d2 = -(h11 * g2 - h12 * g1) / det;
    const double slope = g1 * d1 + g2 * d2;
    // Newton decrement below the resolution of the dual value: nothing left to gain.
    if (-slope < 1e-15 * std::max(1.0, std::abs(f))) {
      std::vector<double> masses(n);
      for (std::size_t i = 0; i < n; ++i) masses[i] = std::exp(expo[i] - norm);
      return {GridDensity(grid, std::move(masses)), -norm, l1, l2, it};
    }
    double t = 1.0, f_new = dual(l1 + d1, l2 + d2);
    while (!(f_new <= f + 1e-4 * t * slope) && t > 1e-12) {
      t *= 0.5;
      f_new = dual(l1 + t * d1, l2 + t * d2);
    }
    if (t <= 1e-12) {
      // No further decrease available in floating point: accept if near optimal.
      f_new = dual(l1, l2);
      if (std::hypot(g1 / m, g2) < 1e-9) {
        const double nrm = log_sum_exp(expo);
        std::vector<double> masses(n);
        for (std::size_t i = 0; i < n; ++i) masses[i] = std::exp(expo[i] - nrm);
        return {GridDensity(grid, std::move(masses)), -nrm, l1, l2, it};
      }
      break;
    }
    l1 += t * d1;
    l2 += t * d2;
    f = f_new;
  }
  std::ostringstream msg;
  msg << "minimize_surprisal: dual Newton did not converge (lambda1 = " << l1 << ", lambda2 = " << l2
      << ", gradient = (" << g1 << ", " << g2 << "))";
  throw NumericError(msg.str());
}

GridDensity minimize_surprisal(const ConstraintSet& constraints, const QuadratureGrid& grid) {
  return solve_surprisal_lagrangian(constraints, grid).density;
}

GammaFit fit_gamma_family(std::span<const double> nodes, std::span<const double> log_density) {
  if (nodes.size() != log_density.size() || nodes.size() < 4) throw ParameterError("fit_gamma_family: bad input");
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = nodes[static_cast<std::size_t>(i)];
    x(i, 2) = std::log(nodes[static_cast<std::size_t>(i)]);
    b(i) = log_density[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d coef = x.colPivHouseholderQr().solve(b);
  const double ssr = (x * coef - b).norm();
  const double spread = (b.array() - b.mean()).matrix().norm();
  return {spread > 0.0 ? ssr / spread : ssr, coef(1), coef(2)};
}

PhiSearchResult match_gamma_phi(std::size_t max_degree, double omega, const QuadratureGrid& grid) {
  if (max_degree < 1) throw ParameterError("match_gamma_phi: max_degree must be at least 1");
  if (!(omega > 0.0)) throw ParameterError("match_gamma_phi: omega must be positive");
  static constexpr double lattice[] = {-1.0, -0.5, 0.0, 0.5, 1.0, 2.0};
  constexpr std::size_t levels = std::size(lattice);
  const std::size_t terms = max_degree + 1;
  std::size_t total = 1;
  for (std::size_t j = 0; j < terms; ++j) total *= levels;

  PhiSearchResult result;
  std::vector<double> logp(grid.size());
  for (std::size_t code = 0; code < total; ++code) {
    Polynomial phi;
    phi.coeffs.resize(terms);
    for (std::size_t j = 0, c = code; j < terms; ++j, c /= levels) phi.coeffs[j] = lattice[c % levels];
    ++result.candidates;
    if (!std::all_of(grid.nodes.begin(), grid.nodes.end(), [&](double y) { return phi(y) > 0.0; })) continue;
    for (std::size_t i = 0; i < grid.size(); ++i) logp[i] = stationary_log_density(phi, omega, grid.nodes[i]);
    const GammaFit fit = fit_gamma_family(grid.nodes, logp);
    // gamma family: affine log density with a decaying exponential and an integrable origin
    if (!(fit.relative_residual < 1e-8) || !(fit.lambda1 < 0.0) || !(fit.lambda2 > -1.0)) continue;
    const double mean = (fit.lambda2 + 1.0) / -fit.lambda1;
    if (std::abs(mean - 4.0 * omega) < 1e-6)
      result.matches.push_back(phi);
    else
      result.scaled_matches.push_back(phi);
  }
  if (!result.matches.empty()) result.match = result.matches.front();
  result.unique = result.matches.size() == 1 && result.matches.front().is_identity();
  return result;
}

double log_mean_gamma(double omega) {
  if (!(omega > 0.0)) throw ParameterError("log_mean_gamma: omega must be positive");
  return std::log(2.0) + digamma(2.0 * omega);
}

double total_gamma_surprisal(std::span<const double> omega) {
  double h = 0.0;
  for (double w : omega) {
    if (!(w > 0.0)) throw ParameterError("total_gamma_surprisal: omega must be positive");
    h += gamma_entropy(2.0 * w, 2.0);
  }
  return h;
}

std::vector<double> extremal_risk_premia(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ParameterError("extremal_risk_premia: n must be positive");
  if (n == 1) return {1.0};
  RandomSource rng(seed);
  std::vector<double> w(n);
  for (double& v : w) v = rng.gamma(1.0, 1.0) + 0.1;
  const double s0 = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= s0;

  // d/domega H(Gamma(2 omega, 2)) = 2 (1 + (1 - k) psi'(k)), k = 2 omega
  auto gradient = [](double omega) {
    const double k = 2.0 * omega;
    return 2.0 * (1.0 + (1.0 - k) * boost::math::trigamma(k));
  };
  const double floor = 1e-3 / static_cast<double>(n);
  std::vector<double> g(n), trial(n);
  double value = total_gamma_surprisal(w);
  for (int it = 0; it < 10000; ++it) {
    double mean_g = 0.0;
    for (std::size_t k = 0; k < n; ++k) mean_g += (g[k] = gradient(w[k])) / static_cast<double>(n);
    double norm = 0.0;
    for (std::size_t k = 0; k < n; ++k) norm += (g[k] - mean_g) * (g[k] - mean_g);
    if (std::sqrt(norm) < 1e-13) break;
    // ascent along the projected gradient, step halved until the objective improves
    double step = 1.0 / std::sqrt(norm);
    bool improved = false;
    for (int k = 0; k < 60 && !improved; ++k, step *= 0.5) {
      for (std::size_t j = 0; j < n; ++j) trial[j] = w[j] + step * (g[j] - mean_g);
      if (*std::min_element(trial.begin(), trial.end()) < floor) continue;
      const double v = total_gamma_surprisal(trial);
      if (v > value) {
        improved = true;
        value = v;
        w = trial;
      }
    }
    if (!improved) break;
  }
  return w;
}

Matrix<double> radon_nikodym_path(const market::MarketPaths& paths, const market::MarketConfig& config) {
  if (paths.measure != market::Measure::RealWorld)
    throw ContractError("radon_nikodym_path: paths must be simulated under the real-world measure");
  if (paths.noise_increments.size() != config.n || paths.normalized_factors.size() != config.n)
    throw ContractError("radon_nikodym_path: missing Brownian increments");
  const std::size_t nodes = paths.nodes();
  Matrix<double> lambda(paths.paths(), nodes);
  for (std::size_t p = 0; p < paths.paths(); ++p) {
    double log_l = 0.0;
    lambda(p, 0) = 1.0;
    for (std::size_t i = 1; i < nodes; ++i) {
      const double dt = paths.market_grid[i] - paths.market_grid[i - 1];
      for (std::size_t k = 0; k < config.n; ++k) {
        const double a = config.activities[k];
        const double y = paths.normalized_factors[k].values(p, i - 1);
        // theta dW = lambda_hat / (2 sqrt a) d(int sqrt(Y) dW)
        const double c = config.lambda_hat / (2.0 * std::sqrt(a));
        log_l -= 0.5 * config.lambda_hat * config.lambda_hat * y / (4.0 * a) * dt;
        log_l -= c * paths.noise_increments[k](p, i - 1);
      }
      lambda(p, i) = std::exp(log_l);
    }
  }
  return lambda;
}

McEstimate kl_divergence_mc(const market::MarketConfig& config, std::size_t n_samples, std::uint64_t seed) {
  config.validate();
  if (n_samples == 0) throw ParameterError("kl_divergence_mc: n_samples must be positive");
  if (!std::holds_alternative<market::StationaryInitial>(config.initial))
    throw ParameterError("kl_divergence_mc: requires stationary initialization");
  constexpr std::size_t block = 1 << 14;
  const std::size_t blocks = (n_samples + block - 1) / block;
  std::vector<double> samples(n_samples);
  const double l2 = config.lambda_hat * config.lambda_hat;
  parallel_for(blocks, [&](std::size_t b) {
    RandomSource rng(seed, b);
    const std::size_t end = std::min(n_samples, (b + 1) * block);
    for (std::size_t i = b * block; i < end; ++i) {
      double v = 0.0;
      for (std::size_t k = 0; k < config.n; ++k)
        v += 0.5 * l2 * rng.gamma(2.0 * config.omega[k], 2.0) / (4.0 * config.activities[k]);
      samples[i] = v;
    }
  });
  return mean_estimate(samples);
}

double activity_objective(std::span<const double> activities) {
  if (activities.empty()) throw ParameterError("activity_objective: empty");
  double s = 0.0;
  for (double a : activities) {
    if (!(a > 0.0)) throw ParameterError("activity_objective: activities must be positive");
    s += 1.0 / a;
  }
  return s / static_cast<double>(activities.size());
}

std::vector<double> optimal_activities(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ParameterError("optimal_activities: n must be positive");
  const double dn = static_cast<double>(n);
  // u_k = sqrt(1/a_k); minimize mean(u^2) on {mean(u) = 1, u > 0}
  RandomSource rng(seed);
  std::vector<double> u(n);
  for (double& v : u) v = rng.gamma(1.0, 1.0) + 0.05;
  const double mu = std::accumulate(u.begin(), u.end(), 0.0) / dn;
  for (double& v : u) v /= mu;
  const double step = 0.5 * dn / 2.0;  // half the inverse Lipschitz constant of the gradient 2u/n
  for (int it = 0; it < 1000; ++it) {
    double mean_g = 0.0;
    for (double v : u) mean_g += 2.0 * v / dn / dn;
    double moved = 0.0;
    for (double& v : u) {
      const double d = step * (2.0 * v / dn - mean_g);
      v -= d;
      moved = std::max(moved, std::abs(d));
    }
    if (moved < 1e-16) break;
  }
  std::vector<double> a(n);
  for (std::size_t k = 0; k < n; ++k) a[k] = 1.0 / (u[k] * u[k]);
  return a;
}

}  // namespace mmm::info
