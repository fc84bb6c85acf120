#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mmm/estimate.hpp"
#include "mmm/market_model.hpp"
#include "mmm/matrix.hpp"

namespace mmm::info {

/// Positive quadrature nodes with trapezoid weights in u = ln y.
struct QuadratureGrid {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Log-spaced nodes on [lower, upper].
QuadratureGrid log_grid(double lower = 1e-12, double upper = 200.0, std::size_t count = 10000);

/// Nonnegative masses on a quadrature grid summing to one.
class GridDensity {
 public:
  GridDensity(QuadratureGrid grid, std::vector<double> masses);

  template <typename F>
  static GridDensity from_function(const QuadratureGrid& grid, F&& density) {
    std::vector<double> masses(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) masses[i] = density(grid.nodes[i]) * grid.weights[i];
    return GridDensity(grid, std::move(masses));
  }

  const QuadratureGrid& grid() const noexcept { return grid_; }
  std::span<const double> nodes() const noexcept { return grid_.nodes; }
  std::span<const double> masses() const noexcept { return masses_; }
  double value(std::size_t i) const { return masses_[i] / grid_.weights[i]; }
  double expectation(double (*f)(double)) const;
  double mean() const;
  double log_mean() const;

 private:
  QuadratureGrid grid_;
  std::vector<double> masses_;
};

/// Sum of |mass differences|; both densities must share nodes.
double l1_distance(const GridDensity& a, const GridDensity& b);

struct ConstraintSet {
  double mean_level = 4.0;      // 4 omega
  double log_mean_level = 0.0;  // zeta
};

/// Coefficients in increasing degree.
struct Polynomial {
  std::vector<double> coeffs;

  double operator()(double y) const;
  std::size_t degree() const;
  bool is_identity() const;
};

/// -sum masses * ln(density), the average information content of the density.
double surprisal(const GridDensity& density);
/// Joint surprisal of independent marginals.
double surprisal(std::span<const GridDensity> marginals);

/// Log of the unnormalized stationary density C phi(y)/(4y^2) exp{2 int_1^y (omega - phi(u)/4)/u du}.
double stationary_log_density(const Polynomial& phi, double omega, double y);

/// Normalized stationary Fokker-Planck solution for the normalized-factor SDE
/// with volatility function phi.
GridDensity stationary_density_from_phi(const Polynomial& phi, double omega,
                                        const QuadratureGrid& grid);

struct LagrangeSolution {
  GridDensity density;
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  int iterations = 0;
};

/// Stationary point of the surprisal Lagrangian with mean and log-mean
/// constraints: the density exp(l0 + l1 y + l2 ln y) meeting both constraints
/// on the grid. Found by Newton's method on the convex dual in (l1, l2).
/// Among grid densities satisfying the constraints this one has the largest
/// value of surprisal() (the largest differential entropy).
LagrangeSolution solve_surprisal_lagrangian(const ConstraintSet& constraints,
                                            const QuadratureGrid& grid, int max_iterations = 200);

GridDensity minimize_surprisal(const ConstraintSet& constraints, const QuadratureGrid& grid);

struct PhiSearchResult {
  std::optional<Polynomial> match;           // gamma family with mean 4 omega
  std::vector<Polynomial> matches;           // every candidate meeting both conditions
  std::vector<Polynomial> scaled_matches;    // gamma family but wrong mean (phi = c y)
  std::size_t candidates = 0;
  bool unique = false;
};

/// Residual of the least-squares fit of ln p against (1, y, ln y), relative to
/// the spread of ln p. Below 1e-8 means the density is in the gamma family.
struct GammaFit {
  double relative_residual = 0.0;
  double lambda1 = 0.0;  // coefficient of y
  double lambda2 = 0.0;  // coefficient of ln y
};
GammaFit fit_gamma_family(std::span<const double> nodes, std::span<const double> log_density);

/// Enumerates polynomials of degree <= max_degree with coefficients on a
/// small lattice and reports those whose stationary density is the gamma law
/// with mean 4 omega.
PhiSearchResult match_gamma_phi(std::size_t max_degree, double omega,
                                const QuadratureGrid& grid = log_grid(1e-6, 200.0, 2000));

/// zeta = E ln Y = ln 2 + psi(2 omega) under the gamma law of dimension 4 omega.
double log_mean_gamma(double omega);

/// Total surprisal sum_k H(Gamma(2 omega_k, 2)).
double total_gamma_surprisal(std::span<const double> omega);

/// Extremal risk premia: stationary point of the total surprisal of
/// gamma(4 omega^k) marginals subject to sum omega = 1, found by projected
/// gradient ascent from a random interior start. Returns omega.
std::vector<double> extremal_risk_premia(std::size_t n, std::uint64_t seed = 1);

/// Lambda_tau = prod_k exp{-1/2 int theta_k^2 ds - int theta_k dW^k}, theta_k = lambda_hat sqrt(Y^k / (4 a^k)).
/// Requires paths simulated under the real-world measure.
Matrix<double> radon_nikodym_path(const market::MarketPaths& paths, const market::MarketConfig& config);

/// (1/2) sum_k lambda_hat^2 E[Y^k] / (4 a^k) with Y^k drawn from the stationary gamma law.
McEstimate kl_divergence_mc(const market::MarketConfig& config, std::size_t n_samples,
                            std::uint64_t seed);

/// (1/n) sum 1/a^k, the lambda-free factor of the divergence.
double activity_objective(std::span<const double> activities);

/// Minimizes activity_objective subject to (1/n) sum sqrt(1/a^k) = 1.
std::vector<double> optimal_activities(std::size_t n, std::uint64_t seed = 1);

}  // namespace mmm::info
