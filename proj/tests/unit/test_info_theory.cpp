#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "mmm/error.hpp"
#include "mmm/info_theory.hpp"
#include "mmm/sde_kernel.hpp"
#include "support/oracles.hpp"

using namespace mmm;
using namespace mmm::info;

namespace {

GridDensity gamma_on(const QuadratureGrid& grid, double omega) {
  return GridDensity::from_function(grid, [&](double y) { return oracle::gamma_pdf(2.0 * omega, 2.0, y); });
}

// Moves mass along a direction orthogonal (under p) to 1, y and ln y, so both
// constraints and the normalization are kept.
GridDensity feasible_perturbation(const GridDensity& p, double h_power, double scale) {
  const auto y = p.nodes();
  const auto m = p.masses();
  const std::size_t n = y.size();
  std::vector<std::vector<double>> basis(3, std::vector<double>(n));
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    basis[0][i] = 1.0;
    basis[1][i] = y[i];
    basis[2][i] = std::log(y[i]);
    h[i] = std::sin(h_power * std::log(y[i]));
  }
  // Gram-Schmidt under the weights m
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += m[i] * a[i] * b[i];
    return s;
  };
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t l = 0; l < j; ++l) {
      const double c = dot(basis[j], basis[l]);
      for (std::size_t i = 0; i < n; ++i) basis[j][i] -= c * basis[l][i];
    }
    const double norm = std::sqrt(dot(basis[j], basis[j]));
    for (auto& v : basis[j]) v /= norm;
  }
  for (const auto& b : basis) {
    const double c = dot(h, b);
    for (std::size_t i = 0; i < n; ++i) h[i] -= c * b[i];
  }
  double peak = 0.0;
  for (double v : h) peak = std::max(peak, std::abs(v));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = m[i] * (1.0 + scale / peak * h[i]);
  return GridDensity(p.grid(), out);
}

}  // namespace

TEST_SUITE("info_theory") {

TEST_CASE("surprisal of reference densities") {
  const auto grid = log_grid(1e-12, 200.0, 10000);
  const double analytic = 2.0 + std::log(2.0) - oracle::digamma_fd(2.0);
  CHECK(oracle::gamma_entropy_quadrature(2.0, 2.0) == doctest::Approx(analytic).epsilon(1e-8));
  CHECK(surprisal(gamma_on(grid, 1.0)) == doctest::Approx(2.27036).epsilon(1e-5));
  CHECK(surprisal(gamma_on(log_grid(1e-4, 200.0, 10000), 1.0)) == doctest::Approx(2.27036).epsilon(1e-3));

  const auto unit = log_grid(1e-12, 1.0, 10000);
  CHECK(std::abs(surprisal(GridDensity::from_function(unit, [](double) { return 1.0; }))) < 1e-5);
  const auto upto_e = log_grid(1e-12, std::exp(1.0), 10000);
  CHECK(surprisal(GridDensity::from_function(upto_e, [](double) { return 1.0; })) == doctest::Approx(1.0).epsilon(1e-5));

  std::vector<double> masses(grid.size(), 1.0);
  masses[10] = 0.0;
  CHECK_THROWS_AS(surprisal(GridDensity(grid, masses)), DomainError);
}

TEST_CASE("joint surprisal of independent marginals is additive") {
  const auto grid = log_grid();
  const std::vector<GridDensity> parts{gamma_on(grid, 0.25), gamma_on(grid, 0.5), gamma_on(grid, 0.25)};
  CHECK(surprisal(parts) == doctest::Approx(surprisal(parts[0]) + surprisal(parts[1]) + surprisal(parts[2])));
}

TEST_CASE("Fokker-Planck density for phi(y) = y is the gamma law") {
  const auto grid = log_grid();
  const Polynomial identity{{0.0, 1.0}};
  for (double omega : {0.25, 0.5, 1.0}) {
    const auto fp = stationary_density_from_phi(identity, omega, grid);
    const auto ref = gamma_on(grid, omega);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, std::abs(fp.value(i) - ref.value(i)));
    CHECK(worst < 1e-8);
    CHECK(fp.mean() == doctest::Approx(4.0 * omega).epsilon(1e-6));
  }
  const auto fp1 = stationary_density_from_phi(identity, 1.0, grid);
  std::size_t at2 = 0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::abs(grid.nodes[i] - 2.0) < std::abs(grid.nodes[at2] - 2.0)) at2 = i;
  CHECK(fp1.value(at2) == doctest::Approx(oracle::gamma_pdf(2.0, 2.0, grid.nodes[at2])).epsilon(1e-8));
  CHECK(sde::GammaDensity(4.0).pdf(2.0) == doctest::Approx(0.183940).epsilon(1e-6));

  const Polynomial negative{{-1.0, 1.0}};
  CHECK_THROWS_AS(stationary_density_from_phi(negative, 1.0, grid), ParameterError);
}

TEST_CASE("surprisal Lagrangian recovers the gamma law") {
  const auto grid = log_grid();
  for (double omega : {0.25, 0.5, 1.0}) {
    const auto sol = solve_surprisal_lagrangian({4.0 * omega, log_mean_gamma(omega)}, grid);
    CHECK(l1_distance(sol.density, gamma_on(grid, omega)) < 1e-3);
    CHECK(sol.lambda1 == doctest::Approx(-0.5).epsilon(1e-4));
    CHECK(sol.lambda2 == doctest::Approx(2.0 * omega - 1.0).scale(1.0).epsilon(1e-4));
  }
  CHECK_THROWS_AS(minimize_surprisal({1.0, 0.5}, grid), NoSolutionError);
}

TEST_CASE("the Lagrangian solution has the largest entropy among feasible densities") {
  const auto grid = log_grid();
  const ConstraintSet c{2.0, log_mean_gamma(0.5) - 0.3};
  const auto best = minimize_surprisal(c, grid);
  const double h = surprisal(best);
  for (int j = 1; j <= 50; ++j) {
    const auto other = feasible_perturbation(best, 0.3 + 0.1 * j, 0.05 + 0.4 * (j % 5) / 5.0);
    CHECK(other.mean() == doctest::Approx(best.mean()).epsilon(1e-9));
    CHECK(other.log_mean() == doctest::Approx(best.log_mean()).epsilon(1e-9));
    CHECK(surprisal(other) < h + 1e-6);
  }

  // at omega = 1/2 the log-mean matches the unconstrained maximum-entropy law,
  // so moving it either way lowers the entropy
  const double z = log_mean_gamma(0.5);
  const double at = surprisal(minimize_surprisal({2.0, z}, grid));
  const auto shifted = minimize_surprisal({2.0, z + 0.1}, grid);
  CHECK(l1_distance(shifted, gamma_on(grid, 0.5)) > 1e-2);
  CHECK(surprisal(shifted) < at);
  CHECK(surprisal(minimize_surprisal({2.0, z - 0.1}, grid)) < at);
}

TEST_CASE("volatility-function search") {
  const auto r = match_gamma_phi(3, 0.5);
  CHECK(r.candidates == 1296);
  REQUIRE(r.match.has_value());
  CHECK(r.match->is_identity());
  CHECK(r.unique);
  for (const auto& p : r.scaled_matches) {
    CHECK(p.degree() == 1);
    CHECK(p.coeffs[0] == 0.0);
  }
  // constant and quadratic phi are outside the gamma family
  const auto grid = log_grid(1e-6, 200.0, 2000);
  std::vector<double> logp(grid.size());
  for (const Polynomial& phi : {Polynomial{{1.0}}, Polynomial{{0.0, 0.0, 1.0}}}) {
    for (std::size_t i = 0; i < grid.size(); ++i) logp[i] = stationary_log_density(phi, 0.5, grid.nodes[i]);
    const auto fit = fit_gamma_family(grid.nodes, logp);
    CHECK_FALSE((fit.relative_residual < 1e-8 && fit.lambda1 < 0.0 && fit.lambda2 > -1.0));
  }
}

TEST_CASE("gamma log-mean") {
  CHECK(log_mean_gamma(0.5) == doctest::Approx(0.115932).epsilon(1e-6));
  CHECK(log_mean_gamma(1.0) == doctest::Approx(1.115932).epsilon(1e-6));
  for (double omega : {0.1, 0.25, 0.5, 1.0, 3.0}) {
    CHECK(log_mean_gamma(omega) == doctest::Approx(oracle::gamma_log_mean_quadrature(2.0 * omega, 2.0)).epsilon(1e-6));
    CHECK(log_mean_gamma(omega) == doctest::Approx(std::log(2.0) + oracle::digamma_fd(2.0 * omega)).epsilon(1e-8));
  }
}

TEST_CASE("total surprisal and extremal risk premia") {
  const std::vector<double> w{0.2, 0.3, 0.5};
  double ref = 0.0;
  for (double o : w) ref += oracle::gamma_entropy_quadrature(2.0 * o, 2.0);
  CHECK(total_gamma_surprisal(w) == doctest::Approx(ref).epsilon(1e-7));

  for (std::size_t n : {1, 2, 5}) {
    const auto omega = extremal_risk_premia(n, 3);
    for (double o : omega) CHECK(o == doctest::Approx(1.0 / static_cast<double>(n)).epsilon(1e-6));
  }
  const std::vector<double> equal(3, 1.0 / 3.0);
  CHECK(total_gamma_surprisal(equal) > total_gamma_surprisal(w));
}

TEST_CASE("KL divergence") {
  CHECK(kl_divergence_mc(market::MarketConfig::minimal(2, 0.0), 1000, 1).value == 0.0);
  const auto est = kl_divergence_mc(market::MarketConfig::minimal(2, 0.2), 200000, 1);
  CHECK(std::abs(est.value - 0.02) < 4.0 * est.std_error);
  auto fast = market::MarketConfig::minimal(3, 0.2);
  fast.activities = {4.0, 4.0, 4.0};
  const auto slow = kl_divergence_mc(fast, 200000, 2);
  CHECK(std::abs(slow.value - 0.04 / 8.0) < 4.0 * slow.std_error);
}

TEST_CASE("optimal activities") {
  for (std::size_t n : {1, 3, 10}) {
    const auto a = optimal_activities(n, 2);
    for (double v : a) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(activity_objective(a) == doctest::Approx(1.0).epsilon(1e-6));
  }
  const std::vector<double> uneven{0.5, 2.0};
  CHECK(activity_objective(uneven) == doctest::Approx(1.25));
}

TEST_CASE("Radon-Nikodym derivative") {
  const auto grid = sde::TimeGrid::uniform(0.0, 1.0, 0.01);
  const auto zero = market::MarketConfig::minimal(2, 0.0);
  const auto lambda = radon_nikodym_path(market::simulate_market(zero, grid, 20, 1), zero);
  for (double v : lambda.data()) CHECK(v == 1.0);

  const auto c = market::MarketConfig::minimal(2, 0.2);
  const auto paths = market::simulate_market(c, grid, 20000, 4);
  const auto l = radon_nikodym_path(paths, c);
  std::vector<double> terminal = l.column(grid.size() - 1), logs(terminal.size());
  for (std::size_t p = 0; p < terminal.size(); ++p) {
    CHECK(l(p, 0) == 1.0);
    logs[p] = std::log(terminal[p]);
  }
  const auto mean = mean_estimate(terminal), log_mean = mean_estimate(logs);
  CHECK(std::abs(mean.value - 1.0) < 4.0 * mean.std_error);
  CHECK(std::abs(log_mean.value + 0.02) < 4.0 * log_mean.std_error);

  auto q = c;
  q.measure = market::Measure::BenchmarkNeutral;
  CHECK_THROWS_AS(radon_nikodym_path(market::simulate_market(q, grid, 2, 1), q), ContractError);
}

}
