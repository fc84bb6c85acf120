#pragma once

namespace mmm {

/// Digamma function psi(x) = d/dx ln Gamma(x), accurate to about 1e-12.
/// Upward recurrence to x >= 10, then the asymptotic series; negative
/// non-integer arguments use the reflection formula.
double digamma(double x);

/// Differential entropy of Gamma(shape, scale).
double gamma_entropy(double shape, double scale);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

/// Kolmogorov limiting survival function Q(t) = 2 sum (-1)^{k-1} exp(-2 k^2 t^2).
double kolmogorov_survival(double t);

}  // namespace mmm
