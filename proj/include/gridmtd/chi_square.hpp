#pragma once

namespace gridmtd {

/// Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0.
double regularized_gamma_p(double a, double x);

double chi_square_cdf(double x, double dof);

/// Inverse CDF by bracketed bisection on P(dof/2, x/2), absolute
/// tolerance 1e-10 in x. probability must be in [0, 1).
double chi_square_quantile(double probability, double dof);

}  // namespace gridmtd
