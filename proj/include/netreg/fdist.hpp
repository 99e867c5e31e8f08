#pragma once

namespace netreg {

/// Regularized incomplete beta I_x(a, b), by the continued fraction
/// (modified Lentz), using the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) where
/// it converges faster. Requires a, b > 0 and x in [0, 1].
double regularized_incomplete_beta(double x, double a, double b);

/// CDF of the F(df1, df2) distribution.
double f_cdf(double x, double df1, double df2);

/// Upper tail 1 - CDF, evaluated directly to avoid cancellation.
double f_survival(double x, double df1, double df2);

/// x with CDF(x) = p, by bisection to 1e-10 (relative to max(1, x)).
double f_quantile(double p, double df1, double df2);

}  // namespace netreg
