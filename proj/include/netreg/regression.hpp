#pragma once

// Simple linear regression on scalar regressors, the overall-significance
// F-test, and a Gaussian-kernel local-linear smoother.

#include <span>
#include <vector>

namespace netreg {

struct RegressionFit {
  double intercept = 0.0;
  double slope = 0.0;
  int sample_size = 0;
  double regressor_mean = 0.0;
  double response_mean = 0.0;
};

struct TestReport {
  double f_value = 0.0;
  int df1 = 1;
  int df2 = 0;
  double critical_value = 0.0;
  double p_value = 1.0;
  bool reject = false;
  double level = 0.05;
};

struct CriticalValue {
  double critical_value;
  double p_value;
};

/// Ordinary least squares y = a + b z. Throws ArgumentError for mismatched
/// lengths and DegenerateDesignError for fewer than two points or zero
/// regressor variance.
RegressionFit fit_slr(std::span<const double> zs, std::span<const double> ys);

double predict_slr(const RegressionFit& fit, double z) noexcept;

/// Fitted values a + b z_i for every regressor.
std::vector<double> fitted_values(const RegressionFit& fit, std::span<const double> zs);

/// (s - 2) * sum (fitted - ybar)^2 / sum (y - fitted)^2. A zero residual sum
/// gives +inf (or 0 when the fit also explains nothing). Throws ArgumentError
/// for s < 3 or mismatched lengths.
double f_statistic(std::span<const double> ys, std::span<const double> fitted);

/// Upper-`level` critical value of F(1, df2) and the p-value of `f`.
/// Non-finite f yields p = 0.
CriticalValue f_quantile_and_pvalue(double f, int df2, double level);

/// H0: slope = 0 against H1: slope != 0. Rejects iff F > critical value.
TestReport f_test(std::span<const double> zs, std::span<const double> ys, double level);

/// Local-linear estimate at `query` with Gaussian weights
/// exp(-(z - query)^2 / (2 bandwidth^2)). Throws ArgumentError for a
/// non-positive bandwidth, DegenerateDesignError when fewer than two points
/// carry non-zero weight or the weighted design is singular.
double fit_local_linear(std::span<const double> zs, std::span<const double> ys, double bandwidth,
                        double query);

/// 1 - RSS / TSS with the local-linear fit evaluated at every z_i.
double local_linear_r_squared(std::span<const double> zs, std::span<const double> ys,
                              double bandwidth);

/// Binomial standard error of a proportion estimated from `trials` draws.
double binomial_standard_error(double proportion, int trials) noexcept;

}  // namespace netreg
