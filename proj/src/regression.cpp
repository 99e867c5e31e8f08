#include "netreg/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "netreg/error.hpp"
#include "netreg/fdist.hpp"

namespace netreg {
namespace {

double mean(std::span<const double> v) {
  double total = 0.0;
  for (double x : v) total += x;
  return total / static_cast<double>(v.size());
}

void check_lengths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ArgumentError("length mismatch: " + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()));
}

}  // namespace

RegressionFit fit_slr(std::span<const double> zs, std::span<const double> ys) {
  check_lengths(zs, ys);
  if (zs.size() < 2)
    throw DegenerateDesignError("simple linear regression needs at least two points, got " +
                                std::to_string(zs.size()));
  for (std::size_t i = 0; i < zs.size(); ++i)
    if (!std::isfinite(zs[i]) || !std::isfinite(ys[i]))
      throw ArgumentError("regression inputs must be finite");

  RegressionFit fit;
  fit.sample_size = static_cast<int>(zs.size());
  fit.regressor_mean = mean(zs);
  fit.response_mean = mean(ys);
  double sxx = 0.0;
  double sxy = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double dz = zs[i] - fit.regressor_mean;
    sxx += dz * dz;
    sxy += dz * (ys[i] - fit.response_mean);
    scale = std::max(scale, std::abs(zs[i]));
  }
  const double floor = static_cast<double>(zs.size()) *
                       std::pow(std::numeric_limits<double>::epsilon() * scale, 2);
  if (!(sxx > floor))
    throw DegenerateDesignError("regressors have no variance; the slope is not identifiable");
  fit.slope = sxy / sxx;
  fit.intercept = fit.response_mean - fit.slope * fit.regressor_mean;
  return fit;
}

double predict_slr(const RegressionFit& fit, double z) noexcept {
  return fit.intercept + fit.slope * z;
}

std::vector<double> fitted_values(const RegressionFit& fit, std::span<const double> zs) {
  std::vector<double> out;
  out.reserve(zs.size());
  for (double z : zs) out.push_back(predict_slr(fit, z));
  return out;
}

double f_statistic(std::span<const double> ys, std::span<const double> fitted) {
  check_lengths(ys, fitted);
  if (ys.size() < 3) throw ArgumentError("the F statistic needs at least three observations");
  const double ybar = mean(ys);
  double explained = 0.0;
  double residual = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    explained += (fitted[i] - ybar) * (fitted[i] - ybar);
    residual += (ys[i] - fitted[i]) * (ys[i] - fitted[i]);
  }
  if (residual == 0.0) return explained > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return static_cast<double>(ys.size() - 2) * explained / residual;
}

CriticalValue f_quantile_and_pvalue(double f, int df2, double level) {
  if (df2 < 1) throw ArgumentError("df2 must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw RangeError("test level must lie in (0, 1)");
  CriticalValue out;
  out.critical_value = f_quantile(1.0 - level, 1.0, static_cast<double>(df2));
  if (!std::isfinite(f))
    out.p_value = 0.0;
  else
    out.p_value = std::clamp(f_survival(f, 1.0, static_cast<double>(df2)), 0.0, 1.0);
  return out;
}

TestReport f_test(std::span<const double> zs, std::span<const double> ys, double level) {
  check_lengths(zs, ys);
  if (zs.size() < 3) throw ArgumentError("the F test needs at least three observations");
  const RegressionFit fit = fit_slr(zs, ys);
  const std::vector<double> fitted = fitted_values(fit, zs);
  TestReport report;
  report.f_value = f_statistic(ys, fitted);
  report.df2 = static_cast<int>(zs.size()) - 2;
  report.level = level;
  const CriticalValue cv = f_quantile_and_pvalue(report.f_value, report.df2, level);
  report.critical_value = cv.critical_value;
  report.p_value = cv.p_value;
  report.reject = report.f_value > report.critical_value;
  return report;
}

double fit_local_linear(std::span<const double> zs, std::span<const double> ys, double bandwidth,
                        double query) {
  check_lengths(zs, ys);
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw ArgumentError("bandwidth must be positive and finite");
  if (zs.empty()) throw DegenerateDesignError("local-linear fit needs data");

  // Weights are shifted by the largest exponent so the nearest point has
  // weight one; "non-zero" therefore means "not underflowed relative to it".
  std::vector<double> exponent(zs.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double u = (zs[i] - query) / bandwidth;
    exponent[i] = -0.5 * u * u;
    top = std::max(top, exponent[i]);
  }
  double sw = 0.0, swz = 0.0, swy = 0.0;
  int support = 0;
  std::vector<double> w(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) {
    w[i] = std::exp(exponent[i] - top);
    if (w[i] > 0.0) ++support;
    sw += w[i];
    swz += w[i] * zs[i];
    swy += w[i] * ys[i];
  }
  if (support < 2)
    throw DegenerateDesignError("bandwidth too small: fewer than two points carry kernel weight");
  const double zbar = swz / sw;
  const double ybar = swy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    sxx += w[i] * (zs[i] - zbar) * (zs[i] - zbar);
    sxy += w[i] * (zs[i] - zbar) * (ys[i] - ybar);
  }
  if (!(sxx > 0.0))
    throw DegenerateDesignError("bandwidth too small: weighted regressors have no spread");
  return ybar + (sxy / sxx) * (query - zbar);
}

double local_linear_r_squared(std::span<const double> zs, std::span<const double> ys,
                              double bandwidth) {
  check_lengths(zs, ys);
  const double ybar = mean(ys);
  double rss = 0.0, tss = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double fit = fit_local_linear(zs, ys, bandwidth, zs[i]);
    rss += (ys[i] - fit) * (ys[i] - fit);
    tss += (ys[i] - ybar) * (ys[i] - ybar);
  }
  if (!(tss > 0.0)) throw DegenerateDesignError("responses have no variance");
  return 1.0 - rss / tss;
}

double binomial_standard_error(double proportion, int trials) noexcept {
  if (trials <= 0) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(std::max(0.0, proportion * (1.0 - proportion)) / trials);
}

}  // namespace netreg
