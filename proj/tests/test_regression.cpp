#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "netreg/error.hpp"
#include "netreg/fdist.hpp"
#include "netreg/regression.hpp"
#include "netreg/rng.hpp"

using namespace netreg;

TEST_CASE("least squares on a hand fixture") {
  // z = (1,2,3), y = (2,4,7): Sxx = 2, Sxy = 5, slope 2.5, intercept -2/3.
  const std::vector<double> z = {1, 2, 3}, y = {2, 4, 7};
  const RegressionFit fit = fit_slr(z, y);
  CHECK(fit.slope == doctest::Approx(2.5));
  CHECK(fit.intercept == doctest::Approx(-2.0 / 3.0));
  CHECK(fit.sample_size == 3);
  CHECK(predict_slr(fit, 4.0) == doctest::Approx(-2.0 / 3.0 + 10.0));

  // SSR = 12.5, SSE = 1/6, F = (3 - 2) * 12.5 / (1/6) = 75.
  CHECK(f_statistic(y, fitted_values(fit, z)) == doctest::Approx(75.0));
}

TEST_CASE("F statistic equals (s-2) R^2 / (1 - R^2)") {
  SplitMix64 rng(3);
  std::vector<double> z, y;
  for (int i = 0; i < 25; ++i) {
    z.push_back(rng.uniform());
    y.push_back(1.0 + 0.7 * z.back() + rng.normal(0.0, 0.3));
  }
  const RegressionFit fit = fit_slr(z, y);
  double szz = 0, syy = 0, szy = 0;
  const double zbar = fit.regressor_mean, ybar = fit.response_mean;
  for (std::size_t i = 0; i < z.size(); ++i) {
    szz += (z[i] - zbar) * (z[i] - zbar);
    syy += (y[i] - ybar) * (y[i] - ybar);
    szy += (z[i] - zbar) * (y[i] - ybar);
  }
  const double r2 = szy * szy / (szz * syy);
  CHECK(f_statistic(y, fitted_values(fit, z)) == doctest::Approx(23.0 * r2 / (1.0 - r2)).epsilon(1e-10));
}

TEST_CASE("degenerate designs are rejected") {
  const std::vector<double> one = {1.0};
  CHECK_THROWS_AS(fit_slr(one, one), DegenerateDesignError);
  const std::vector<double> flat = {2.0, 2.0, 2.0}, y = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(fit_slr(flat, y), DegenerateDesignError);
  const std::vector<double> short_y = {1.0, 2.0};
  CHECK_THROWS_AS(fit_slr(y, short_y), ArgumentError);
  CHECK_THROWS_AS(f_statistic(short_y, short_y), ArgumentError);
}

TEST_CASE("a perfect fit gives an infinite statistic and p = 0") {
  const std::vector<double> z = {0, 1, 2, 3}, y = {1, 3, 5, 7};
  const TestReport r = f_test(z, y, 0.05);
  CHECK(std::isinf(r.f_value));
  CHECK(r.p_value == 0.0);
  CHECK(r.reject);
  const std::vector<double> flat = {4, 4, 4, 4};
  CHECK(f_statistic(flat, flat) == 0.0);
}

TEST_CASE("incomplete beta and F distribution match Boost") {
  for (double a : {0.5, 1.0, 2.5, 15.0})
    for (double b : {0.5, 1.5, 4.0, 40.0})
      for (double x : {0.01, 0.2, 0.5, 0.77, 0.999})
        CHECK(regularized_incomplete_beta(x, a, b) ==
              doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-11));

  for (double df2 : {1.0, 3.0, 10.0, 28.0, 200.0}) {
    const boost::math::fisher_f dist(1.0, df2);
    for (double x : {0.01, 0.5, 1.0, 4.0, 30.0}) {
      CHECK(f_cdf(x, 1.0, df2) == doctest::Approx(boost::math::cdf(dist, x)).epsilon(1e-11));
      CHECK(f_survival(x, 1.0, df2) ==
            doctest::Approx(boost::math::cdf(boost::math::complement(dist, x))).epsilon(1e-10));
    }
    for (double p : {0.5, 0.9, 0.95, 0.99})
      CHECK(f_quantile(p, 1.0, df2) == doctest::Approx(boost::math::quantile(dist, p)).epsilon(1e-9));
  }
  const boost::math::fisher_f other(4.0, 7.0);
  CHECK(f_quantile(0.95, 4.0, 7.0) == doctest::Approx(boost::math::quantile(other, 0.95)).epsilon(1e-9));
}

TEST_CASE("F(1,3) upper 5% point equals the squared t(3) quantile") {
  auto t3_cdf = [](double x) {
    const double u = x / std::sqrt(3.0);
    return 0.5 + (u / (1.0 + u * u) + std::atan(u)) / std::numbers::pi;
  };
  double lo = 0.0, hi = 20.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (t3_cdf(mid) < 0.975 ? lo : hi) = mid;
  }
  const CriticalValue cv = f_quantile_and_pvalue(10.128, 3, 0.05);
  CHECK(cv.critical_value == doctest::Approx(lo * lo).epsilon(1e-9));
  CHECK(cv.critical_value == doctest::Approx(10.128).epsilon(1e-4));
  CHECK(cv.p_value == doctest::Approx(0.05).epsilon(1e-4));
}

TEST_CASE("distribution argument checks") {
  CHECK_THROWS_AS(f_quantile(1.0, 1.0, 3.0), RangeError);
  CHECK_THROWS_AS(f_cdf(1.0, 0.0, 3.0), ArgumentError);
  CHECK_THROWS_AS(regularized_incomplete_beta(1.5, 1.0, 1.0), ArgumentError);
  CHECK_THROWS_AS(f_quantile_and_pvalue(1.0, 3, 1.5), RangeError);
  CHECK(f_cdf(0.0, 1.0, 3.0) == 0.0);
  CHECK(f_survival(std::numeric_limits<double>::infinity(), 1.0, 3.0) == 0.0);
}

TEST_CASE("test level calibration under the null") {
  SplitMix64 rng(17);
  int rejections = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> z, y;
    for (int i = 0; i < 10; ++i) {
      z.push_back(rng.uniform());
      y.push_back(rng.normal());
    }
    rejections += f_test(z, y, 0.05).reject ? 1 : 0;
  }
  // Binomial(1000, 0.05): mean 50, sd about 6.9.
  CHECK(rejections > 25);
  CHECK(rejections < 75);
}

TEST_CASE("local-linear smoother") {
  const std::vector<double> z = {0.0, 0.1, 0.25, 0.4, 0.7, 1.0};
  std::vector<double> line;
  for (double v : z) line.push_back(3.0 - 2.0 * v);
  for (double q : {0.0, 0.33, 0.9}) CHECK(fit_local_linear(z, line, 0.2, q) == doctest::Approx(3.0 - 2.0 * q));
  CHECK(local_linear_r_squared(z, line, 0.2) == doctest::Approx(1.0));

  // Oracle: weighted least squares solved directly.
  const std::vector<double> y = {1.0, 1.4, 0.9, 2.2, 2.0, 3.1};
  const double q = 0.5, h = 0.3;
  Eigen::MatrixXd x(6, 2);
  Eigen::VectorXd w(6), yy(6);
  for (int i = 0; i < 6; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = z[i] - q;
    w(i) = std::exp(-0.5 * std::pow((z[i] - q) / h, 2));
    yy(i) = y[i];
  }
  const Eigen::Vector2d beta = (x.transpose() * w.asDiagonal() * x).ldlt().solve(x.transpose() * w.asDiagonal() * yy);
  CHECK(fit_local_linear(z, y, h, q) == doctest::Approx(beta(0)).epsilon(1e-12));

  CHECK_THROWS_AS(fit_local_linear(z, y, 1e-6, 0.5), DegenerateDesignError);
  CHECK_THROWS_AS(fit_local_linear(z, y, 0.0, 0.5), ArgumentError);
}

TEST_CASE("binomial standard error") {
  CHECK(binomial_standard_error(0.5, 100) == doctest::Approx(0.05));
  CHECK(binomial_standard_error(1.0, 10) == 0.0);
  CHECK(std::isnan(binomial_standard_error(0.5, 0)));
}
