#include "netreg/fdist.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "netreg/error.hpp"

namespace netreg {
namespace {

constexpr double kTiny = 1e-300;
constexpr double kEpsilon = 1e-16;
constexpr int kMaxTerms = 10000;

// Continued fraction for I_x(a,b) * B(a,b) / (x^a (1-x)^b), valid for
// x < (a+1)/(a+b+2).
double beta_continued_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxTerms; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEpsilon) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

double log_front_factor(double x, double a, double b) {
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
         b * std::log1p(-x);
}

void check_df(double df1, double df2) {
  if (!(df1 > 0.0) || !(df2 > 0.0))
    throw ArgumentError("F distribution degrees of freedom must be positive");
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw ArgumentError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(log_front_factor(x, a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double f_cdf(double x, double df1, double df2) {
  check_df(df1, df2);
  if (std::isnan(x)) throw ArgumentError("F CDF of NaN");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return regularized_incomplete_beta(df1 * x / (df1 * x + df2), df1 / 2.0, df2 / 2.0);
}

double f_survival(double x, double df1, double df2) {
  check_df(df1, df2);
  if (std::isnan(x)) throw ArgumentError("F survival of NaN");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  // 1 - I_u(a, b) = I_{1-u}(b, a) with 1-u = df2 / (df1 x + df2).
  return regularized_incomplete_beta(df2 / (df1 * x + df2), df2 / 2.0, df1 / 2.0);
}

double f_quantile(double p, double df1, double df2) {
  check_df(df1, df2);
  if (!(p >= 0.0 && p < 1.0))
    throw RangeError("F quantile probability must lie in [0, 1), got " + std::to_string(p));
  if (p == 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (f_cdf(hi, df1, df2) < p) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericalError("F quantile bracket overflow");
  }
  while (hi - lo > 1e-10 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f_cdf(mid, df1, df2) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace netreg
