#ifndef SEEDSTABLE_TESTS_T_ORACLE_HPP
#define SEEDSTABLE_TESTS_T_ORACLE_HPP

// Independent numeric-integration oracle for Student-t quantiles. Kept free
// of the library's incomplete-beta path on purpose.

#include <cmath>

namespace t_oracle {

inline double pdf(double t, int df) {
  const double nu = df;
  const double log_norm =
      std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * M_PI);
  return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(t * t / nu));
}

// CDF by composite Simpson quadrature of the density on [0, t].
inline double cdf(double t, int df) {
  const double sign = t < 0 ? -1.0 : 1.0;
  const double upper = std::fabs(t);
  const int intervals = 200000;  // even
  const double h = upper / intervals;
  double sum = pdf(0.0, df) + pdf(upper, df);
  for (int i = 1; i < intervals; ++i)
    sum += (i % 2 == 1 ? 4.0 : 2.0) * pdf(i * h, df);
  const double integral = sum * h / 3.0;
  return 0.5 + sign * integral;
}

// Quantile by bisection on the quadrature CDF.
inline double quantile(int df, double prob) {
  if (prob == 0.5) return 0.0;
  if (prob < 0.5) return -quantile(df, 1.0 - prob);
  double lo = 0.0, hi = 1.0;
  while (cdf(hi, df) < prob) hi *= 2.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid, df) < prob ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Normal-limit oracle for very large df (Acklam-style rational inverse
// normal CDF, accurate to ~1e-9).
inline double normal_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - plow) {
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace t_oracle

#endif
