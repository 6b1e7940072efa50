#include "seedstable/student_t.hpp"

#include <cmath>
#include <stdexcept>

namespace seedstable {

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double beta_cf(double a, double b, double x) {
  constexpr double kTiny = 1e-30;
  constexpr int kMaxIter = 2000;
  constexpr double kEps = 1e-15;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete_beta: continued fraction failed to converge");
}

double t_pdf(double t, int df) {
  const double nu = static_cast<double>(df);
  const double log_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                          0.5 * std::log(nu * M_PI);
  return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(t * t / nu));
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) throw std::invalid_argument("incomplete_beta: x outside [0,1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, int df) {
  if (df < 1) throw std::invalid_argument("student_t_cdf: df >= 1 required");
  const double nu = static_cast<double>(df);
  const double x = nu / (nu + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * nu, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double t_quantile(int df, double prob) {
  if (df < 1) throw std::invalid_argument("t_quantile: df >= 1 required");
  if (!(prob > 0.0 && prob < 1.0))
    throw std::invalid_argument("t_quantile: prob must lie in (0,1)");
  if (prob == 0.5) return 0.0;
  if (prob < 0.5) return -t_quantile(df, 1.0 - prob);

  // Bracket the root, then safeguarded Newton on the monotone CDF.
  double lo = 0.0;
  double hi = 1.0;
  while (student_t_cdf(hi, df) < prob) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw std::runtime_error("t_quantile: bracketing failed");
  }
  double t = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = student_t_cdf(t, df) - prob;
    if (f > 0.0)
      hi = t;
    else
      lo = t;
    const double deriv = t_pdf(t, df);
    double step = deriv > 0.0 ? f / deriv : 0.0;
    double next = t - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - t) < 1e-12 * (1.0 + std::fabs(next))) return next;
    t = next;
  }
  return t;
}

}  // namespace seedstable
