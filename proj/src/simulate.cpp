#include "seedstable/simulate.hpp"

#include <cmath>
#include <stdexcept>

namespace seedstable {

namespace {

inline double expit(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double normal_pdf(double w, double mean, double sd) {
  const double z = (w - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

inline double positive_part(double v) { return v > 0.0 ? v : 0.0; }

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Equicorrelated Gaussian block via the closed-form square root of
// (1-r) I + r J: alpha I + beta J with alpha = sqrt(1-r) and
// beta = (sqrt(1+(k-1)r) - sqrt(1-r)) / k. Platform-stable.
void fill_equicorrelated(Rng& rng, double corr, double mean, int k, double* out) {
  const double alpha = std::sqrt(1.0 - corr);
  const double beta = (std::sqrt(1.0 + (k - 1) * corr) - alpha) / k;
  double z[16];
  double zsum = 0.0;
  for (int j = 0; j < k; ++j) {
    z[j] = rng.normal();
    zsum += z[j];
  }
  for (int j = 0; j < k; ++j) out[j] = mean + alpha * z[j] + beta * zsum;
}

}  // namespace

double dgp_a_logit(const Eigen::Ref<const Vector>& w) {
  if (w.size() != 20) throw std::invalid_argument("dgp_a_logit: expected 20 features");
  const auto W = [&](int j) { return w(j - 1); };
  double logit = -0.5;
  logit += 0.5 * W(1) - 0.3 * W(2) * W(2) + std::sin(M_PI / 2.0 * W(3)) +
           0.4 * positive_part(W(4)) - 0.6 * std::abs(W(5));
  logit += 0.2 * W(6) + 5.0 * normal_pdf(W(7), 1.0, 0.5) - 0.3 * W(8);
  logit += 0.5 * sign(W(9)) * std::log(std::abs(W(9)) + 1.0) - 0.15 * W(10);
  logit += 0.8 * (W(11) > 1.0 ? W(11) : 0.0) - 0.04 * W(13) * W(13) * W(13);
  logit += 0.3 * std::sqrt(positive_part(W(16))) - 0.6 * std::cos(W(18)) + 0.2 * W(20);
  logit += 0.5 * W(1) * W(6) - 0.4 * W(2) * W(3);
  logit += 0.6 * W(4) * (W(7) > 0.5 ? 1.0 : 0.0) - 0.3 * W(5) * std::sin(W(18));
  logit += 0.7 * W(11) * W(16) / (1.0 + std::abs(W(11)));
  logit += -0.5 * (W(8) > 0.0 ? 1.0 : 0.0) * (W(13) > 0.0 ? 1.0 : 0.0);
  logit += 0.4 * W(1) * W(7) * (W(20) > 0.0 ? 1.0 : 0.0);
  return logit;
}

DgpSample gen_dgp_a(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_dgp_a: n >= 1 required");
  DgpSample sample;
  sample.dataset.features.resize(n, 20);
  sample.dataset.outcome.resize(n);
  Vector truth(n);
  for (int i = 0; i < n; ++i) {
    // One counter-derived stream per row; any prefix of rows is stable.
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    double w[20];
    fill_equicorrelated(rng, 0.3, 0.0, 5, w);
    fill_equicorrelated(rng, 0.2, 1.0, 5, w + 5);
    for (int j = 10; j < 15; ++j) w[j] = rng.normal(0.0, 1.5);
    w[15] = rng.gamma(2.0, 1.0);
    w[16] = 4.0 * (rng.beta(2.0, 5.0) - 1.0);
    w[17] = rng.normal(0.0, 2.0);  // variance 4
    w[18] = rng.student_t(5.0);
    w[19] = rng.uniform(-2.0, 2.0);
    for (int j = 0; j < 20; ++j) sample.dataset.features(i, j) = w[j];
    const double p = expit(dgp_a_logit(sample.dataset.features.row(i).transpose()));
    truth(i) = p;
    sample.dataset.outcome(i) = rng.bernoulli(p) ? 1.0 : 0.0;
  }
  sample.true_probability = std::move(truth);
  return sample;
}

DgpSample gen_dgp_b(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_dgp_b: n >= 1 required");
  DgpSample sample;
  sample.dataset.features.resize(n, 4);
  sample.dataset.outcome.resize(n);
  Vector treatment(n);
  Vector propensity(n);
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const double w1 = rng.uniform(0.0, 2.0);
    const double w2 = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const double w3 = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const double w4 = rng.bernoulli(0.5) ? 1.0 : 0.0;
    sample.dataset.features.row(i) << w1, w2, w3, w4;
    const double pa = expit(w1 + w2 * w3 - 2.0 * w4);
    propensity(i) = pa;
    treatment(i) = rng.bernoulli(pa) ? 1.0 : 0.0;
    const double py = expit(w1 + w2 * w3 - 3.0);
    sample.dataset.outcome(i) = rng.bernoulli(py) ? 1.0 : 0.0;
  }
  sample.dataset.treatment = std::move(treatment);
  sample.true_propensity = std::move(propensity);
  sample.true_ate = 0.0;
  return sample;
}

}  // namespace seedstable
