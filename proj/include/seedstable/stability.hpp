#ifndef SEEDSTABLE_STABILITY_HPP
#define SEEDSTABLE_STABILITY_HPP

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace seedstable {

struct StabilityTarget {
  double epsilon = 0.0;  // > 0
  double delta = 0.0;    // in (0, 1]
};

struct StabilityReport {
  StabilityTarget target;
  double delta_hat = 0.0;
  double ratio = 0.0;
  long pair_count = 0;
};

// Variance level below which an unbagged bounded learner is certifiably
// (epsilon, delta)-stable on a k-point test set. Negative thresholds mean
// the certificate is vacuous for that (epsilon, delta, k).
inline std::pair<double, bool> lemma1_variance_threshold(const StabilityTarget& t, int k) {
  if (k < 1) throw std::invalid_argument("lemma1_variance_threshold: k >= 1 required");
  const double threshold =
      (t.epsilon / 4.0) * (t.epsilon / std::log(2.0 * k / t.delta) - 2.0 / 3.0);
  return {threshold, threshold > 0.0};
}

// Minimum bag count guaranteeing (epsilon, delta)-stability of the subbagged
// learner given a bound nu2 on the per-bag prediction variance.
inline long theorem1_min_bags(const StabilityTarget& t, int k, double nu2) {
  if (k < 1) throw std::invalid_argument("theorem1_min_bags: k >= 1 required");
  if (!(nu2 >= 0.0 && nu2 <= 0.25))
    throw std::invalid_argument("theorem1_min_bags: nu2 must lie in [0, 0.25]");
  const double bound = std::log(2.0 * k / t.delta) / (t.epsilon * t.epsilon) *
                       (4.0 * nu2 + (2.0 / 3.0) * t.epsilon);
  const long v = static_cast<long>(std::ceil(bound));
  return v < 1 ? 1 : v;
}

// Bag count for a Lipschitz scalar functional of p bagged nuisance
// predictions evaluated at the n training points.
inline long corollary1_min_bags(const StabilityTarget& t, long n, int p, double L,
                                double nu2) {
  if (n < 1 || p < 1) throw std::invalid_argument("corollary1_min_bags: n, p >= 1 required");
  if (!(L > 0.0)) throw std::invalid_argument("corollary1_min_bags: L must be positive");
  if (!(nu2 >= 0.0 && nu2 <= 0.25))
    throw std::invalid_argument("corollary1_min_bags: nu2 must lie in [0, 0.25]");
  const double eps_l = t.epsilon / L;
  const double bound = std::log(2.0 * static_cast<double>(n) * p / t.delta) /
                       (eps_l * eps_l) * (4.0 * nu2 + (2.0 / 3.0) * eps_l);
  const long v = static_cast<long>(std::ceil(bound));
  return v < 1 ? 1 : v;
}

// Fraction of unordered estimate pairs differing by strictly more than epsilon.
inline double empirical_delta(const Eigen::VectorXd& estimates, double epsilon) {
  const Eigen::Index s = estimates.size();
  if (s < 2) throw std::invalid_argument("empirical_delta: need at least 2 estimates");
  long exceed = 0;
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = i + 1; j < s; ++j)
      if (std::abs(estimates(i) - estimates(j)) > epsilon) ++exceed;
  const double pairs = 0.5 * static_cast<double>(s) * static_cast<double>(s - 1);
  return static_cast<double>(exceed) / pairs;
}

inline double stability_ratio(double delta_hat, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("stability_ratio: delta must be positive");
  return delta_hat / delta;
}

inline StabilityReport make_stability_report(const Eigen::VectorXd& estimates,
                                             const StabilityTarget& target) {
  StabilityReport r;
  r.target = target;
  r.delta_hat = empirical_delta(estimates, target.epsilon);
  r.ratio = stability_ratio(r.delta_hat, target.delta);
  r.pair_count = estimates.size() * (estimates.size() - 1) / 2;
  return r;
}

}  // namespace seedstable

#endif
