#include "seedstable/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace seedstable {

Vector clip_propensity(const Vector& pi, double c) {
  if (!(c > 0.0 && c < 0.5))
    throw std::invalid_argument("clip_propensity: c must lie in (0, 0.5)");
  return pi.array().max(c).min(1.0 - c).matrix();
}

namespace {

void check_eta(const Dataset& data, const NuisancePredictions& eta) {
  if (!data.treatment)
    throw std::invalid_argument("aipw: dataset has no treatment column");
  const Eigen::Index n = data.rows();
  if (eta.pi.size() != n || eta.mu1.size() != n || eta.mu0.size() != n)
    throw std::invalid_argument("aipw: nuisance length mismatch");
}

}  // namespace

double aipw_ate(const Dataset& data, const NuisancePredictions& eta) {
  check_eta(data, eta);
  const Eigen::Index n = data.rows();
  const Vector& a = *data.treatment;
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu_a = a(i) == 1.0 ? eta.mu1(i) : eta.mu0(i);
    const double w = a(i) / eta.pi(i) - (1.0 - a(i)) / (1.0 - eta.pi(i));
    s += w * (data.outcome(i) - mu_a) + eta.mu1(i) - eta.mu0(i);
  }
  return s / static_cast<double>(n);
}

Vector aipw_gradient(const Dataset& data, const NuisancePredictions& eta) {
  check_eta(data, eta);
  const Eigen::Index n = data.rows();
  const Vector& a = *data.treatment;
  Vector grad(3 * n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pi = eta.pi(i);
    const double y = data.outcome(i);
    if (a(i) == 1.0) {
      grad(i) = -inv_n * (y - eta.mu1(i)) / (pi * pi);
      grad(n + i) = inv_n * (1.0 - 1.0 / pi);
      grad(2 * n + i) = -inv_n;
    } else {
      grad(i) = -inv_n * (y - eta.mu0(i)) / ((1.0 - pi) * (1.0 - pi));
      grad(n + i) = inv_n;
      grad(2 * n + i) = inv_n * (1.0 / (1.0 - pi) - 1.0);
    }
  }
  return grad;
}

double aipw_lipschitz_bound(double c) {
  if (!(c > 0.0 && c < 0.5))
    throw std::invalid_argument("aipw_lipschitz_bound: c must lie in (0, 0.5)");
  return 1.0 / (c * c) + 2.0 * (1.0 / c - 1.0);
}

EstimatorHandle aipw_handle(double clip) {
  if (!(clip > 0.0 && clip < 0.5))
    throw std::invalid_argument("aipw_handle: clip must lie in (0, 0.5)");
  EstimatorHandle handle;
  handle.nuisance_count = 3;
  handle.value = [clip](const Dataset& data, const Matrix& eta_raw) {
    NuisancePredictions eta{clip_propensity(eta_raw.col(0), clip), eta_raw.col(1),
                            eta_raw.col(2), clip};
    return aipw_ate(data, eta);
  };
  handle.gradient = [clip](const Dataset& data, const Matrix& eta_raw) {
    NuisancePredictions eta{clip_propensity(eta_raw.col(0), clip), eta_raw.col(1),
                            eta_raw.col(2), clip};
    const Eigen::Index n = data.rows();
    Vector flat = aipw_gradient(data, eta);
    Matrix grad(n, 3);
    grad.col(0) = flat.head(n);
    grad.col(1) = flat.segment(n, n);
    grad.col(2) = flat.tail(n);
    // The clip is flat outside (c, 1-c): those propensity partials vanish.
    for (Eigen::Index i = 0; i < n; ++i)
      if (eta_raw(i, 0) <= clip || eta_raw(i, 0) >= 1.0 - clip) grad(i, 0) = 0.0;
    return grad;
  };
  return handle;
}

double crossfit_aipw(const LearnerSpec& pi_spec, const LearnerSpec& mu1_spec,
                     const LearnerSpec& mu0_spec, const Dataset& data, int folds,
                     std::uint64_t seed, double clip) {
  data.validate();
  if (!data.treatment)
    throw std::invalid_argument("crossfit_aipw: dataset has no treatment column");
  const int n = static_cast<int>(data.rows());
  const bool loo = folds == kLooFolds || folds == n;
  if (!loo && (folds < 2 || folds > n))
    throw std::invalid_argument("crossfit_aipw: folds must lie in [2, n] or be LOO");
  const int nfolds = loo ? n : folds;

  // LOO has no assignment randomness; otherwise a seeded balanced shuffle.
  std::vector<int> fold_of(n);
  if (loo) {
    std::iota(fold_of.begin(), fold_of.end(), 0);
  } else {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, 0));
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
      std::swap(perm[i], perm[j]);
    }
    for (int i = 0; i < n; ++i) fold_of[perm[i]] = i % nfolds;
  }

  const Vector& a = *data.treatment;
  NuisancePredictions eta;
  eta.pi.resize(n);
  eta.mu1.resize(n);
  eta.mu0.resize(n);
  eta.clip = clip;

  for (int f = 0; f < nfolds; ++f) {
    std::vector<int> train, treated, control, held;
    for (int i = 0; i < n; ++i) {
      if (fold_of[i] == f) {
        held.push_back(i);
      } else {
        train.push_back(i);
        (a(i) == 1.0 ? treated : control).push_back(i);
      }
    }
    if (treated.empty() || control.empty())
      throw std::runtime_error("crossfit_aipw: fold " + std::to_string(f) +
                               " training split lacks a treatment arm");
    const FittedModel pi_model =
        fit(pi_spec, data, a, train, derive_seed(seed, 1 + 3 * static_cast<std::uint64_t>(f)));
    const FittedModel mu1_model = fit(mu1_spec, data, data.outcome, treated,
                                      derive_seed(seed, 2 + 3 * static_cast<std::uint64_t>(f)));
    const FittedModel mu0_model = fit(mu0_spec, data, data.outcome, control,
                                      derive_seed(seed, 3 + 3 * static_cast<std::uint64_t>(f)));
    for (int i : held) {
      eta.pi(i) = predict(pi_model, data.features.row(i).transpose());
      eta.mu1(i) = predict(mu1_model, data.features.row(i).transpose());
      eta.mu0(i) = predict(mu0_model, data.features.row(i).transpose());
    }
  }
  eta.pi = clip_propensity(eta.pi, clip);
  return aipw_ate(data, eta);
}

double average_over_seeds(const std::function<double(std::uint64_t)>& run,
                          const std::vector<std::uint64_t>& seeds, AverageMode mode) {
  if (seeds.empty()) throw std::invalid_argument("average_over_seeds: empty seed list");
  std::vector<double> estimates;
  estimates.reserve(seeds.size());
  for (std::uint64_t s : seeds) estimates.push_back(run(s));
  if (mode == AverageMode::mean)
    return std::accumulate(estimates.begin(), estimates.end(), 0.0) /
           static_cast<double>(estimates.size());
  std::sort(estimates.begin(), estimates.end());
  const std::size_t mid = estimates.size() / 2;
  return estimates.size() % 2 == 1 ? estimates[mid]
                                   : 0.5 * (estimates[mid - 1] + estimates[mid]);
}

}  // namespace seedstable
