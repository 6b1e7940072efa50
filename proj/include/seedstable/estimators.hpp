#ifndef SEEDSTABLE_ESTIMATORS_HPP
#define SEEDSTABLE_ESTIMATORS_HPP

#include <functional>
#include <vector>

#include "seedstable/core.hpp"
#include "seedstable/learners.hpp"

namespace seedstable {

// AIPW nuisances: propensity and the two outcome regressions, all length n.
struct NuisancePredictions {
  Vector pi;
  Vector mu1;
  Vector mu0;
  double clip = 0.01;
};

Vector clip_propensity(const Vector& pi, double c);

// Augmented inverse probability weighting estimate of the ATE; fixed row
// order accumulation.
double aipw_ate(const Dataset& data, const NuisancePredictions& eta);

// Partials of aipw_ate with respect to (pi, mu1, mu0), stacked as a length-3n
// vector in that nuisance order. Certified against finite differences.
Vector aipw_gradient(const Dataset& data, const NuisancePredictions& eta);

// Sup-norm Lipschitz constant of the AIPW map over clipped nuisances.
double aipw_lipschitz_bound(double c);

// Generic scalar estimator over an n x p matrix of nuisance predictions
// (columns in the handle's fixed nuisance order). Handles do their own
// clipping; the gradient is the a.e. derivative of value.
struct EstimatorHandle {
  int nuisance_count = 0;
  std::function<double(const Dataset&, const Matrix&)> value;
  std::function<Matrix(const Dataset&, const Matrix&)> gradient;  // n x p
};

// AIPW handle with nuisance columns (pi, mu1, mu0).
EstimatorHandle aipw_handle(double clip);

constexpr int kLooFolds = -1;

// V-fold (or leave-one-out when folds == kLooFolds) cross-fitted AIPW.
// One seed drives fold assignment and all learner training.
double crossfit_aipw(const LearnerSpec& pi_spec, const LearnerSpec& mu1_spec,
                     const LearnerSpec& mu0_spec, const Dataset& data, int folds,
                     std::uint64_t seed, double clip);

enum class AverageMode { mean, median };

double average_over_seeds(const std::function<double(std::uint64_t)>& run,
                          const std::vector<std::uint64_t>& seeds,
                          AverageMode mode = AverageMode::mean);

}  // namespace seedstable

#endif
