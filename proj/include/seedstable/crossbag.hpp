#ifndef SEEDSTABLE_CROSSBAG_HPP
#define SEEDSTABLE_CROSSBAG_HPP

#include <cstdint>
#include <vector>

#include "seedstable/bagging.hpp"
#include "seedstable/core.hpp"
#include "seedstable/estimators.hpp"
#include "seedstable/learners.hpp"
#include "seedstable/stability.hpp"

namespace seedstable {

// Bag plan plus out-of-bag bookkeeping: oob_rows[v] are the rows not in bag
// v (ascending), counts(i) is the number of bags row i is out of.
struct OobPlan {
  BagPlan plan;
  int n = 0;
  std::vector<std::vector<int>> oob_rows;
  Eigen::VectorXi counts;
  int target_oob = 0;

  int bag_count() const { return static_cast<int>(plan.pairs.size()); }
};

inline constexpr int kMaxOobBags = 1000000;

// Draw bags until every row is out of bag at least target_oob times.
OobPlan build_oob_plan(std::uint64_t master_seed, int n, double rho, int target_oob);

// OOB bookkeeping for an externally fixed bag count.
OobPlan make_oob_plan(const BagPlan& plan, int n);

// Append bags until min counts reaches target_oob.
void extend_oob_plan(OobPlan& oob, int target_oob);

// One nuisance to cross-bag: which rows are eligible for training and what
// target to regress on (full-length vector).
struct NuisanceSpec {
  LearnerSpec learner;
  Vector target;
  std::vector<int> eligible_rows;  // empty means all rows
};

NuisanceSpec aipw_pi_nuisance(const Dataset& data, const LearnerSpec& learner);
NuisanceSpec aipw_mu1_nuisance(const Dataset& data, const LearnerSpec& learner);
NuisanceSpec aipw_mu0_nuisance(const Dataset& data, const LearnerSpec& learner);
std::vector<NuisanceSpec> aipw_nuisances(const Dataset& data, const LearnerSpec& learner);

// Raw per-bag OOB predictions: raw[v][l][j] is nuisance l's bag-v model
// evaluated at oob_rows[v][j]. The cache is what makes incremental
// extension and tau_squared cheap.
struct RawOobPredictions {
  std::vector<std::vector<std::vector<double>>> raw;
};

// Pooled per-row OOB averages, one column per nuisance (n x p).
struct PooledPredictions {
  Matrix pooled;
};

// Fit nuisance models for bags [first_bag, bag_count) and append their OOB
// predictions to the cache.
void fit_oob_models(const std::vector<NuisanceSpec>& specs, const Dataset& data,
                    const OobPlan& oob, RawOobPredictions& cache, int first_bag,
                    int workers);

// Pool the cached raw predictions in bag order; summation order is fixed so
// incremental extension reproduces a from-scratch pooling bit for bit.
PooledPredictions pool_oob(const RawOobPredictions& cache, const OobPlan& oob, int p);

// Monte Carlo variance of the cross-bagged estimator over seed-and-bag pairs
// (prefactor uses the total bag count V-dagger).
double tau_squared(const Matrix& gradient, const RawOobPredictions& cache,
                   const PooledPredictions& pooled, const OobPlan& oob);

struct AdaptiveResult {
  double estimate = 0.0;
  double tau2_hat = 0.0;
  int v_dagger = 0;
  double halfwidth = 0.0;
  int rounds = 0;
  bool converged = false;
};

struct AdaptiveOptions {
  double rho = 0.5;
  int v0 = 50;
  double growth = 1.5;
  int max_rounds = 20;
  int workers = 1;
};

// Adaptive cross-bagging: grow the OOB target geometrically, recycling all
// previously fitted bag predictions, until the t-interval halfwidth
// t_{V-1, 1-delta/2} * sqrt(2 tau2 / V) drops to epsilon.
AdaptiveResult adaptive_crossbag(const std::vector<NuisanceSpec>& specs,
                                 const EstimatorHandle& estimator, const Dataset& data,
                                 const StabilityTarget& target, std::uint64_t master_seed,
                                 const AdaptiveOptions& options);

// Single-shot cross-bagging at a fixed OOB plan: pool, clip via the handle,
// evaluate. Exposed for calibration studies and the CLI.
double crossbag_estimate(const std::vector<NuisanceSpec>& specs,
                         const EstimatorHandle& estimator, const Dataset& data,
                         const OobPlan& oob, int workers, double* tau2_out = nullptr);

}  // namespace seedstable

#endif
