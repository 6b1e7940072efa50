#include "seedstable/crossbag.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seedstable/parallel.hpp"
#include "seedstable/student_t.hpp"

namespace seedstable {

namespace {

std::vector<int> complement_rows(const std::vector<int>& bag, int n) {
  std::vector<int> out;
  out.reserve(n - static_cast<int>(bag.size()));
  std::size_t k = 0;
  for (int i = 0; i < n; ++i) {
    if (k < bag.size() && bag[k] == i) {
      ++k;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

void append_bag_bookkeeping(OobPlan& oob, int first_bag) {
  for (int v = first_bag; v < oob.bag_count(); ++v) {
    oob.oob_rows.push_back(complement_rows(oob.plan.pairs[v].indices, oob.n));
    for (int i : oob.oob_rows.back()) ++oob.counts(i);
  }
}

}  // namespace

OobPlan build_oob_plan(std::uint64_t master_seed, int n, double rho, int target_oob) {
  if (target_oob < 1) throw std::invalid_argument("build_oob_plan: target_oob >= 1 required");
  OobPlan oob;
  oob.n = n;
  oob.plan = build_bag_plan(master_seed, n, rho, 1);
  oob.counts = Eigen::VectorXi::Zero(n);
  append_bag_bookkeeping(oob, 0);
  extend_oob_plan(oob, target_oob);
  return oob;
}

OobPlan make_oob_plan(const BagPlan& plan, int n) {
  OobPlan oob;
  oob.n = n;
  oob.plan = plan;
  oob.counts = Eigen::VectorXi::Zero(n);
  append_bag_bookkeeping(oob, 0);
  oob.target_oob = oob.counts.minCoeff();
  return oob;
}

void extend_oob_plan(OobPlan& oob, int target_oob) {
  while (oob.counts.minCoeff() < target_oob) {
    if (oob.bag_count() >= kMaxOobBags)
      throw std::runtime_error("extend_oob_plan: bag safety cap exceeded");
    const int prev = oob.bag_count();
    extend_bag_plan(oob.plan, oob.n, 1);
    append_bag_bookkeeping(oob, prev);
  }
  oob.target_oob = std::max(oob.target_oob, target_oob);
}

NuisanceSpec aipw_pi_nuisance(const Dataset& data, const LearnerSpec& learner) {
  if (!data.treatment) throw std::invalid_argument("aipw nuisance: no treatment column");
  return {learner, *data.treatment, {}};
}

NuisanceSpec aipw_mu1_nuisance(const Dataset& data, const LearnerSpec& learner) {
  if (!data.treatment) throw std::invalid_argument("aipw nuisance: no treatment column");
  NuisanceSpec spec{learner, data.outcome, {}};
  for (int i = 0; i < data.rows(); ++i)
    if ((*data.treatment)(i) == 1.0) spec.eligible_rows.push_back(i);
  return spec;
}

NuisanceSpec aipw_mu0_nuisance(const Dataset& data, const LearnerSpec& learner) {
  if (!data.treatment) throw std::invalid_argument("aipw nuisance: no treatment column");
  NuisanceSpec spec{learner, data.outcome, {}};
  for (int i = 0; i < data.rows(); ++i)
    if ((*data.treatment)(i) == 0.0) spec.eligible_rows.push_back(i);
  return spec;
}

std::vector<NuisanceSpec> aipw_nuisances(const Dataset& data, const LearnerSpec& learner) {
  return {aipw_pi_nuisance(data, learner), aipw_mu1_nuisance(data, learner),
          aipw_mu0_nuisance(data, learner)};
}

void fit_oob_models(const std::vector<NuisanceSpec>& specs, const Dataset& data,
                    const OobPlan& oob, RawOobPredictions& cache, int first_bag,
                    int workers) {
  const int p = static_cast<int>(specs.size());
  const int vmax = oob.bag_count();
  cache.raw.resize(vmax);
  parallel_for(vmax - first_bag, workers, [&](long k) {
    const int v = first_bag + static_cast<int>(k);
    const auto& pair = oob.plan.pairs[v];
    auto& per_bag = cache.raw[v];
    per_bag.assign(p, {});
    for (int l = 0; l < p; ++l) {
      std::vector<int> rows;
      if (specs[l].eligible_rows.empty()) {
        rows = pair.indices;
      } else {
        std::set_intersection(pair.indices.begin(), pair.indices.end(),
                              specs[l].eligible_rows.begin(), specs[l].eligible_rows.end(),
                              std::back_inserter(rows));
      }
      const FittedModel model =
          fit(specs[l].learner, data, specs[l].target, rows,
              derive_seed(pair.seed, static_cast<std::uint64_t>(l)));
      auto& preds = per_bag[l];
      preds.reserve(oob.oob_rows[v].size());
      for (int i : oob.oob_rows[v])
        preds.push_back(predict(model, data.features.row(i).transpose()));
    }
  });
}

PooledPredictions pool_oob(const RawOobPredictions& cache, const OobPlan& oob, int p) {
  if (oob.counts.minCoeff() < 1)
    throw std::runtime_error("pool_oob: a row has no out-of-bag predictions");
  PooledPredictions pooled;
  pooled.pooled = Matrix::Zero(oob.n, p);
  for (int v = 0; v < oob.bag_count(); ++v) {
    const auto& rows = oob.oob_rows[v];
    for (int l = 0; l < p; ++l) {
      const auto& preds = cache.raw[v][l];
      for (std::size_t j = 0; j < rows.size(); ++j) pooled.pooled(rows[j], l) += preds[j];
    }
  }
  for (int l = 0; l < p; ++l)
    pooled.pooled.col(l).array() /= oob.counts.cast<double>().array();
  return pooled;
}

double tau_squared(const Matrix& gradient, const RawOobPredictions& cache,
                   const PooledPredictions& pooled, const OobPlan& oob) {
  const int p = static_cast<int>(gradient.cols());
  const int v_dagger = oob.bag_count();
  if (!gradient.allFinite()) throw std::invalid_argument("tau_squared: non-finite gradient");
  double total = 0.0;
  for (int v = 0; v < v_dagger; ++v) {
    const auto& rows = oob.oob_rows[v];
    double bag_sum = 0.0;
    for (int l = 0; l < p; ++l) {
      const auto& preds = cache.raw[v][l];
      double s = 0.0;
      for (std::size_t j = 0; j < rows.size(); ++j)
        s += gradient(rows[j], l) * (preds[j] - pooled.pooled(rows[j], l));
      bag_sum += s;
    }
    total += bag_sum * bag_sum;
  }
  const double frac = static_cast<double>(oob.plan.m) / static_cast<double>(oob.n);
  const double denom = static_cast<double>(v_dagger) * (1.0 - frac) * (1.0 - frac);
  return total / denom;
}

double crossbag_estimate(const std::vector<NuisanceSpec>& specs,
                         const EstimatorHandle& estimator, const Dataset& data,
                         const OobPlan& oob, int workers, double* tau2_out) {
  RawOobPredictions cache;
  fit_oob_models(specs, data, oob, cache, 0, workers);
  const PooledPredictions pooled = pool_oob(cache, oob, static_cast<int>(specs.size()));
  const double psi = estimator.value(data, pooled.pooled);
  if (tau2_out) {
    const Matrix grad = estimator.gradient(data, pooled.pooled);
    *tau2_out = tau_squared(grad, cache, pooled, oob);
  }
  return psi;
}

AdaptiveResult adaptive_crossbag(const std::vector<NuisanceSpec>& specs,
                                 const EstimatorHandle& estimator, const Dataset& data,
                                 const StabilityTarget& target, std::uint64_t master_seed,
                                 const AdaptiveOptions& options) {
  if (options.v0 <= 1) throw std::invalid_argument("adaptive_crossbag: v0 > 1 required");
  if (!(options.growth > 1.0))
    throw std::invalid_argument("adaptive_crossbag: growth > 1 required");
  const int p = static_cast<int>(specs.size());
  if (p != estimator.nuisance_count)
    throw std::invalid_argument("adaptive_crossbag: nuisance count mismatch");

  OobPlan oob = build_oob_plan(master_seed, static_cast<int>(data.rows()), options.rho,
                               options.v0);
  RawOobPredictions cache;
  fit_oob_models(specs, data, oob, cache, 0, options.workers);

  AdaptiveResult result;
  int oob_target = options.v0;
  for (int round = 1; round <= options.max_rounds; ++round) {
    const PooledPredictions pooled = pool_oob(cache, oob, p);
    const int v_dagger = oob.bag_count();
    const double psi = estimator.value(data, pooled.pooled);
    const Matrix grad = estimator.gradient(data, pooled.pooled);
    const double tau2 = tau_squared(grad, cache, pooled, oob);
    const double halfwidth =
        tau2 == 0.0 ? 0.0
                    : t_quantile(v_dagger - 1, 1.0 - target.delta / 2.0) *
                          std::sqrt(2.0 * tau2 / static_cast<double>(v_dagger));

    result.estimate = psi;
    result.tau2_hat = tau2;
    result.v_dagger = v_dagger;
    result.halfwidth = halfwidth;
    result.rounds = round;
    if (halfwidth <= target.epsilon) {
      result.converged = true;
      return result;
    }
    if (round == options.max_rounds) break;

    oob_target = static_cast<int>(std::ceil(options.growth * oob_target));
    const int prev = oob.bag_count();
    extend_oob_plan(oob, oob_target);
    fit_oob_models(specs, data, oob, cache, prev, options.workers);
  }
  result.converged = false;
  return result;
}

}  // namespace seedstable
