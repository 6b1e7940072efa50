#include "seedstable/bagging.hpp"

#include <cmath>
#include <stdexcept>

#include "seedstable/parallel.hpp"

namespace seedstable {

BagPlan build_bag_plan(std::uint64_t master_seed, int n, double rho, int count) {
  if (n < 2) throw std::invalid_argument("build_bag_plan: n >= 2 required");
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("build_bag_plan: rho must lie in (0,1)");
  if (count < 1) throw std::invalid_argument("build_bag_plan: count >= 1 required");
  const int m = static_cast<int>(std::floor(rho * n));
  if (m < 1 || m >= n)
    throw std::invalid_argument("build_bag_plan: floor(rho*n) must be a proper subsample size");
  BagPlan plan;
  plan.rho = rho;
  plan.m = m;
  plan.master_seed = master_seed;
  plan.pairs.reserve(count);
  extend_bag_plan(plan, n, count);
  return plan;
}

void extend_bag_plan(BagPlan& plan, int n, int extra) {
  if (extra < 0) throw std::invalid_argument("extend_bag_plan: extra must be non-negative");
  const auto start = static_cast<std::uint64_t>(plan.pairs.size());
  for (std::uint64_t v = start; v < start + static_cast<std::uint64_t>(extra); ++v) {
    SeedBagPair pair;
    pair.indices = draw_subsample(derive_seed(plan.master_seed, 2 * v), n, plan.m);
    pair.seed = derive_seed(plan.master_seed, 2 * v + 1);
    plan.pairs.push_back(std::move(pair));
  }
}

SubbaggedEnsemble fit_subbagged(const LearnerSpec& spec, const Dataset& data,
                                const Vector& target, const BagPlan& plan,
                                int workers) {
  for (const auto& pair : plan.pairs)
    if (!pair.indices.empty() && pair.indices.back() >= data.rows())
      throw std::invalid_argument("fit_subbagged: plan inconsistent with dataset size");
  SubbaggedEnsemble ensemble;
  ensemble.plan = plan;
  ensemble.spec = spec;
  ensemble.models.resize(plan.pairs.size());
  parallel_for(static_cast<long>(plan.pairs.size()), workers, [&](long v) {
    try {
      ensemble.models[v] = fit(spec, data, target, plan.pairs[v].indices, plan.pairs[v].seed);
    } catch (const std::exception& e) {
      throw std::runtime_error("bag " + std::to_string(v) + ": " + e.what());
    }
  });
  return ensemble;
}

double predict_subbagged(const SubbaggedEnsemble& ensemble,
                         const Eigen::Ref<const Vector>& x) {
  if (ensemble.models.empty())
    throw std::invalid_argument("predict_subbagged: empty ensemble");
  // Fixed pair order keeps the sum bit-reproducible regardless of workers.
  double s = 0.0;
  for (const auto& model : ensemble.models) s += predict(model, x);
  return s / static_cast<double>(ensemble.models.size());
}

}  // namespace seedstable
