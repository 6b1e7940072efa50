#ifndef SEEDSTABLE_BAGGING_HPP
#define SEEDSTABLE_BAGGING_HPP

#include "seedstable/core.hpp"
#include "seedstable/learners.hpp"

namespace seedstable {

struct SubbaggedEnsemble {
  BagPlan plan;
  std::vector<FittedModel> models;
  LearnerSpec spec;
};

// `count` independent (seed, subsample) pairs from a single master seed.
// Pair v uses derived counter 2v for the subsample and 2v+1 for training.
BagPlan build_bag_plan(std::uint64_t master_seed, int n, double rho, int count);

// Append further pairs to an existing plan, continuing the counter stream.
void extend_bag_plan(BagPlan& plan, int n, int extra);

SubbaggedEnsemble fit_subbagged(const LearnerSpec& spec, const Dataset& data,
                                const Vector& target, const BagPlan& plan,
                                int workers = 1);

double predict_subbagged(const SubbaggedEnsemble& ensemble,
                         const Eigen::Ref<const Vector>& x);

}  // namespace seedstable

#endif
