#ifndef SEEDSTABLE_SIMULATE_HPP
#define SEEDSTABLE_SIMULATE_HPP

#include <cstdint>
#include <optional>

#include "seedstable/core.hpp"

namespace seedstable {

struct DgpSample {
  Dataset dataset;
  std::optional<Vector> true_probability;  // DGP-A: P(Y=1 | W) per row
  std::optional<Vector> true_propensity;   // DGP-B: P(A=1 | W) per row
  std::optional<double> true_ate;          // DGP-B: 0
};

// Closed-form outcome logit of DGP-A at a 20-dimensional feature vector.
double dgp_a_logit(const Eigen::Ref<const Vector>& w);

// 20-feature binary-outcome prediction task: two equicorrelated Gaussian
// blocks plus heterogeneous marginals feeding a nonlinear logit.
DgpSample gen_dgp_a(int n, std::uint64_t seed);

// 4-confounder treatment/outcome task; the outcome model has no treatment
// term, so the true ATE is 0.
DgpSample gen_dgp_b(int n, std::uint64_t seed);

}  // namespace seedstable

#endif
