#ifndef SEEDSTABLE_CORE_HPP
#define SEEDSTABLE_CORE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seedstable/rng.hpp"

namespace seedstable {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Fixed training dataset. Outcome is expected in [0,1] (use minmax_scale);
// treatment, when present, is binary.
struct Dataset {
  Matrix features;                                // n x d
  Vector outcome;                                 // n
  std::optional<Vector> treatment;                // n, entries in {0,1}
  std::optional<std::vector<std::string>> column_names;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }

  void validate() const;
};

struct ScaleParams {
  double y_min = 0.0;
  double y_max = 1.0;
  bool degenerate = false;
};

// Min-max rescaling onto [0,1]. A constant vector maps to all zeros with
// the degenerate flag set.
std::pair<Vector, ScaleParams> minmax_scale(const Vector& values);

struct SeedBagPair {
  std::uint64_t seed = 0;
  std::vector<int> indices;  // sorted, distinct, size m
};

struct BagPlan {
  double rho = 0.0;
  int m = 0;
  std::vector<SeedBagPair> pairs;
  std::uint64_t master_seed = 0;
};

// m distinct indices in [0, n), uniform over all C(n, m) subsets, via a
// seeded partial Fisher-Yates shuffle. Returned sorted.
std::vector<int> draw_subsample(std::uint64_t seed, int n, int m);

}  // namespace seedstable

#endif
