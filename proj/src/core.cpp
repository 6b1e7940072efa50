#include "seedstable/core.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace seedstable {

void Dataset::validate() const {
  const Eigen::Index n = rows();
  if (n < 2) throw std::invalid_argument("Dataset: need at least 2 rows");
  if (cols() < 1) throw std::invalid_argument("Dataset: need at least 1 feature");
  if (!features.allFinite()) throw std::invalid_argument("Dataset: non-finite feature");
  if (outcome.size() != n) throw std::invalid_argument("Dataset: outcome length mismatch");
  if (!outcome.allFinite()) throw std::invalid_argument("Dataset: non-finite outcome");
  if ((outcome.array() < 0.0).any() || (outcome.array() > 1.0).any())
    throw std::invalid_argument("Dataset: outcome outside [0,1]; apply minmax_scale");
  if (treatment) {
    if (treatment->size() != n) throw std::invalid_argument("Dataset: treatment length mismatch");
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = (*treatment)(i);
      if (a != 0.0 && a != 1.0)
        throw std::invalid_argument("Dataset: treatment entries must be 0 or 1");
    }
  }
}

std::pair<Vector, ScaleParams> minmax_scale(const Vector& values) {
  if (values.size() < 1) throw std::invalid_argument("minmax_scale: empty input");
  if (!values.allFinite()) throw std::invalid_argument("minmax_scale: non-finite input");
  ScaleParams params;
  params.y_min = values.minCoeff();
  params.y_max = values.maxCoeff();
  if (params.y_max == params.y_min) {
    params.degenerate = true;
    return {Vector::Zero(values.size()), params};
  }
  Vector scaled = (values.array() - params.y_min) / (params.y_max - params.y_min);
  return {scaled, params};
}

std::vector<int> draw_subsample(std::uint64_t seed, int n, int m) {
  if (m < 1 || m > n)
    throw std::invalid_argument("draw_subsample: require 1 <= m <= n");
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  Rng rng(seed);
  for (int i = 0; i < m; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  std::vector<int> out(pool.begin(), pool.begin() + m);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace seedstable
