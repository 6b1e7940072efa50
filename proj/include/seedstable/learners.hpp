#ifndef SEEDSTABLE_LEARNERS_HPP
#define SEEDSTABLE_LEARNERS_HPP

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "seedstable/core.hpp"

namespace seedstable {

enum class LearnerKind { constant, forest, neural_net };

struct ForestParams {
  int tree_count = 500;
  int mtry = 0;      // 0 means ceil(sqrt(d)) at fit time
  int min_leaf = 5;
};

struct NeuralNetParams {
  int hidden_units = 20;
  double learning_rate = 0.1;
  int epochs = 200;
  double init_scale = 0.7;
};

struct LearnerSpec {
  LearnerKind kind = LearnerKind::forest;
  ForestParams forest;
  NeuralNetParams neural_net;

  void validate() const;
  static LearnerSpec constant();
  static LearnerSpec make_forest(int trees, int min_leaf = 5, int mtry = 0);
  static LearnerSpec make_neural_net(int hidden = 20, double lr = 0.1,
                                     int epochs = 200, double init_scale = 0.7);
};

namespace detail {

struct ConstantModel {
  double value = 0.0;
};

struct TreeNode {
  int feature = -1;        // -1 marks a leaf
  double threshold = 0.0;
  double leaf_value = 0.0;
  int left = -1;
  int right = -1;
};

struct Tree {
  std::vector<TreeNode> nodes;
  double predict(const Eigen::Ref<const Vector>& x) const;
};

struct ForestModel {
  std::vector<Tree> trees;
};

struct NeuralNetModel {
  Matrix w1;   // hidden x d
  Vector b1;   // hidden
  Vector w2;   // hidden
  double b2 = 0.0;
};

}  // namespace detail

// Immutable fitted learner; predictions always land in [0,1].
struct FittedModel {
  std::variant<detail::ConstantModel, detail::ForestModel, detail::NeuralNetModel> model;
  std::uint64_t training_seed = 0;
  Eigen::Index input_dim = 0;
};

// Fit on the rows of `data` indexed by `rows` against `target` (full-length,
// entries in [0,1]). Every stochastic choice derives from `seed`.
FittedModel fit(const LearnerSpec& spec, const Dataset& data, const Vector& target,
                const std::vector<int>& rows, std::uint64_t seed);

// Fit on all rows.
FittedModel fit(const LearnerSpec& spec, const Dataset& data, const Vector& target,
                std::uint64_t seed);

double predict(const FittedModel& model, const Eigen::Ref<const Vector>& x);

}  // namespace seedstable

#endif
