#include "seedstable/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace seedstable {

void LearnerSpec::validate() const {
  if (forest.tree_count < 1) throw std::invalid_argument("LearnerSpec: tree_count >= 1");
  if (forest.min_leaf < 1) throw std::invalid_argument("LearnerSpec: min_leaf >= 1");
  if (neural_net.hidden_units < 1) throw std::invalid_argument("LearnerSpec: hidden_units >= 1");
  if (!(neural_net.learning_rate > 0)) throw std::invalid_argument("LearnerSpec: learning_rate > 0");
  if (neural_net.epochs < 1) throw std::invalid_argument("LearnerSpec: epochs >= 1");
}

LearnerSpec LearnerSpec::constant() {
  LearnerSpec s;
  s.kind = LearnerKind::constant;
  return s;
}

LearnerSpec LearnerSpec::make_forest(int trees, int min_leaf, int mtry) {
  LearnerSpec s;
  s.kind = LearnerKind::forest;
  s.forest.tree_count = trees;
  s.forest.min_leaf = min_leaf;
  s.forest.mtry = mtry;
  return s;
}

LearnerSpec LearnerSpec::make_neural_net(int hidden, double lr, int epochs,
                                         double init_scale) {
  LearnerSpec s;
  s.kind = LearnerKind::neural_net;
  s.neural_net = {hidden, lr, epochs, init_scale};
  return s;
}

namespace detail {

double Tree::predict(const Eigen::Ref<const Vector>& x) const {
  int node = 0;
  while (nodes[node].feature >= 0) {
    node = x(nodes[node].feature) <= nodes[node].threshold ? nodes[node].left
                                                           : nodes[node].right;
  }
  return nodes[node].leaf_value;
}

namespace {

double subset_mean(const Vector& target, const std::vector<int>& rows) {
  double s = 0.0;
  for (int r : rows) s += target(r);
  return rows.empty() ? 0.5 : s / static_cast<double>(rows.size());
}

struct TreeBuilder {
  const Matrix& x;
  const Vector& y;
  int mtry;
  int min_leaf;
  Rng& rng;
  Tree tree;

  int build(std::vector<int>& rows) {
    const int sz = static_cast<int>(rows.size());
    double sum = 0.0;
    for (int r : rows) sum += y(r);
    const double mean = sum / sz;

    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[id].leaf_value = mean;
    if (sz < 2 * min_leaf) return id;

    bool constant_y = true;
    for (int r : rows)
      if (y(r) != y(rows[0])) {
        constant_y = false;
        break;
      }
    if (constant_y) return id;

    // mtry distinct candidate features, then scanned in ascending index so
    // score ties resolve to the lowest feature and lowest threshold.
    const int d = static_cast<int>(x.cols());
    std::vector<int> feats(d);
    std::iota(feats.begin(), feats.end(), 0);
    for (int i = 0; i < mtry; ++i) {
      const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(d - i)));
      std::swap(feats[i], feats[j]);
    }
    feats.resize(mtry);
    std::sort(feats.begin(), feats.end());

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = -1.0;
    std::vector<std::pair<double, double>> vals;
    vals.reserve(sz);
    for (int f : feats) {
      vals.clear();
      for (int r : rows) vals.emplace_back(x(r, f), y(r));
      std::sort(vals.begin(), vals.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double left_sum = 0.0;
      for (int k = 1; k < sz; ++k) {
        left_sum += vals[k - 1].second;
        if (vals[k - 1].first == vals[k].first) continue;
        if (k < min_leaf || sz - k < min_leaf) continue;
        const double right_sum = sum - left_sum;
        const double score = left_sum * left_sum / k + right_sum * right_sum / (sz - k);
        if (score > best_score) {
          best_score = score;
          best_feature = f;
          best_threshold = 0.5 * (vals[k - 1].first + vals[k].first);
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<int> left_rows, right_rows;
    left_rows.reserve(sz);
    right_rows.reserve(sz);
    for (int r : rows)
      (x(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
    if (left_rows.empty() || right_rows.empty()) return id;

    tree.nodes[id].feature = best_feature;
    tree.nodes[id].threshold = best_threshold;
    const int left = build(left_rows);
    tree.nodes[id].left = left;
    const int right = build(right_rows);
    tree.nodes[id].right = right;
    return id;
  }
};

ForestModel fit_forest(const ForestParams& params, const Matrix& x, const Vector& y,
                       const std::vector<int>& rows, std::uint64_t seed) {
  const int d = static_cast<int>(x.cols());
  const int mtry = params.mtry > 0
                       ? std::min(params.mtry, d)
                       : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
  ForestModel forest;
  forest.trees.resize(params.tree_count);
  const auto nrows = static_cast<std::uint64_t>(rows.size());
  for (int t = 0; t < params.tree_count; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<int> boot(rows.size());
    for (auto& b : boot) b = rows[rng.below(nrows)];
    TreeBuilder builder{x, y, mtry, params.min_leaf, rng, {}};
    builder.build(boot);
    forest.trees[t] = std::move(builder.tree);
  }
  return forest;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

NeuralNetModel fit_neural_net(const NeuralNetParams& params, const Matrix& x,
                              const Vector& y, const std::vector<int>& rows,
                              std::uint64_t seed) {
  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(x.cols());
  const int h = params.hidden_units;

  Matrix xs(n, d);
  Vector ys(n);
  for (int i = 0; i < n; ++i) {
    xs.row(i) = x.row(rows[i]);
    ys(i) = y(rows[i]);
  }

  NeuralNetModel net;
  net.w1.resize(h, d);
  net.b1 = Vector::Zero(h);
  net.w2.resize(h);
  net.b2 = 0.0;
  Rng rng(seed);
  for (int j = 0; j < h; ++j)
    for (int k = 0; k < d; ++k)
      net.w1(j, k) = rng.uniform(-params.init_scale, params.init_scale);
  for (int j = 0; j < h; ++j)
    net.w2(j) = rng.uniform(-params.init_scale, params.init_scale);
  net.b2 = rng.uniform(-params.init_scale, params.init_scale);

  // Full-batch gradient descent on the mean log-loss, logistic everywhere.
  const double lr = params.learning_rate;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    Matrix z1 = (xs * net.w1.transpose()).rowwise() + net.b1.transpose();
    Matrix a1 = z1.array().logistic().matrix();
    Vector out = ((a1 * net.w2).array() + net.b2).logistic().matrix();

    Vector dout = (out - ys) / static_cast<double>(n);
    Vector gw2 = a1.transpose() * dout;
    const double gb2 = dout.sum();
    Matrix dz1 =
        ((dout * net.w2.transpose()).array() * a1.array() * (1.0 - a1.array())).matrix();
    Matrix gw1 = dz1.transpose() * xs;
    Vector gb1 = dz1.colwise().sum();

    net.w1 -= lr * gw1;
    net.b1 -= lr * gb1;
    net.w2 -= lr * gw2;
    net.b2 -= lr * gb2;
  }
  if (!net.w1.allFinite() || !net.b1.allFinite() || !net.w2.allFinite() ||
      !std::isfinite(net.b2))
    throw std::runtime_error("neural net training produced non-finite parameters");
  return net;
}

}  // namespace
}  // namespace detail

FittedModel fit(const LearnerSpec& spec, const Dataset& data, const Vector& target,
                const std::vector<int>& rows, std::uint64_t seed) {
  spec.validate();
  if (target.size() != data.rows())
    throw std::invalid_argument("fit: target length mismatch");
  if (!target.allFinite() || (target.array() < 0.0).any() || (target.array() > 1.0).any())
    throw std::invalid_argument("fit: target must be finite and in [0,1]");
  for (int r : rows)
    if (r < 0 || r >= data.rows()) throw std::invalid_argument("fit: row index out of range");

  FittedModel fitted;
  fitted.training_seed = seed;
  fitted.input_dim = data.cols();

  // Too few rows to learn anything: degrade to the subset mean.
  if (spec.kind == LearnerKind::constant || rows.size() < 2) {
    fitted.model = detail::ConstantModel{detail::subset_mean(target, rows)};
    return fitted;
  }
  if (spec.kind == LearnerKind::forest) {
    fitted.model = detail::fit_forest(spec.forest, data.features, target, rows, seed);
  } else {
    fitted.model = detail::fit_neural_net(spec.neural_net, data.features, target, rows, seed);
  }
  return fitted;
}

FittedModel fit(const LearnerSpec& spec, const Dataset& data, const Vector& target,
                std::uint64_t seed) {
  std::vector<int> rows(static_cast<std::size_t>(data.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  return fit(spec, data, target, rows, seed);
}

double predict(const FittedModel& model, const Eigen::Ref<const Vector>& x) {
  if (x.size() != model.input_dim)
    throw std::invalid_argument("predict: feature dimension mismatch");
  if (!x.allFinite()) throw std::invalid_argument("predict: non-finite input");
  double out;
  if (const auto* c = std::get_if<detail::ConstantModel>(&model.model)) {
    out = c->value;
  } else if (const auto* f = std::get_if<detail::ForestModel>(&model.model)) {
    double s = 0.0;
    for (const auto& tree : f->trees) s += tree.predict(x);
    out = s / static_cast<double>(f->trees.size());
  } else {
    const auto& net = std::get<detail::NeuralNetModel>(model.model);
    Vector a1 = ((net.w1 * x + net.b1).array()).logistic().matrix();
    out = 1.0 / (1.0 + std::exp(-(net.w2.dot(a1) + net.b2)));
  }
  return std::clamp(out, 0.0, 1.0);
}

}  // namespace seedstable
