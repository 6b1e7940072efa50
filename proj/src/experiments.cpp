#include "seedstable/experiments.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "seedstable/bagging.hpp"
#include "seedstable/crossbag.hpp"
#include "seedstable/estimators.hpp"
#include "seedstable/parallel.hpp"

namespace seedstable {

namespace {

// Counter namespace on the master seed: 0 generates the dataset, 1 the test
// point, 2+s the per-run master seeds.
constexpr std::uint64_t kDatasetCounter = 0;
constexpr std::uint64_t kTestPointCounter = 1;
constexpr std::uint64_t kRunCounterBase = 2;

double elapsed_ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

Sim1Result run_sim1(const Sim1Config& config) {
  Sim1Result result;
  result.sample = gen_dgp_a(config.n, derive_seed(config.master_seed, kDatasetCounter));
  result.test_point =
      gen_dgp_a(1, derive_seed(config.master_seed, kTestPointCounter)).dataset.features.row(0);

  LearnerSpec net = LearnerSpec::make_neural_net(
      config.net.hidden_units, config.net.learning_rate, config.net.epochs,
      config.net.init_scale);

  result.seed_list.resize(config.seeds);
  for (int s = 0; s < config.seeds; ++s)
    result.seed_list[s] =
        derive_seed(config.master_seed, kRunCounterBase + static_cast<std::uint64_t>(s));

  result.unbagged.resize(config.seeds);
  result.subbagged.resize(config.seeds);
  const Dataset& data = result.sample.dataset;
  parallel_for(config.seeds, config.workers, [&](long s) {
    const std::uint64_t run_seed = result.seed_list[s];
    const FittedModel single = fit(net, data, data.outcome, derive_seed(run_seed, 0));
    result.unbagged(s) = predict(single, result.test_point);
    const BagPlan plan =
        build_bag_plan(derive_seed(run_seed, 1), config.n, config.rho, config.v_bags);
    const SubbaggedEnsemble ensemble = fit_subbagged(net, data, data.outcome, plan);
    result.subbagged(s) = predict_subbagged(ensemble, result.test_point);
  });
  return result;
}

Vector successful_estimates(const std::vector<Sim2MethodRun>& runs) {
  std::vector<double> ok;
  ok.reserve(runs.size());
  for (const auto& r : runs)
    if (r.error.empty()) ok.push_back(r.estimate);
  return Eigen::Map<const Vector>(ok.data(), static_cast<Eigen::Index>(ok.size()));
}

std::vector<double> epsilon_grid(int points) {
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i)
    grid[i] = std::pow(10.0, -4.0 + 4.0 * static_cast<double>(i) / (points - 1));
  return grid;
}

namespace {

struct MethodSpec {
  std::string name;
  bool averaging = false;
  int folds = 0;      // kLooFolds for LOO; 0 for adaptive
  bool adaptive = false;
};

MethodSpec parse_method(const std::string& name, int n) {
  MethodSpec m;
  m.name = name;
  std::string rest = name;
  if (rest == "adaptive") {
    m.adaptive = true;
    return m;
  }
  if (rest.rfind("crossfit-", 0) == 0) {
    rest = rest.substr(9);
  } else if (rest.rfind("avg-", 0) == 0) {
    m.averaging = true;
    rest = rest.substr(4);
  } else {
    throw std::invalid_argument("unknown method '" + name + "'");
  }
  if (rest == "loo") {
    m.folds = kLooFolds;
  } else {
    m.folds = std::stoi(rest);
    if (m.folds < 2 || m.folds > n)
      throw std::invalid_argument("method '" + name + "': folds out of range");
  }
  return m;
}

}  // namespace

Sim2Result run_sim2(const Sim2Config& config) {
  Sim2Result result;
  result.sample = gen_dgp_b(config.n, derive_seed(config.master_seed, kDatasetCounter));
  const Dataset& data = result.sample.dataset;

  const LearnerSpec forest = LearnerSpec::make_forest(config.trees, config.min_leaf);
  const EstimatorHandle handle = aipw_handle(config.clip);
  const std::vector<NuisanceSpec> nuisances = aipw_nuisances(data, forest);
  const StabilityTarget target{config.epsilon, config.delta};

  result.seed_list.resize(config.seeds);
  for (int s = 0; s < config.seeds; ++s)
    result.seed_list[s] =
        derive_seed(config.master_seed, kRunCounterBase + static_cast<std::uint64_t>(s));

  std::vector<MethodSpec> methods;
  methods.reserve(config.methods.size());
  for (const auto& name : config.methods) methods.push_back(parse_method(name, config.n));
  for (const auto& m : methods) result.runs[m.name].resize(config.seeds);

  parallel_for(config.seeds, config.workers, [&](long s) {
    const std::uint64_t run_seed = result.seed_list[s];
    for (const auto& method : methods) {
      Sim2MethodRun run;
      const auto start = std::chrono::steady_clock::now();
      try {
        if (method.adaptive) {
          AdaptiveOptions options;
          options.rho = config.rho;
          options.v0 = config.v0;
          options.growth = config.growth;
          options.max_rounds = config.max_rounds;
          const AdaptiveResult a =
              adaptive_crossbag(nuisances, handle, data, target, run_seed, options);
          run.estimate = a.estimate;
          run.v_dagger = a.v_dagger;
        } else if (method.averaging) {
          std::vector<std::uint64_t> inner(config.avg_seeds);
          for (int j = 0; j < config.avg_seeds; ++j)
            inner[j] = derive_seed(run_seed, static_cast<std::uint64_t>(j));
          run.estimate = average_over_seeds(
              [&](std::uint64_t inner_seed) {
                return crossfit_aipw(forest, forest, forest, data, method.folds,
                                     inner_seed, config.clip);
              },
              inner, AverageMode::mean);
        } else {
          run.estimate =
              crossfit_aipw(forest, forest, forest, data, method.folds, run_seed, config.clip);
        }
      } catch (const std::exception& e) {
        run.error = e.what();
      }
      run.elapsed_ms = elapsed_ms_since(start);
      result.runs[method.name][s] = run;
    }
  });
  return result;
}

}  // namespace seedstable
