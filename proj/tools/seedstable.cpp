// seedstable: seed-stable machine learning estimation via subbagging and
// adaptive cross-bagging.
//
// Subcommands: bounds, sim1, sim2, estimate, stability.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "seedstable/crossbag.hpp"
#include "seedstable/csv.hpp"
#include "seedstable/experiments.hpp"
#include "seedstable/parallel.hpp"
#include "seedstable/stability.hpp"
#include "seedstable/student_t.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace seedstable;

namespace {

constexpr const char* kArtifactVersion = "0.1.0";

json load_config_file(int argc, char** argv) {
  for (int i = 1; i < argc - 1; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) throw CLI::ValidationError("--config", std::string("cannot open ") + argv[i + 1]);
      json cfg;
      in >> cfg;
      return cfg;
    }
  }
  return json::object();
}

template <typename T>
void from_config(const json& cfg, const char* key, T& value) {
  if (cfg.contains(key)) value = cfg.at(key).get<T>();
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

json stability_curve(const Vector& estimates, const std::vector<double>& grid) {
  json curve = json::array();
  for (double eps : grid) {
    curve.push_back({{"epsilon", eps}, {"delta_hat", empirical_delta(estimates, eps)}});
  }
  return curve;
}

int parse_folds_flag(const std::string& folds) {
  if (folds == "loo") return kLooFolds;
  try {
    return std::stoi(folds);
  } catch (const std::exception&) {
    throw CLI::ValidationError("--folds", "expected an integer or 'loo'");
  }
}

LearnerSpec learner_from_flags(const std::string& kind, int trees, int min_leaf,
                               int hidden, double lr, int epochs, double init_scale) {
  if (kind == "forest") return LearnerSpec::make_forest(trees, min_leaf);
  if (kind == "neural_net") return LearnerSpec::make_neural_net(hidden, lr, epochs, init_scale);
  if (kind == "constant") return LearnerSpec::constant();
  throw CLI::ValidationError("--learner", "expected forest, neural_net, or constant");
}

// ---------------------------------------------------------------- bounds

int cmd_bounds(CLI::App& app, const json& cfg) {
  struct BoundsOpts {
    double epsilon = 0.0, delta = 0.0, nu2 = 0.25, L = 0.0;
    int k = 1;
    long n = 0;
    int p = 0;
    bool as_json = false;
  };
  auto opts = std::make_shared<BoundsOpts>();
  from_config(cfg, "epsilon", opts->epsilon);
  from_config(cfg, "delta", opts->delta);
  from_config(cfg, "k", opts->k);
  from_config(cfg, "nu2", opts->nu2);

  auto* cmd = app.add_subcommand("bounds", "Stability bound calculators");
  cmd->add_option("--epsilon", opts->epsilon, "stability tolerance")->required(!cfg.contains("epsilon"));
  cmd->add_option("--delta", opts->delta, "stability probability")->required(!cfg.contains("delta"));
  cmd->add_option("--k", opts->k, "test set size");
  cmd->add_option("--nu2", opts->nu2, "per-bag prediction variance bound");
  cmd->add_option("--n", opts->n, "sample size (corollary bound)");
  cmd->add_option("--p", opts->p, "nuisance count (corollary bound)");
  cmd->add_option("--L", opts->L, "Lipschitz constant (corollary bound)");
  cmd->add_flag("--json", opts->as_json, "emit JSON");
  cmd->add_option("--config", "JSON config file")->expected(1);

  cmd->callback([opts] {
    const StabilityTarget target{opts->epsilon, opts->delta};
    const auto [threshold, certifiable] = lemma1_variance_threshold(target, opts->k);
    const long v1 = theorem1_min_bags(target, opts->k, opts->nu2);
    json out = {{"lemma1_threshold", threshold},
                {"lemma1_certifiable", certifiable},
                {"theorem1_min_bags", v1}};
    const bool corollary = opts->n > 0 && opts->p > 0 && opts->L > 0;
    if (corollary)
      out["corollary1_min_bags"] =
          corollary1_min_bags(target, opts->n, opts->p, opts->L, opts->nu2);
    if (opts->as_json) {
      std::cout << out.dump(2) << "\n";
    } else {
      std::cout << "lemma1_threshold     " << format_double(threshold)
                << "  certifiable=" << (certifiable ? "true" : "false") << "\n";
      std::cout << "theorem1_min_bags    " << v1 << "\n";
      if (corollary)
        std::cout << "corollary1_min_bags  " << out["corollary1_min_bags"].get<double>()
                  << "\n";
    }
  });
  return 0;
}

// ------------------------------------------------------------------ sim1

int cmd_sim1(CLI::App& app, const json& cfg) {
  struct Sim1Opts {
    Sim1Config config;
    std::string out_dir = ".";
  };
  auto opts = std::make_shared<Sim1Opts>();
  auto& c = opts->config;
  c.workers = default_workers();
  from_config(cfg, "n", c.n);
  from_config(cfg, "seeds", c.seeds);
  from_config(cfg, "v_bags", c.v_bags);
  from_config(cfg, "rho", c.rho);
  from_config(cfg, "epsilon", c.epsilon);
  from_config(cfg, "delta", c.delta);
  from_config(cfg, "hidden", c.net.hidden_units);
  from_config(cfg, "learning_rate", c.net.learning_rate);
  from_config(cfg, "epochs", c.net.epochs);
  from_config(cfg, "init_scale", c.net.init_scale);
  from_config(cfg, "master_seed", c.master_seed);
  from_config(cfg, "workers", c.workers);
  from_config(cfg, "out", opts->out_dir);

  auto* cmd = app.add_subcommand("sim1", "Subbagged neural net stability experiment");
  cmd->add_option("--n", c.n, "training rows");
  cmd->add_option("--seeds", c.seeds, "master seeds");
  cmd->add_option("--v-bags", c.v_bags, "bags per subbagged run");
  cmd->add_option("--rho", c.rho, "subsample fraction");
  cmd->add_option("--epsilon", c.epsilon, "stability tolerance");
  cmd->add_option("--delta", c.delta, "stability probability");
  cmd->add_option("--hidden", c.net.hidden_units, "hidden units");
  cmd->add_option("--lr", c.net.learning_rate, "learning rate");
  cmd->add_option("--epochs", c.net.epochs, "training epochs");
  cmd->add_option("--init-scale", c.net.init_scale, "weight init range");
  cmd->add_option("--master-seed", c.master_seed, "master seed");
  cmd->add_option("--workers", c.workers, "worker threads");
  cmd->add_option("--out", opts->out_dir, "output directory");
  cmd->add_option("--config", "JSON config file")->expected(1);

  cmd->callback([opts] {
    const auto& c = opts->config;
    fs::create_directories(opts->out_dir);
    const Sim1Result result = run_sim1(c);
    write_dataset_csv(result.sample.dataset, (fs::path(opts->out_dir) / "sim1_dataset.csv").string());

    std::ostringstream csv;
    csv << "seed,unbagged,subbagged\n";
    for (int s = 0; s < c.seeds; ++s)
      csv << result.seed_list[s] << ',' << format_double(result.unbagged(s)) << ','
          << format_double(result.subbagged(s)) << '\n';
    write_text_file(fs::path(opts->out_dir) / "sim1_estimates.csv", csv.str());

    const StabilityTarget target{c.epsilon, c.delta};
    const StabilityReport unbagged = make_stability_report(result.unbagged, target);
    const StabilityReport subbagged = make_stability_report(result.subbagged, target);
    const auto grid = epsilon_grid();
    json report = {
        {"artifact_version", kArtifactVersion},
        {"config",
         {{"n", c.n},
          {"seeds", c.seeds},
          {"v_bags", c.v_bags},
          {"rho", c.rho},
          {"epsilon", c.epsilon},
          {"delta", c.delta},
          {"hidden", c.net.hidden_units},
          {"learning_rate", c.net.learning_rate},
          {"epochs", c.net.epochs},
          {"init_scale", c.net.init_scale},
          {"master_seed", c.master_seed}}},
        {"unbagged",
         {{"delta_hat", unbagged.delta_hat},
          {"ratio", unbagged.ratio},
          {"pair_count", unbagged.pair_count},
          {"curve", stability_curve(result.unbagged, grid)}}},
        {"subbagged",
         {{"delta_hat", subbagged.delta_hat},
          {"ratio", subbagged.ratio},
          {"pair_count", subbagged.pair_count},
          {"curve", stability_curve(result.subbagged, grid)}}}};
    write_text_file(fs::path(opts->out_dir) / "sim1_report.json", report.dump(2) + "\n");
    std::cout << "sim1: unbagged r=" << unbagged.ratio << " subbagged r=" << subbagged.ratio
              << " (epsilon=" << c.epsilon << ", delta=" << c.delta << ")\n";
  });
  return 0;
}

// ------------------------------------------------------------------ sim2

int cmd_sim2(CLI::App& app, const json& cfg) {
  struct Sim2Opts {
    Sim2Config config;
    std::string out_dir = ".";
    std::string methods_flag;
  };
  auto opts = std::make_shared<Sim2Opts>();
  auto& c = opts->config;
  c.workers = default_workers();
  from_config(cfg, "n", c.n);
  from_config(cfg, "seeds", c.seeds);
  from_config(cfg, "trees", c.trees);
  from_config(cfg, "min_leaf", c.min_leaf);
  from_config(cfg, "rho", c.rho);
  from_config(cfg, "epsilon", c.epsilon);
  from_config(cfg, "delta", c.delta);
  from_config(cfg, "clip", c.clip);
  from_config(cfg, "v0", c.v0);
  from_config(cfg, "growth", c.growth);
  from_config(cfg, "avg_seeds", c.avg_seeds);
  from_config(cfg, "methods", c.methods);
  from_config(cfg, "master_seed", c.master_seed);
  from_config(cfg, "workers", c.workers);
  from_config(cfg, "out", opts->out_dir);

  auto* cmd = app.add_subcommand("sim2", "AIPW cross-fitting stability experiment");
  cmd->add_option("--n", c.n, "training rows");
  cmd->add_option("--seeds", c.seeds, "master seeds");
  cmd->add_option("--trees", c.trees, "forest size");
  cmd->add_option("--min-leaf", c.min_leaf, "forest minimum leaf size");
  cmd->add_option("--rho", c.rho, "subsample fraction");
  cmd->add_option("--epsilon", c.epsilon, "stability tolerance");
  cmd->add_option("--delta", c.delta, "stability probability");
  cmd->add_option("--clip", c.clip, "propensity clip");
  cmd->add_option("--v0", c.v0, "initial OOB target");
  cmd->add_option("--growth", c.growth, "OOB target growth factor");
  cmd->add_option("--avg-seeds", c.avg_seeds, "seeds per averaging run");
  cmd->add_option("--methods", opts->methods_flag,
                  "comma list: crossfit-K, crossfit-loo, avg-K, avg-loo, adaptive");
  cmd->add_option("--master-seed", c.master_seed, "master seed");
  cmd->add_option("--workers", c.workers, "worker threads");
  cmd->add_option("--out", opts->out_dir, "output directory");
  cmd->add_option("--config", "JSON config file")->expected(1);

  cmd->callback([opts] {
    auto& c = opts->config;
    if (!opts->methods_flag.empty()) {
      c.methods.clear();
      std::stringstream ss(opts->methods_flag);
      std::string item;
      while (std::getline(ss, item, ',')) c.methods.push_back(item);
    }
    fs::create_directories(opts->out_dir);
    const Sim2Result result = run_sim2(c);
    write_dataset_csv(result.sample.dataset, (fs::path(opts->out_dir) / "sim2_dataset.csv").string());

    std::ostringstream csv, timing;
    csv << "seed,method,estimate,v_dagger\n";
    timing << "seed,method,elapsed_ms\n";
    for (int s = 0; s < c.seeds; ++s) {
      for (const auto& method : c.methods) {
        const Sim2MethodRun& run = result.runs.at(method)[s];
        csv << result.seed_list[s] << ',' << method << ',';
        if (run.error.empty())
          csv << format_double(run.estimate);
        else
          csv << "nan";
        csv << ',';
        if (run.v_dagger >= 0) csv << run.v_dagger;
        csv << '\n';
        timing << result.seed_list[s] << ',' << method << ','
               << format_double(run.elapsed_ms) << '\n';
      }
    }
    write_text_file(fs::path(opts->out_dir) / "sim2_estimates.csv", csv.str());
    // Timing is kept out of the deterministic outputs.
    write_text_file(fs::path(opts->out_dir) / "sim2_timing.csv", timing.str());

    const auto grid = epsilon_grid();
    json methods = json::object();
    for (const auto& method : c.methods) {
      const auto& runs = result.runs.at(method);
      const Vector ok = successful_estimates(runs);
      json entry;
      entry["run_count"] = static_cast<int>(runs.size());
      entry["failed"] = static_cast<int>(runs.size()) - static_cast<int>(ok.size());
      json errors = json::array();
      for (int s = 0; s < static_cast<int>(runs.size()); ++s)
        if (!runs[s].error.empty())
          errors.push_back({{"seed", result.seed_list[s]}, {"error", runs[s].error}});
      if (!errors.empty()) entry["errors"] = errors;
      if (ok.size() >= 2) {
        const StabilityReport r = make_stability_report(ok, {c.epsilon, c.delta});
        entry["delta_hat"] = r.delta_hat;
        entry["ratio"] = r.ratio;
        entry["pair_count"] = r.pair_count;
        entry["curve"] = stability_curve(ok, grid);
      }
      if (method == "adaptive") {
        std::vector<int> vds;
        for (const auto& run : runs)
          if (run.error.empty()) vds.push_back(run.v_dagger);
        std::sort(vds.begin(), vds.end());
        if (!vds.empty()) {
          const std::size_t mid = vds.size() / 2;
          entry["median_v_dagger"] = vds.size() % 2 == 1
                                         ? static_cast<double>(vds[mid])
                                         : 0.5 * (vds[mid - 1] + vds[mid]);
        }
      }
      methods[method] = entry;
    }
    json report = {{"artifact_version", kArtifactVersion},
                   {"config",
                    {{"n", c.n},
                     {"seeds", c.seeds},
                     {"trees", c.trees},
                     {"min_leaf", c.min_leaf},
                     {"rho", c.rho},
                     {"epsilon", c.epsilon},
                     {"delta", c.delta},
                     {"clip", c.clip},
                     {"v0", c.v0},
                     {"growth", c.growth},
                     {"avg_seeds", c.avg_seeds},
                     {"methods", c.methods},
                     {"master_seed", c.master_seed}}},
                   {"methods", methods}};
    write_text_file(fs::path(opts->out_dir) / "sim2_report.json", report.dump(2) + "\n");
    for (const auto& method : c.methods) {
      const auto& entry = methods[method];
      std::cout << "sim2: " << method;
      if (entry.contains("ratio")) std::cout << " r=" << entry["ratio"].get<double>();
      if (entry.contains("median_v_dagger"))
        std::cout << " median_v_dagger=" << entry["median_v_dagger"].get<double>();
      std::cout << "\n";
    }
  });
  return 0;
}

// -------------------------------------------------------------- estimate

int cmd_estimate(CLI::App& app, const json& cfg) {
  struct EstimateOpts {
    std::string input;
    std::string method = "adaptive";
    std::string folds = "2";
    double rho = 0.5;
    double epsilon = 0.01;
    double delta = 0.01;
    int v0 = 50;
    double growth = 1.5;
    int max_rounds = 20;
    double clip = 0.01;
    std::string learner = "forest";
    int trees = 100;
    int min_leaf = 5;
    int hidden = 20;
    double lr = 0.1;
    int epochs = 200;
    double init_scale = 0.7;
    std::uint64_t master_seed = 1;
    int workers = default_workers();
  };
  auto opts = std::make_shared<EstimateOpts>();
  from_config(cfg, "input", opts->input);
  from_config(cfg, "method", opts->method);
  from_config(cfg, "folds", opts->folds);
  from_config(cfg, "rho", opts->rho);
  from_config(cfg, "epsilon", opts->epsilon);
  from_config(cfg, "delta", opts->delta);
  from_config(cfg, "v0", opts->v0);
  from_config(cfg, "clip", opts->clip);
  from_config(cfg, "learner", opts->learner);
  from_config(cfg, "trees", opts->trees);
  from_config(cfg, "master_seed", opts->master_seed);
  from_config(cfg, "workers", opts->workers);

  auto* cmd = app.add_subcommand("estimate", "Estimate the ATE on a dataset CSV");
  cmd->add_option("--input", opts->input, "dataset CSV with 'a' and 'y' columns")
      ->required(!cfg.contains("input"));
  cmd->add_option("--method", opts->method, "crossfit, crossbag, or adaptive");
  cmd->add_option("--folds", opts->folds, "fold count or 'loo' (crossfit)");
  cmd->add_option("--rho", opts->rho, "subsample fraction");
  cmd->add_option("--epsilon", opts->epsilon, "stability tolerance");
  cmd->add_option("--delta", opts->delta, "stability probability");
  cmd->add_option("--v0", opts->v0, "initial / fixed OOB target");
  cmd->add_option("--growth", opts->growth, "OOB target growth factor");
  cmd->add_option("--max-rounds", opts->max_rounds, "adaptive round cap");
  cmd->add_option("--clip", opts->clip, "propensity clip");
  cmd->add_option("--learner", opts->learner, "forest, neural_net, or constant");
  cmd->add_option("--trees", opts->trees, "forest size");
  cmd->add_option("--min-leaf", opts->min_leaf, "forest minimum leaf size");
  cmd->add_option("--hidden", opts->hidden, "hidden units");
  cmd->add_option("--lr", opts->lr, "learning rate");
  cmd->add_option("--epochs", opts->epochs, "training epochs");
  cmd->add_option("--init-scale", opts->init_scale, "weight init range");
  cmd->add_option("--master-seed", opts->master_seed, "master seed");
  cmd->add_option("--workers", opts->workers, "worker threads");
  cmd->add_option("--config", "JSON config file")->expected(1);

  cmd->callback([opts] {
    const Dataset data = read_dataset_csv(opts->input);
    if (!data.treatment)
      throw CLI::ValidationError("--input", "dataset has no treatment column 'a'");
    const LearnerSpec learner =
        learner_from_flags(opts->learner, opts->trees, opts->min_leaf, opts->hidden,
                           opts->lr, opts->epochs, opts->init_scale);
    json out = {{"method", opts->method}};
    if (opts->method == "crossfit") {
      out["folds"] = opts->folds;
      out["estimate"] = crossfit_aipw(learner, learner, learner, data,
                                      parse_folds_flag(opts->folds), opts->master_seed,
                                      opts->clip);
    } else if (opts->method == "crossbag") {
      const OobPlan oob = build_oob_plan(opts->master_seed, static_cast<int>(data.rows()),
                                         opts->rho, opts->v0);
      double tau2 = 0.0;
      const double estimate =
          crossbag_estimate(aipw_nuisances(data, learner), aipw_handle(opts->clip), data,
                            oob, opts->workers, &tau2);
      out["estimate"] = estimate;
      out["tau2_hat"] = tau2;
      out["v_dagger"] = oob.bag_count();
    } else if (opts->method == "adaptive") {
      AdaptiveOptions options;
      options.rho = opts->rho;
      options.v0 = opts->v0;
      options.growth = opts->growth;
      options.max_rounds = opts->max_rounds;
      options.workers = opts->workers;
      const AdaptiveResult a = adaptive_crossbag(
          aipw_nuisances(data, learner), aipw_handle(opts->clip), data,
          {opts->epsilon, opts->delta}, opts->master_seed, options);
      out["estimate"] = a.estimate;
      out["tau2_hat"] = a.tau2_hat;
      out["v_dagger"] = a.v_dagger;
      out["halfwidth"] = a.halfwidth;
      out["rounds"] = a.rounds;
      out["converged"] = a.converged;
    } else {
      throw CLI::ValidationError("--method", "expected crossfit, crossbag, or adaptive");
    }
    std::cout << out.dump(2) << "\n";
  });
  return 0;
}

// ------------------------------------------------------------- stability

int cmd_stability(CLI::App& app, const json& cfg) {
  struct StabilityOpts {
    std::string input;
    std::string column = "estimate";
    std::string method;
    double epsilon = 0.0;
    double delta = 0.0;
  };
  auto opts = std::make_shared<StabilityOpts>();
  from_config(cfg, "input", opts->input);
  from_config(cfg, "column", opts->column);
  from_config(cfg, "method", opts->method);
  from_config(cfg, "epsilon", opts->epsilon);
  from_config(cfg, "delta", opts->delta);

  auto* cmd = app.add_subcommand("stability", "Recompute delta_hat and r from a CSV");
  cmd->add_option("--input", opts->input, "estimates CSV")->required(!cfg.contains("input"));
  cmd->add_option("--column", opts->column, "numeric column to analyze");
  cmd->add_option("--method", opts->method, "filter rows on a 'method' column");
  cmd->add_option("--epsilon", opts->epsilon, "stability tolerance")
      ->required(!cfg.contains("epsilon"));
  cmd->add_option("--delta", opts->delta, "stability probability")
      ->required(!cfg.contains("delta"));
  cmd->add_option("--config", "JSON config file")->expected(1);

  cmd->callback([opts] {
    std::ifstream in(opts->input);
    if (!in) throw std::runtime_error("cannot open " + opts->input);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(opts->input + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header;
    {
      std::stringstream ss(line);
      std::string f;
      while (std::getline(ss, f, ',')) header.push_back(f);
    }
    int value_col = -1, method_col = -1;
    for (int j = 0; j < static_cast<int>(header.size()); ++j) {
      if (header[j] == opts->column) value_col = j;
      if (header[j] == "method") method_col = j;
    }
    if (value_col < 0)
      throw std::runtime_error(opts->input + ": no column '" + opts->column + "'");
    if (!opts->method.empty() && method_col < 0)
      throw std::runtime_error(opts->input + ": no column 'method' to filter on");

    std::vector<double> values;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::vector<std::string> fields;
      std::stringstream ss(line);
      std::string f;
      while (std::getline(ss, f, ',')) fields.push_back(f);
      if (!line.empty() && line.back() == ',') fields.emplace_back();
      if (!opts->method.empty() && fields[method_col] != opts->method) continue;
      const double v = std::stod(fields[value_col]);
      if (std::isfinite(v)) values.push_back(v);
    }
    const Vector estimates =
        Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    const StabilityReport r = make_stability_report(estimates, {opts->epsilon, opts->delta});
    json out = {{"epsilon", opts->epsilon},
                {"delta", opts->delta},
                {"count", static_cast<int>(values.size())},
                {"pair_count", r.pair_count},
                {"delta_hat", r.delta_hat},
                {"ratio", r.ratio}};
    std::cout << out.dump(2) << "\n";
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seed-stable machine learning estimation via subbagging and cross-bagging"};
  app.require_subcommand(1);
  try {
    const json cfg = load_config_file(argc, argv);
    cmd_bounds(app, cfg);
    cmd_sim1(app, cfg);
    cmd_sim2(app, cfg);
    cmd_estimate(app, cfg);
    cmd_stability(app, cfg);
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
