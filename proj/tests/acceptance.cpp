// Acceptance harness: one criterion per invocation, one PASS/FAIL line each.
// Usage: acceptance <criterion 1-10> [cli-binary-path]

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "seedstable/bagging.hpp"
#include "seedstable/core.hpp"
#include "seedstable/crossbag.hpp"
#include "seedstable/csv.hpp"
#include "seedstable/estimators.hpp"
#include "seedstable/experiments.hpp"
#include "seedstable/parallel.hpp"
#include "seedstable/rng.hpp"
#include "seedstable/simulate.hpp"
#include "seedstable/stability.hpp"
#include "seedstable/student_t.hpp"
#include "t_oracle.hpp"

using namespace seedstable;
namespace fs = std::filesystem;

namespace {

int workers() { return std::min(8, default_workers()); }

bool report(int criterion, bool pass, const std::string& detail) {
  std::cout << "C" << criterion << ": " << (pass ? "PASS" : "FAIL") << " - " << detail
            << "\n";
  return pass;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- criterion 1

bool c1_worst_case_bag_count() {
  const long v = theorem1_min_bags({0.1, 0.1}, 1, 0.25);
  return report(1, v == 320,
                "theorem1 worst-case bag count for (0.1, 0.1, k=1) is " + std::to_string(v) +
                    " (expected 320)");
}

// ---------------------------------------------------------------- criterion 2

bool c2_subbagging_stabilizes_the_net() {
  Sim1Config config;
  config.workers = workers();
  const Sim1Result result = run_sim1(config);
  const StabilityTarget target{config.epsilon, config.delta};
  const double r_unbagged = make_stability_report(result.unbagged, target).ratio;
  const double r_subbagged = make_stability_report(result.subbagged, target).ratio;
  const bool pass = r_unbagged >= 2.0 && r_subbagged <= 1.0;
  return report(2, pass,
                "neural net seed instability r=" + fmt(r_unbagged) +
                    " (need >= 2), subbagged r=" + fmt(r_subbagged) + " (need <= 1)");
}

// ---------------------------------------------------------------- criterion 3

bool c3_crossbagging_stabilizes_aipw() {
  Sim2Config config;
  config.methods = {"crossfit-2", "crossfit-loo", "adaptive"};
  config.workers = workers();
  const Sim2Result result = run_sim2(config);
  const StabilityTarget target{config.epsilon, config.delta};
  auto ratio = [&](const std::string& method) {
    return make_stability_report(successful_estimates(result.runs.at(method)), target).ratio;
  };
  const double r2 = ratio("crossfit-2");
  const double rloo = ratio("crossfit-loo");
  const double rad = ratio("adaptive");
  const bool pass = rad <= 2.0 && r2 >= 10.0 && rloo >= 5.0;
  return report(3, pass,
                "AIPW seed instability: crossfit-2 r=" + fmt(r2) +
                    " (need >= 10), crossfit-loo r=" + fmt(rloo) +
                    " (need >= 5), adaptive r=" + fmt(rad) + " (need <= 2)");
}

// ---------------------------------------------------------------- criterion 4

bool c4_tau2_calibration() {
  const Dataset data = gen_dgp_b(100, 42).dataset;
  const auto specs = aipw_nuisances(data, LearnerSpec::make_forest(50, 5));
  const EstimatorHandle handle = aipw_handle(0.01);
  const int v_dagger = 200;
  const int reps = 200;
  Vector psi(reps), tau2(reps);
  parallel_for(reps, workers(), [&](long j) {
    const BagPlan plan =
        build_bag_plan(derive_seed(9000, static_cast<std::uint64_t>(j)), 100, 0.5, v_dagger);
    const OobPlan oob = make_oob_plan(plan, 100);
    double t2 = 0.0;
    psi(j) = crossbag_estimate(specs, handle, data, oob, 1, &t2);
    tau2(j) = t2;
  });
  const double mean = psi.mean();
  const double var = (psi.array() - mean).square().sum() / (reps - 1);
  const double predicted = tau2.mean() / v_dagger;
  const double ratio = var / predicted;
  const bool pass = ratio >= 0.7 && ratio <= 1.3;
  return report(4, pass,
                "observed seed variance / (mean tau2 / V) = " + fmt(ratio) +
                    " (need within [0.7, 1.3])");
}

// ---------------------------------------------------------------- criterion 5

bool c5_gradient_matches_finite_differences() {
  Dataset data;
  const int n = 5;
  data.features = Matrix::Zero(n, 1);
  data.outcome.resize(n);
  Vector a(n);
  Rng init(501);
  for (int i = 0; i < n; ++i) {
    data.outcome(i) = init.uniform();
    a(i) = i % 2 == 0 ? 1.0 : 0.0;
  }
  data.treatment = a;

  Rng rng(502);
  const double h = 1e-6;
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    NuisancePredictions eta;
    eta.pi.resize(n);
    eta.mu1.resize(n);
    eta.mu0.resize(n);
    for (int i = 0; i < n; ++i) {
      eta.pi(i) = rng.uniform(0.06, 0.94);
      eta.mu1(i) = rng.uniform();
      eta.mu0(i) = rng.uniform();
    }
    const Vector grad = aipw_gradient(data, eta);
    for (int k = 0; k < 3 * n; ++k) {
      NuisancePredictions hi = eta, lo = eta;
      Vector& hb = k < n ? hi.pi : (k < 2 * n ? hi.mu1 : hi.mu0);
      Vector& lb = k < n ? lo.pi : (k < 2 * n ? lo.mu1 : lo.mu0);
      hb(k % n) += h;
      lb(k % n) -= h;
      const double fd = (aipw_ate(data, hi) - aipw_ate(data, lo)) / (2.0 * h);
      worst = std::max(worst,
                       std::abs(grad(k) - fd) / std::max(1.0, std::abs(grad(k))));
    }
  }
  return report(5, worst <= 1e-6,
                "max relative gradient vs central-difference error " + fmt(worst) +
                    " (need <= 1e-6)");
}

// ---------------------------------------------------------------- criterion 6

bool c6_t_quantiles_match_quadrature() {
  double worst = 0.0;
  for (int df : {1, 5, 10, 100})
    for (double p : {0.95, 0.975, 0.995})
      worst = std::max(worst, std::abs(t_quantile(df, p) - t_oracle::quantile(df, p)));
  return report(6, worst <= 1e-5,
                "max |t_quantile - quadrature oracle| = " + fmt(worst) + " (need <= 1e-5)");
}

// ---------------------------------------------------------------- criterion 7

bool c7_oob_coverage() {
  Rng rng(701);
  int checked = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 4 + static_cast<int>(rng.below(60));
    const double rho = 0.15 + 0.7 * rng.uniform();
    const int target = 1 + static_cast<int>(rng.below(20));
    const int m = static_cast<int>(rho * n);
    if (m < 1 || m >= n) continue;
    const OobPlan oob =
        build_oob_plan(derive_seed(702, static_cast<std::uint64_t>(rep)), n, rho, target);
    if (oob.counts.minCoeff() < target)
      return report(7, false, "a row fell short of its OOB target");
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(n);
    for (int v = 0; v < oob.bag_count(); ++v) {
      std::vector<bool> in_bag(n, false);
      for (int i : oob.plan.pairs[v].indices) in_bag[i] = true;
      if (static_cast<int>(oob.oob_rows[v].size()) != n - oob.plan.m)
        return report(7, false, "an OOB row list is not the bag complement");
      for (int i : oob.oob_rows[v]) {
        if (in_bag[i]) return report(7, false, "an in-bag row was marked out of bag");
        counts(i)++;
      }
    }
    if ((counts - oob.counts).cwiseAbs().maxCoeff() != 0)
      return report(7, false, "stored OOB counts disagree with a recount");
    ++checked;
  }
  return report(7, checked >= 40,
                "OOB coverage and complement checks held on " + std::to_string(checked) +
                    " random configurations");
}

// ---------------------------------------------------------------- criterion 8

bool c8_null_ate_with_true_propensity() {
  const DgpSample sample = gen_dgp_b(10000, 801);
  const int n = 10000;
  NuisancePredictions eta;
  eta.pi = clip_propensity(*sample.true_propensity, 0.01);
  // The outcome model has no treatment term, so the true mu1 and mu0 agree.
  Vector mu(n);
  for (int i = 0; i < n; ++i) {
    const auto& w = sample.dataset.features;
    mu(i) = 1.0 / (1.0 + std::exp(-(w(i, 0) + w(i, 1) * w(i, 2) - 3.0)));
  }
  eta.mu1 = mu;
  eta.mu0 = mu;
  const double estimate = aipw_ate(sample.dataset, eta);
  return report(8, std::abs(estimate) <= 0.02,
                "AIPW with the true propensity on a null-effect sample: estimate=" +
                    fmt(estimate) + " (need |.| <= 0.02)");
}

// ---------------------------------------------------------------- criterion 9

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<missing " + path.string() + ">";
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool run_command(const std::string& cmd) { return std::system(cmd.c_str()) == 0; }

bool c9_deterministic_cli_artifacts(const std::string& cli) {
  if (cli.empty()) return report(9, false, "no CLI binary path supplied");
  const fs::path root = "acceptance_c9_tmp";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string q = "'" + cli + "'";

  const std::string sim1 = q + " sim1 --n 60 --seeds 5 --v-bags 20 --epochs 40 --hidden 6";
  const std::string sim2 =
      q + " sim2 --n 50 --seeds 4 --trees 10 --v0 5 --epsilon 0.05 --delta 0.05"
          " --methods crossfit-2,crossfit-loo,adaptive";
  bool ok = true;
  ok &= run_command(sim1 + " --workers 1 --out " + (root / "s1a").string() + " > /dev/null");
  ok &= run_command(sim1 + " --workers 7 --out " + (root / "s1b").string() + " > /dev/null");
  ok &= run_command(sim2 + " --workers 1 --out " + (root / "s2a").string() + " > /dev/null");
  ok &= run_command(sim2 + " --workers 5 --out " + (root / "s2b").string() + " > /dev/null");
  if (!ok) {
    fs::remove_all(root);
    return report(9, false, "a CLI invocation failed");
  }

  std::vector<std::string> mismatched;
  for (const char* name : {"sim1_dataset.csv", "sim1_estimates.csv", "sim1_report.json"})
    if (slurp(root / "s1a" / name) != slurp(root / "s1b" / name)) mismatched.push_back(name);
  for (const char* name : {"sim2_dataset.csv", "sim2_estimates.csv", "sim2_report.json"})
    if (slurp(root / "s2a" / name) != slurp(root / "s2b" / name)) mismatched.push_back(name);

  // The estimate subcommand must also print byte-identical JSON.
  write_dataset_csv(gen_dgp_b(40, 9).dataset, (root / "data.csv").string());
  const std::string est = q + " estimate --input " + (root / "data.csv").string() +
                          " --learner forest --trees 10 --method adaptive --v0 4"
                          " --epsilon 0.05 --delta 0.05";
  ok &= run_command(est + " --workers 1 > " + (root / "est1.json").string());
  ok &= run_command(est + " --workers 6 > " + (root / "est2.json").string());
  if (!ok || slurp(root / "est1.json") != slurp(root / "est2.json"))
    mismatched.push_back("estimate stdout");

  fs::remove_all(root);
  if (!mismatched.empty()) {
    std::string detail = "artifacts differ across runs/workers:";
    for (const auto& name : mismatched) detail += " " + name;
    return report(9, false, detail);
  }
  return report(9, true,
                "sim1/sim2/estimate artifacts are byte-identical across reruns and "
                "worker counts");
}

// --------------------------------------------------------------- criterion 10

bool c10_brute_force_equivalences() {
  // Empirical instability against a naive double loop.
  Rng rng(1001);
  for (int rep = 0; rep < 30; ++rep) {
    const int s = 2 + static_cast<int>(rng.below(25));
    Vector v(s);
    for (int i = 0; i < s; ++i) v(i) = rng.uniform();
    const double eps = 0.5 * rng.uniform();
    long exceed = 0;
    for (int i = 0; i < s; ++i)
      for (int j = i + 1; j < s; ++j)
        if (std::abs(v(i) - v(j)) > eps) ++exceed;
    const double brute = static_cast<double>(exceed) / (0.5 * s * (s - 1));
    if (std::abs(empirical_delta(v, eps) - brute) > 1e-12)
      return report(10, false, "empirical_delta disagrees with the double loop");
  }

  // tau2 against a hand-transcribed instance (see the unit suite for the
  // arithmetic): expected value 0.1.
  {
    BagPlan plan;
    plan.rho = 0.5;
    plan.m = 1;
    plan.pairs = {{1, {0}}, {2, {0}}, {3, {1}}, {4, {1}}};
    const OobPlan oob = make_oob_plan(plan, 2);
    RawOobPredictions cache;
    cache.raw = {{{0.9}}, {{0.7}}, {{0.3}}, {{0.1}}};
    const PooledPredictions pooled = pool_oob(cache, oob, 1);
    Matrix grad(2, 1);
    grad << 2.0, -1.0;
    if (std::abs(tau_squared(grad, cache, pooled, oob) - 0.1) > 1e-12)
      return report(10, false, "tau_squared disagrees with the hand-computed instance");
  }

  // Incremental pooling against a from-scratch pooling, bit for bit.
  {
    const Dataset data = gen_dgp_b(24, 1002).dataset;
    const auto specs = aipw_nuisances(data, LearnerSpec::make_forest(5, 2));
    OobPlan inc = build_oob_plan(13, 24, 0.5, 3);
    RawOobPredictions inc_cache;
    fit_oob_models(specs, data, inc, inc_cache, 0, 2);
    const int prev = inc.bag_count();
    extend_oob_plan(inc, 7);
    fit_oob_models(specs, data, inc, inc_cache, prev, 3);

    const OobPlan fresh = build_oob_plan(13, 24, 0.5, 7);
    RawOobPredictions fresh_cache;
    fit_oob_models(specs, data, fresh, fresh_cache, 0, 1);
    const Matrix a = pool_oob(inc_cache, inc, 3).pooled;
    const Matrix b = pool_oob(fresh_cache, fresh, 3).pooled;
    if (inc.bag_count() != fresh.bag_count() || !(a.array() == b.array()).all())
      return report(10, false, "incremental pooling is not bit-identical to from-scratch");
  }

  return report(10, true,
                "instability, tau2, and incremental pooling match brute-force references");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <criterion 1-10> [cli-binary]\n";
    return 2;
  }
  const int criterion = std::atoi(argv[1]);
  const std::string cli = argc > 2 ? argv[2] : "";
  bool pass = false;
  try {
    switch (criterion) {
      case 1: pass = c1_worst_case_bag_count(); break;
      case 2: pass = c2_subbagging_stabilizes_the_net(); break;
      case 3: pass = c3_crossbagging_stabilizes_aipw(); break;
      case 4: pass = c4_tau2_calibration(); break;
      case 5: pass = c5_gradient_matches_finite_differences(); break;
      case 6: pass = c6_t_quantiles_match_quadrature(); break;
      case 7: pass = c7_oob_coverage(); break;
      case 8: pass = c8_null_ate_with_true_propensity(); break;
      case 9: pass = c9_deterministic_cli_artifacts(cli); break;
      case 10: pass = c10_brute_force_equivalences(); break;
      default:
        std::cerr << "unknown criterion " << criterion << "\n";
        return 2;
    }
  } catch (const std::exception& e) {
    report(criterion, false, std::string("exception: ") + e.what());
    return 1;
  }
  return pass ? 0 : 1;
}
