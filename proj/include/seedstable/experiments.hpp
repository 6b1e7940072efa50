#ifndef SEEDSTABLE_EXPERIMENTS_HPP
#define SEEDSTABLE_EXPERIMENTS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "seedstable/core.hpp"
#include "seedstable/learners.hpp"
#include "seedstable/simulate.hpp"
#include "seedstable/stability.hpp"

namespace seedstable {

// Experiment 1: seed stability of a neural net with and without subbagging
// at a fixed test point.
struct Sim1Config {
  int n = 100;
  int seeds = 200;
  int v_bags = 320;
  double rho = 2.0 / 3.0;
  double epsilon = 0.1;
  double delta = 0.1;
  NeuralNetParams net;
  std::uint64_t master_seed = 1;
  int workers = 1;
};

struct Sim1Result {
  DgpSample sample;
  Vector test_point;
  std::vector<std::uint64_t> seed_list;
  Vector unbagged;
  Vector subbagged;
};

Sim1Result run_sim1(const Sim1Config& config);

// Experiment 2: seed stability of the AIPW ATE across cross-fitting
// schemes, seed averaging, and adaptive cross-bagging.
struct Sim2Config {
  int n = 100;
  int seeds = 100;
  int trees = 100;
  int min_leaf = 5;
  double rho = 0.5;
  double epsilon = 0.01;
  double delta = 0.01;
  double clip = 0.01;
  int v0 = 50;
  double growth = 1.5;
  int max_rounds = 20;
  int avg_seeds = 80;
  std::vector<std::string> methods = {"crossfit-2", "crossfit-10", "crossfit-loo",
                                      "adaptive"};
  std::uint64_t master_seed = 1;
  int workers = 1;
};

struct Sim2MethodRun {
  double estimate = 0.0;
  int v_dagger = -1;      // adaptive only
  double elapsed_ms = 0.0;
  std::string error;      // non-empty when the run failed (e.g. degenerate split)
};

struct Sim2Result {
  DgpSample sample;
  std::vector<std::uint64_t> seed_list;
  // method name -> one run per master seed
  std::map<std::string, std::vector<Sim2MethodRun>> runs;
};

Sim2Result run_sim2(const Sim2Config& config);

// Estimates of the runs that succeeded, in seed order.
Vector successful_estimates(const std::vector<Sim2MethodRun>& runs);

// Logarithmic epsilon grid [1e-4, 1] used for the stability phase curves.
std::vector<double> epsilon_grid(int points = 50);

}  // namespace seedstable

#endif
