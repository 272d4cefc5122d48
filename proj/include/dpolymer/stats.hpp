#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>

#include "dpolymer/philox.hpp"

namespace dpolymer {

inline constexpr double kDefaultZ = 3.0;

struct EstimateWithCI {
  std::string name;
  double mean = 0.0;
  std::size_t n_samples = 0;
  double std_error = 0.0;
  double ci_half_width = 0.0;
  double z = kDefaultZ;
  std::string config_hash;

  double lower() const { return mean - ci_half_width; }
  double upper() const { return mean + ci_half_width; }
};

// How replicas of a Monte Carlo experiment are seeded and scheduled. Replica
// i uses replica_seed(master, i); results never depend on `workers`.
struct ReplicaPlan {
  Seed128 master{};
  std::size_t replicas = 100;
  int workers = 0;  // 0: hardware concurrency
  double z = kDefaultZ;
  std::size_t max_front_sites = 50'000'000;
  std::string config_hash;
};

// Sample mean with the unbiased standard error; ci_half_width = z * std_error.
EstimateWithCI summarize(std::string name, std::span<const double> samples, double z = kDefaultZ);

// Wilson score interval for a binomial proportion at normal quantile z.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z);

// Hoeffding upper confidence bound for the mean of samples in [lo, hi] at
// confidence 1 - delta.
double hoeffding_upper(double mean, std::size_t n, double lo, double hi, double delta);

}  // namespace dpolymer
