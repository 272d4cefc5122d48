#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dpolymer/environment.hpp"
#include "dpolymer/stats.hpp"

namespace dpolymer {

// Size-biased environment by the spine construction: a simple random walk X
// (stream kSpineWalk), the base field omega (kBaseField) and an independent
// tilted stream (kTiltedOverlay) whose values replace omega at (k, X_k).
struct SpineSample {
  Seed128 seed{};
  int horizon = 0;
  std::vector<Site> path;  // path[0] = origin
  DisorderField base;
  DisorderField tilted;
};

std::vector<Site> spine_walk(const Seed128& seed, int dim, int horizon);
SpineSample spine_sample(const Seed128& seed, const ModelSpec& model, int horizon);

// log W_s under R independent spine-tilted fields (replica i uses
// replica_seed(master, i)).
std::vector<double> sb_partition_samples(const ModelSpec& model, const ReplicaPlan& plan, int s);

// log theta_{m,y} W_s on a field.
double window_log_partition(const DisorderField& field, double beta, int m, const Site& y, int s);

inline double default_window_threshold(int n, int dim) { return std::pow(static_cast<double>(n), 4.0 * dim); }
inline double default_window_epsilon(int dim) { return 1.0 / (12.0 * dim); }

struct WindowHit {
  int m = 0;
  Site y{};
  double logW = 0.0;
};

struct WindowScanResult {
  int n = 0;
  int s = 0;
  double threshold = 0.0;
  bool spine_aligned = false;
  std::vector<WindowHit> hits;  // ordered by (m, y)
  std::uint64_t scanned = 0;
  double max_logW = -1e300;
};

// Full scan over (m, y) in [1, n-s] x [-n, n]^d. Throws BudgetError when the
// predicted number of site updates exceeds max_cost.
WindowScanResult window_scan(const DisorderField& field, double beta, int n, int s, double threshold,
                             double max_cost = 1e9, int workers = 1);

// Scan of the windows (j s, X_{j s}), j = 0 .. floor(n/s) - 1, along a spine.
WindowScanResult spine_aligned_scan(const DisorderField& field, const std::vector<Site>& spine, double beta, int n,
                                    int s, double threshold);

}  // namespace dpolymer
