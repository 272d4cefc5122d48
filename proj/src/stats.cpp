#include "dpolymer/stats.hpp"

#include <cmath>
#include <thread>

#include "dpolymer/lattice.hpp"
#include "dpolymer/parallel.hpp"

namespace dpolymer {

int default_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

EstimateWithCI summarize(std::string name, std::span<const double> samples, double z) {
  EstimateWithCI e;
  e.name = std::move(name);
  e.z = z;
  e.n_samples = samples.size();
  if (samples.empty()) throw ValidationError("summarize: no samples");
  // Two-pass mean and variance, summed in index order.
  double sum = 0.0;
  for (double v : samples) sum += v;
  e.mean = sum / static_cast<double>(samples.size());
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double v : samples) ss += (v - e.mean) * (v - e.mean);
    const double var = ss / static_cast<double>(samples.size() - 1);
    e.std_error = std::sqrt(var / static_cast<double>(samples.size()));
  }
  e.ci_half_width = z * e.std_error;
  return e;
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double hoeffding_upper(double mean, std::size_t n, double lo, double hi, double delta) {
  return mean + (hi - lo) * std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(n)));
}

}  // namespace dpolymer
