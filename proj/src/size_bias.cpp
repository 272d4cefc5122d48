#include "dpolymer/size_bias.hpp"

#include <memory>

#include "dpolymer/parallel.hpp"
#include "dpolymer/transfer_engine.hpp"

namespace dpolymer {

std::vector<Site> spine_walk(const Seed128& seed, int dim, int horizon) {
  check_dimension(dim);
  const PhiloxKey key = derive_key(seed, Stream::kSpineWalk);
  std::vector<Site> path{Site{}};
  path.reserve(static_cast<std::size_t>(horizon) + 1);
  for (int k = 1; k <= horizon; ++k) {
    const double u = to_open_unit(philox4x32_10({static_cast<std::uint32_t>(k), 0, 0, 0}, key));
    const int dir = std::min(2 * dim - 1, static_cast<int>(u * 2 * dim));
    path.push_back(path.back() + unit_site(dir / 2, dir % 2 ? 1 : -1));
  }
  return path;
}

SpineSample spine_sample(const Seed128& seed, const ModelSpec& model, int horizon) {
  validate(model);
  if (horizon < 0) throw ValidationError("spine horizon must be >= 0");
  auto overlay = std::make_shared<SpineOverlay>();
  overlay->path = spine_walk(seed, model.dim, horizon);
  overlay->beta = model.beta;
  overlay->tilted_key = derive_key(seed, Stream::kTiltedOverlay);
  DisorderField base(seed, model.env, model.dim);
  DisorderField tilted = base.with_spine(overlay);
  return SpineSample{seed, horizon, overlay->path, std::move(base), std::move(tilted)};
}

std::vector<double> sb_partition_samples(const ModelSpec& model, const ReplicaPlan& plan, int s) {
  validate(model);
  if (s < 1) throw ValidationError("s must be >= 1");
  return map_replicas(plan.replicas, plan.workers, [&](std::size_t i) {
    const SpineSample sample = spine_sample(replica_seed(plan.master, i), model, s);
    return window_log_partition(sample.tilted, model.beta, 0, Site{}, s);
  });
}

double window_log_partition(const DisorderField& field, double beta, int m, const Site& y, int s) {
  const EnvScalars scalars = env_scalars(field.env(), beta, 0, field.dim());
  const DisorderField window = field.shifted(m, y);
  double logW = 0.0;
  run_steps(window, scalars, s, static_cast<std::size_t>(-1), [&](const PolymerFront& f, const StepInfo&) {
    logW = f.log_W();
    return true;
  });
  return logW;
}

namespace {

void check_scan(int n, int s, double threshold) {
  if (s < 1 || s > n) throw ValidationError("window scan requires 1 <= s <= n");
  if (!(threshold > 0.0)) throw ValidationError("threshold must be > 0");
}

}  // namespace

WindowScanResult window_scan(const DisorderField& field, double beta, int n, int s, double threshold,
                             double max_cost, int workers) {
  check_scan(n, s, threshold);
  const int d = field.dim();
  const double windows = (n - s) * std::pow(2.0 * n + 1.0, d);
  double per_window = 0.0;
  for (int k = 1; k <= s; ++k) per_window += static_cast<double>(DiamondLayout::predicted_size(d, k));
  if (windows * per_window > max_cost)
    throw BudgetError("full window scan exceeds max_cost (" + std::to_string(windows * per_window) + " site updates)");

  const double log_threshold = std::log(threshold);
  std::vector<int> ms;
  for (int m = 1; m <= n - s; ++m) ms.push_back(m);
  auto rows = map_replicas(ms.size(), workers, [&](std::size_t idx) {
    const int m = ms[idx];
    WindowScanResult part;
    std::vector<int> y(static_cast<std::size_t>(d), -n);
    while (true) {
      const Site site = site_from(y);
      const double lw = window_log_partition(field, beta, m, site, s);
      ++part.scanned;
      part.max_logW = std::max(part.max_logW, lw);
      if (lw >= log_threshold) part.hits.push_back({m, site, lw});
      int i = d - 1;
      for (; i >= 0; --i) {
        if (++y[static_cast<std::size_t>(i)] <= n) break;
        y[static_cast<std::size_t>(i)] = -n;
      }
      if (i < 0) break;
    }
    return part;
  });
  WindowScanResult out;
  out.n = n;
  out.s = s;
  out.threshold = threshold;
  for (auto& r : rows) {
    out.scanned += r.scanned;
    out.max_logW = std::max(out.max_logW, r.max_logW);
    out.hits.insert(out.hits.end(), r.hits.begin(), r.hits.end());
  }
  return out;
}

WindowScanResult spine_aligned_scan(const DisorderField& field, const std::vector<Site>& spine, double beta, int n,
                                    int s, double threshold) {
  check_scan(n, s, threshold);
  if (spine.size() < static_cast<std::size_t>(n) + 1) throw ValidationError("spine shorter than the scan horizon");
  WindowScanResult out;
  out.n = n;
  out.s = s;
  out.threshold = threshold;
  out.spine_aligned = true;
  const double log_threshold = std::log(threshold);
  for (int j = 0; j < n / s; ++j) {
    const int m = j * s;
    const Site y = spine[static_cast<std::size_t>(m)];
    const double lw = window_log_partition(field, beta, m, y, s);
    ++out.scanned;
    out.max_logW = std::max(out.max_logW, lw);
    if (lw >= log_threshold) out.hits.push_back({m, y, lw});
  }
  return out;
}

}  // namespace dpolymer
