#include <algorithm>
#include <cmath>

#include "dpolymer/overlap.hpp"
#include "dpolymer/transfer_engine.hpp"

namespace dpolymer {

RunResult run(const RunSpec& spec) {
  const DisorderField field(spec.seed, spec.env, spec.dim);
  return run(spec, field);
}

RunResult run(const RunSpec& spec, const DisorderField& field) {
  validate(ModelSpec{spec.dim, spec.beta, spec.env});
  if (spec.horizon < 0) throw ValidationError("horizon: must be >= 0");
  if (field.dim() != spec.dim) throw ValidationError("field dimension differs from the run dimension");
  if (spec.exact_doob && !spec.green) throw ValidationError("exact_doob requires a Green table (n0)");
  const auto* binary = std::get_if<BinaryEnv>(&spec.env);
  if (spec.exact_doob && !binary) throw CapabilityError("exact Doob decomposition requires a binary environment");
  if (DiamondLayout::predicted_size(spec.dim, spec.horizon) > spec.max_front_sites)
    throw BudgetError("front size at the horizon exceeds max_front_sites");

  const int n0 = spec.green ? spec.green->n0 : 0;
  const EnvScalars scalars = env_scalars(spec.env, spec.beta, n0, spec.dim);

  RunResult result;
  ProcessTrace& trace = result.trace;
  trace.dim = spec.dim;
  std::vector<int> checkpoints = spec.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());

  PolymerFront prev = PolymerFront::origin(spec.dim);
  if (spec.green) trace.J0 = front_green_form(prev, *spec.green);
  if (std::binary_search(checkpoints.begin(), checkpoints.end(), 0)) result.checkpoints.push_back(prev);

  double bracket = 0.0, A = 0.0;
  trace.records.reserve(static_cast<std::size_t>(spec.horizon));
  for (int n = 1; n <= spec.horizon; ++n) {
    StepInfo info;
    PolymerFront cur = advance(prev, field, scalars, &info, spec.rescale);
    TraceRecord rec;
    rec.n = n;
    rec.logW = cur.log_W();
    rec.I = info.overlap_I;
    rec.M_inc = info.ratio - 1.0;
    bracket += scalars.chi * info.overlap_I;
    rec.bracket = bracket;

    // Strict comparison keeps the first, i.e. lexicographically smallest, maximiser.
    double best = -1.0;
    cur.for_each([&](const Site& x, double w) {
      if (w > best) {
        best = w;
        rec.argmax_site = x;
      }
    });
    rec.max_endpoint_mass = best / cur.weight_sum();
    rec.max_p2p_log = cur.log_scale() + std::log(best);

    if (spec.green) {
      if (spec.exact_doob) {
        const DoobStep s = doob_step(prev, cur, *binary, scalars, *spec.green, spec.max_env_configs);
        rec.J = s.J;
        A += s.drift;
        rec.A = A;
        rec.N = rec.J - trace.J0 - A;
      } else {
        rec.J = front_green_form(cur, *spec.green);
      }
    }
    trace.records.push_back(rec);
    if (std::binary_search(checkpoints.begin(), checkpoints.end(), n)) result.checkpoints.push_back(cur);
    prev = std::move(cur);
  }
  return result;
}

}  // namespace dpolymer
