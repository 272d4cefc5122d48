#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "dpolymer/environment.hpp"
#include "dpolymer/lattice.hpp"
#include "dpolymer/lattice_green.hpp"

namespace dpolymer {

// Dense storage for the sites {x : |x|_1 <= n, parity(x) = parity(n)}.
//
// Sites are grouped in rows sharing the prefix (x_0 .. x_{d-2}); the row of a
// prefix p has half-width r = n - |p|_1 and holds x_{d-1} = -r, -r+2, .., r.
// Rows appear in lexicographic prefix order, so storage order is the
// lexicographic order on sites.
class DiamondLayout {
 public:
  static constexpr std::int64_t kNoRow = -1;

  DiamondLayout() = default;
  DiamondLayout(int dim, int radius);

  int dim() const { return dim_; }
  int radius() const { return radius_; }
  std::size_t size() const { return size_; }
  std::size_t row_count() const { return row_prefix_.size(); }

  const Site& row_prefix(std::size_t row) const { return row_prefix_[row]; }
  int row_half_width(std::size_t row) const { return row_half_width_[row]; }
  std::size_t row_offset(std::size_t row) const { return row_offset_[row]; }

  // Offset of the row whose prefix is p, or kNoRow.
  std::int64_t find_row(const Site& prefix) const;
  std::optional<std::size_t> index_of(const Site& x) const;
  Site site_at(std::size_t row, int j) const;

  // Predicted cell count for a radius without building the layout.
  static std::size_t predicted_size(int dim, int radius);

 private:
  std::size_t prefix_slot(const Site& prefix) const;

  int dim_ = 1;
  int radius_ = 0;
  std::size_t size_ = 0;
  std::vector<Site> row_prefix_;
  std::vector<int> row_half_width_;
  std::vector<std::size_t> row_offset_;
  std::vector<std::int64_t> prefix_table_;  // dense over [-R, R]^{d-1}
};

// Point-to-point partition functions What_n(x) = weights(x) * exp(log_scale)
// on the reachable parity-correct sites at time n.
class PolymerFront {
 public:
  static PolymerFront origin(int dim);

  int dim() const { return layout_.dim(); }
  int time() const { return layout_.radius(); }
  double log_scale() const { return log_scale_; }
  const DiamondLayout& layout() const { return layout_; }
  const std::vector<double>& weights() const { return weights_; }
  double weight_sum() const { return weight_sum_; }

  double log_W() const { return log_scale_ + std::log(weight_sum_); }
  double W() const { return std::exp(log_W()); }
  double weight_at(const Site& x) const;
  double endpoint_mass(const Site& x) const { return weight_at(x) / weight_sum_; }
  double log_p2p(const Site& x) const;

  // Callback receives (site, weight) in lexicographic site order.
  template <class F>
  void for_each(F&& f) const {
    for (std::size_t r = 0; r < layout_.row_count(); ++r) {
      const std::size_t off = layout_.row_offset(r);
      const int hw = layout_.row_half_width(r);
      for (int j = 0; j <= hw; ++j) f(layout_.site_at(r, j), weights_[off + static_cast<std::size_t>(j)]);
    }
  }

  SiteMap endpoint_law() const;  // mu_n, zero entries omitted
  SiteMap p2p_values() const;    // What_n(x), zero entries omitted

  // Reconstruct from a serialized list of (site, weight) pairs.
  static PolymerFront from_entries(int dim, int time, double log_scale, const std::vector<std::pair<Site, double>>& entries);

 private:
  friend struct FrontBuilder;
  DiamondLayout layout_;
  std::vector<double> weights_;
  double log_scale_ = 0.0;
  double weight_sum_ = 0.0;
};

// Quantities produced as a by-product of one transfer step n-1 -> n.
struct StepInfo {
  double ratio = 1.0;      // W_n / W_{n-1}
  double overlap_I = 1.0;  // sum_x (D mu_{n-1})(x)^2
};

// What_n(x) = exp(beta omega_{n,x} - lambda(beta)) (D What_{n-1})(x).
// With rescale = true the weights are renormalised by an exact power of two so
// that the largest one lies in [1, 2).
template <FieldLike Field>
PolymerFront advance(const PolymerFront& front, const Field& field, const EnvScalars& scalars,
                     StepInfo* info = nullptr, bool rescale = true);

// D mu_{n-1} as a dense front-shaped vector on the time-n layout; entries sum to 1.
std::vector<double> smoothed_law(const PolymerFront& previous, DiamondLayout& layout_out);

struct TraceRecord {
  int n = 0;
  double logW = 0.0;
  double I = 0.0;
  double J = std::numeric_limits<double>::quiet_NaN();
  double M_inc = 0.0;
  double bracket = 0.0;
  double A = std::numeric_limits<double>::quiet_NaN();
  double N = std::numeric_limits<double>::quiet_NaN();
  Site argmax_site{};
  double max_endpoint_mass = 0.0;
  double max_p2p_log = 0.0;
};

struct ProcessTrace {
  int dim = 1;
  double J0 = std::numeric_limits<double>::quiet_NaN();
  std::vector<TraceRecord> records;  // records[k].n == k + 1
};

struct RunSpec {
  int dim = 1;
  double beta = 0.0;
  EnvSpec env = BinaryEnv{};
  Seed128 seed{};
  int horizon = 100;
  std::vector<int> checkpoints;
  // When set, J_n = (mu_n, G0 mu_n) is tracked.
  std::optional<GreenTable> green;
  // Exact Doob decomposition of J (binary environments only).
  bool exact_doob = false;
  std::uint64_t max_env_configs = 1u << 20;
  std::size_t max_front_sites = 50'000'000;
  bool rescale = true;
};

struct RunResult {
  ProcessTrace trace;
  std::vector<PolymerFront> checkpoints;
};

RunResult run(const RunSpec& spec);
RunResult run(const RunSpec& spec, const DisorderField& field);

// Runs the recursion on a field, invoking visit(front, info) after every step
// until it returns false or the horizon is reached.
template <FieldLike Field, class Visitor>
void run_steps(const Field& field, const EnvScalars& scalars, int horizon, std::size_t max_front_sites,
               Visitor&& visit) {
  PolymerFront front = PolymerFront::origin(field.dim());
  for (int n = 1; n <= horizon; ++n) {
    if (DiamondLayout::predicted_size(field.dim(), n) > max_front_sites)
      throw BudgetError("front size exceeds the configured memory budget (max_front_sites)");
    StepInfo info;
    front = advance(front, field, scalars, &info);
    if (!visit(static_cast<const PolymerFront&>(front), static_cast<const StepInfo&>(info))) return;
  }
}

// First-passage record for W along a trace.
struct StoppingScan {
  double u = 1.0;
  double K = 2.0;
  std::optional<int> tau_u;
  std::optional<int> tau_Ku;
  std::optional<int> sigma_uK;  // first n >= tau_u with W_n <= u / K
  double W_at_tau_u = std::numeric_limits<double>::quiet_NaN();
  double W_at_tau_Ku = std::numeric_limits<double>::quiet_NaN();
  double W_at_sigma = std::numeric_limits<double>::quiet_NaN();
  double bracket_increment = std::numeric_limits<double>::quiet_NaN();  // <M>_{tau_Ku} - <M>_{tau_u}
  int horizon = 0;
  bool step_bound_ok = true;  // u <= W_{tau_u} < L u whenever tau_u is hit
};

StoppingScan stopping_scan(const ProcessTrace& trace, double u, double K, double L);

}  // namespace dpolymer
