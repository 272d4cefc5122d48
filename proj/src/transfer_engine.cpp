#include "dpolymer/transfer_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpolymer {

DiamondLayout::DiamondLayout(int dim, int radius) : dim_(dim), radius_(radius) {
  check_dimension(dim);
  if (radius < 0) throw ValidationError("DiamondLayout: negative radius");
  const int pd = dim - 1;
  const std::size_t side = 2 * static_cast<std::size_t>(radius) + 1;
  std::size_t table_size = 1;
  for (int i = 0; i < pd; ++i) table_size *= side;
  prefix_table_.assign(table_size, kNoRow);

  // Odometer over [-R, R]^{pd} in lexicographic order.
  std::vector<int> p(static_cast<std::size_t>(pd), -radius);
  std::size_t offset = 0;
  for (std::size_t slot = 0; slot < table_size; ++slot) {
    int norm = 0;
    for (int c : p) norm += std::abs(c);
    if (norm <= radius) {
      Site prefix;
      for (int i = 0; i < pd; ++i) prefix[i] = p[static_cast<std::size_t>(i)];
      const int hw = radius - norm;
      prefix_table_[slot] = static_cast<std::int64_t>(row_prefix_.size());
      row_prefix_.push_back(prefix);
      row_half_width_.push_back(hw);
      row_offset_.push_back(offset);
      offset += static_cast<std::size_t>(hw) + 1;
    }
    for (int i = pd - 1; i >= 0; --i) {
      auto& c = p[static_cast<std::size_t>(i)];
      if (++c <= radius) break;
      c = -radius;
    }
  }
  size_ = offset;
}

std::size_t DiamondLayout::prefix_slot(const Site& prefix) const {
  const std::size_t side = 2 * static_cast<std::size_t>(radius_) + 1;
  std::size_t slot = 0;
  for (int i = 0; i < dim_ - 1; ++i) slot = slot * side + static_cast<std::size_t>(prefix[i] + radius_);
  return slot;
}

std::int64_t DiamondLayout::find_row(const Site& prefix) const {
  for (int i = 0; i < dim_ - 1; ++i)
    if (std::abs(prefix[i]) > radius_) return kNoRow;
  return prefix_table_[prefix_slot(prefix)];
}

std::optional<std::size_t> DiamondLayout::index_of(const Site& x) const {
  for (int i = dim_; i < kMaxDim; ++i)
    if (x[i] != 0) return std::nullopt;
  Site prefix = x;
  prefix[dim_ - 1] = 0;
  const std::int64_t row = find_row(prefix);
  if (row == kNoRow) return std::nullopt;
  const auto r = static_cast<std::size_t>(row);
  const int hw = row_half_width_[r];
  const int xd = x[dim_ - 1];
  if (std::abs(xd) > hw || ((xd + hw) & 1)) return std::nullopt;
  return row_offset_[r] + static_cast<std::size_t>((xd + hw) / 2);
}

Site DiamondLayout::site_at(std::size_t row, int j) const {
  Site s = row_prefix_[row];
  s[dim_ - 1] = -row_half_width_[row] + 2 * j;
  return s;
}

std::size_t DiamondLayout::predicted_size(int dim, int radius) {
  // count[k] = #{p in Z^{d-1} : |p|_1 = k}
  std::vector<double> count(static_cast<std::size_t>(radius) + 1, 0.0);
  count[0] = 1.0;
  for (int level = 0; level < dim - 1; ++level) {
    std::vector<double> next(count.size(), 0.0);
    for (int k = 0; k <= radius; ++k) {
      if (count[static_cast<std::size_t>(k)] == 0.0) continue;
      for (int j = 0; k + j <= radius; ++j)
        next[static_cast<std::size_t>(k + j)] += count[static_cast<std::size_t>(k)] * (j == 0 ? 1.0 : 2.0);
    }
    count = std::move(next);
  }
  double total = 0.0;
  for (int k = 0; k <= radius; ++k) total += count[static_cast<std::size_t>(k)] * (radius - k + 1);
  return total > 1e18 ? static_cast<std::size_t>(1e18) : static_cast<std::size_t>(total);
}

struct FrontBuilder {
  static PolymerFront make(DiamondLayout layout, std::vector<double> weights, double log_scale, double sum) {
    PolymerFront f;
    f.layout_ = std::move(layout);
    f.weights_ = std::move(weights);
    f.log_scale_ = log_scale;
    f.weight_sum_ = sum;
    return f;
  }
};

PolymerFront PolymerFront::origin(int dim) {
  return FrontBuilder::make(DiamondLayout(dim, 0), {1.0}, 0.0, 1.0);
}

double PolymerFront::weight_at(const Site& x) const {
  const auto idx = layout_.index_of(x);
  return idx ? weights_[*idx] : 0.0;
}

double PolymerFront::log_p2p(const Site& x) const { return log_scale_ + std::log(weight_at(x)); }

SiteMap PolymerFront::endpoint_law() const {
  SiteMap m;
  for_each([&](const Site& x, double w) {
    if (w > 0.0) m.emplace_hint(m.end(), x, w / weight_sum_);
  });
  return m;
}

SiteMap PolymerFront::p2p_values() const {
  SiteMap m;
  for_each([&](const Site& x, double w) {
    if (w > 0.0) m.emplace_hint(m.end(), x, std::exp(log_scale_ + std::log(w)));
  });
  return m;
}

PolymerFront PolymerFront::from_entries(int dim, int time, double log_scale,
                                        const std::vector<std::pair<Site, double>>& entries) {
  DiamondLayout layout(dim, time);
  std::vector<double> w(layout.size(), 0.0);
  double sum = 0.0;
  for (const auto& [x, v] : entries) {
    const auto idx = layout.index_of(x);
    if (!idx) throw ValidationError("front entry " + to_string(x, dim) + " is not reachable at time " + std::to_string(time));
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("front entry weights must be finite and nonnegative");
    w[*idx] = v;
    sum += v;
  }
  if (!(sum > 0.0)) throw ValidationError("front has zero total weight");
  return FrontBuilder::make(std::move(layout), std::move(w), log_scale, sum);
}

namespace {

// Visits every site of the time-n layout with the unnormalised smoothed value
// (D w_{n-1})(x) in the scale of the previous front.
template <class Sink>
void smooth_rows(const PolymerFront& prev, const DiamondLayout& layout, Sink&& sink) {
  const int d = layout.dim();
  const DiamondLayout& pl = prev.layout();
  const std::vector<double>& pw = prev.weights();
  const double step = 1.0 / (2.0 * d);
  struct NeighbourRow {
    std::size_t offset;
    int half_width;
  };
  std::vector<NeighbourRow> nbr;
  nbr.reserve(static_cast<std::size_t>(2 * d));
  for (std::size_t r = 0; r < layout.row_count(); ++r) {
    const Site& prefix = layout.row_prefix(r);
    const int hw = layout.row_half_width(r);
    const std::size_t off = layout.row_offset(r);
    const std::int64_t same = pl.find_row(prefix);
    nbr.clear();
    for (int i = 0; i < d - 1; ++i) {
      for (int sgn : {-1, 1}) {
        Site q = prefix;
        q[i] += sgn;
        const std::int64_t row = pl.find_row(q);
        if (row != DiamondLayout::kNoRow)
          nbr.push_back({pl.row_offset(static_cast<std::size_t>(row)), pl.row_half_width(static_cast<std::size_t>(row))});
      }
    }
    const double* same_row =
        same == DiamondLayout::kNoRow ? nullptr : pw.data() + pl.row_offset(static_cast<std::size_t>(same));
    Site x = prefix;
    for (int j = 0; j <= hw; ++j) {
      const int xd = -hw + 2 * j;
      double s = 0.0;
      if (same_row) {
        if (j >= 1) s += same_row[j - 1];
        if (j <= hw - 1) s += same_row[j];
      }
      for (const auto& nb : nbr)
        if (std::abs(xd) <= nb.half_width) s += pw[nb.offset + static_cast<std::size_t>((xd + nb.half_width) / 2)];
      x[d - 1] = xd;
      sink(x, off + static_cast<std::size_t>(j), s * step);
    }
  }
}

}  // namespace

template <FieldLike Field>
PolymerFront advance(const PolymerFront& prev, const Field& field, const EnvScalars& scalars, StepInfo* info,
                     bool rescale) {
  if (field.dim() != prev.dim()) throw ValidationError("advance: field and front dimensions differ");
  const int n = prev.time() + 1;
  DiamondLayout layout(prev.dim(), n);
  std::vector<double> w(layout.size());
  const double beta = scalars.beta;
  const double lambda = scalars.lambda_beta;
  double sum_sq = 0.0, sum = 0.0, max_w = 0.0;
  // Two-slot memo of the site weight: finite-support environments repeat
  // the same few values.
  double memo_omega[2] = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double memo_weight[2] = {0.0, 0.0};
  auto site_weight = [&](double omega) {
    if (omega == memo_omega[0]) return memo_weight[0];
    if (omega == memo_omega[1]) return memo_weight[1];
    memo_omega[1] = memo_omega[0];
    memo_weight[1] = memo_weight[0];
    memo_omega[0] = omega;
    memo_weight[0] = std::exp(beta * omega - lambda);
    return memo_weight[0];
  };
  smooth_rows(prev, layout, [&](const Site& x, std::size_t idx, double pre) {
    sum_sq += pre * pre;
    const double v = pre == 0.0 ? 0.0 : site_weight(field.value(n, x)) * pre;
    w[idx] = v;
    sum += v;
    max_w = std::max(max_w, v);
  });
  if (!std::isfinite(sum) || !(sum > 0.0))
    throw std::runtime_error("advance: nonfinite or vanishing front weight at time " + std::to_string(n));
  const double prev_sum = prev.weight_sum();
  // Without disorder the mass is conserved exactly; pin it so W_n = 1 holds
  // bit-for-bit even when 1/(2d) is not a power of two.
  if (beta == 0.0) sum = prev_sum;
  if (info) {
    info->ratio = sum / prev_sum;
    info->overlap_I = sum_sq / (prev_sum * prev_sum);
  }
  double log_scale = prev.log_scale();
  if (rescale) {
    const int k = std::ilogb(max_w);
    if (k != 0) {
      for (double& v : w) v = std::ldexp(v, -k);
      sum = std::ldexp(sum, -k);
      log_scale += k * std::log(2.0);
    }
  }
  return FrontBuilder::make(std::move(layout), std::move(w), log_scale, sum);
}

template PolymerFront advance<DisorderField>(const PolymerFront&, const DisorderField&, const EnvScalars&, StepInfo*,
                                             bool);
template PolymerFront advance<TabulatedField>(const PolymerFront&, const TabulatedField&, const EnvScalars&, StepInfo*,
                                              bool);

std::vector<double> smoothed_law(const PolymerFront& previous, DiamondLayout& layout_out) {
  layout_out = DiamondLayout(previous.dim(), previous.time() + 1);
  std::vector<double> out(layout_out.size());
  const double total = previous.weight_sum();
  smooth_rows(previous, layout_out, [&](const Site&, std::size_t idx, double pre) { out[idx] = pre / total; });
  return out;
}

StoppingScan stopping_scan(const ProcessTrace& trace, double u, double K, double L) {
  if (!(u >= 1.0)) throw ValidationError("stopping_scan requires u >= 1");
  if (!(K > 1.0)) throw ValidationError("stopping_scan requires K > 1");
  StoppingScan r;
  r.u = u;
  r.K = K;
  r.horizon = static_cast<int>(trace.records.size());
  auto W_at = [&](int n) { return n == 0 ? 1.0 : std::exp(trace.records[static_cast<std::size_t>(n - 1)].logW); };
  auto bracket_at = [&](int n) { return n == 0 ? 0.0 : trace.records[static_cast<std::size_t>(n - 1)].bracket; };
  for (int n = 0; n <= r.horizon; ++n) {
    const double w = W_at(n);
    if (!r.tau_u && w >= u) {
      r.tau_u = n;
      r.W_at_tau_u = w;
    }
    if (!r.tau_Ku && w >= K * u) {
      r.tau_Ku = n;
      r.W_at_tau_Ku = w;
    }
    if (r.tau_u && !r.sigma_uK && w <= u / K) {
      r.sigma_uK = n;
      r.W_at_sigma = w;
    }
  }
  if (r.tau_u) r.step_bound_ok = r.W_at_tau_u >= u && (*r.tau_u == 0 ? r.W_at_tau_u < L * u || u <= 1.0 : r.W_at_tau_u < L * u);
  if (r.tau_u && r.tau_Ku) r.bracket_increment = bracket_at(*r.tau_Ku) - bracket_at(*r.tau_u);
  return r;
}

}  // namespace dpolymer
