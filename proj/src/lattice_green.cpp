#include "dpolymer/lattice_green.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace dpolymer {

std::vector<Site> WalkKernel::offsets() const {
  std::vector<Site> out;
  out.reserve(static_cast<std::size_t>(2 * dim));
  for (int i = 0; i < dim; ++i) {
    out.push_back(unit_site(i, -1));
    out.push_back(unit_site(i, +1));
  }
  return out;
}

SiteMap convolve(const SiteMap& f, const WalkKernel& kernel) {
  SiteMap out;
  const double w = kernel.step_probability();
  const auto offs = kernel.offsets();
  for (const auto& [y, v] : f)
    for (const Site& e : offs) out[y + e] += w * v;
  return out;
}

SiteMap convolve_power(SiteMap f, const WalkKernel& kernel, int steps) {
  for (int i = 0; i < steps; ++i) f = convolve(f, kernel);
  return f;
}

namespace {

std::vector<double> log_factorials(int m) {
  std::vector<double> lf(static_cast<std::size_t>(m) + 1);
  for (int k = 0; k <= m; ++k) lf[static_cast<std::size_t>(k)] = std::lgamma(k + 1.0);
  return lf;
}

// sum_{n > N} n^{-s} by Euler-Maclaurin from a = N + 1.
double zeta_tail(double s, int N) {
  const double a = N + 1.0;
  const double f = std::pow(a, -s);
  return a * f / (s - 1.0) + 0.5 * f + s * f / (12.0 * a) -
         s * (s + 1) * (s + 2) * f / (720.0 * a * a * a) +
         s * (s + 1) * (s + 2) * (s + 3) * (s + 4) * f / (30240.0 * a * a * a * a * a);
}

// Least-squares fit of y_n = sum_k c_k n^{-k}, k < order, over n in [lo, hi].
std::array<double, 3> fit_inverse_powers(const std::vector<double>& y, int lo, int hi, int order) {
  double ata[3][3] = {};
  double atb[3] = {};
  for (int n = lo; n <= hi; ++n) {
    double basis[3] = {1.0, 1.0 / n, 1.0 / (static_cast<double>(n) * n)};
    for (int i = 0; i < order; ++i) {
      atb[i] += basis[i] * y[static_cast<std::size_t>(n)];
      for (int j = 0; j < order; ++j) ata[i][j] += basis[i] * basis[j];
    }
  }
  // Gaussian elimination with partial pivoting.
  for (int c = 0; c < order; ++c) {
    int piv = c;
    for (int r = c + 1; r < order; ++r)
      if (std::abs(ata[r][c]) > std::abs(ata[piv][c])) piv = r;
    std::swap(ata[c], ata[piv]);
    std::swap(atb[c], atb[piv]);
    for (int r = c + 1; r < order; ++r) {
      const double m = ata[r][c] / ata[c][c];
      for (int k = c; k < order; ++k) ata[r][k] -= m * ata[c][k];
      atb[r] -= m * atb[c];
    }
  }
  std::array<double, 3> coef{};
  for (int c = order - 1; c >= 0; --c) {
    double s = atb[c];
    for (int k = c + 1; k < order; ++k) s -= ata[c][k] * coef[static_cast<std::size_t>(k)];
    coef[static_cast<std::size_t>(c)] = s / ata[c][c];
  }
  return coef;
}

struct TailFit {
  double estimate = 0.0;
  double error = 0.0;
};

// Tail sum_{n > N} a_n for a_n ~ n^{-s} (c0 + c1/n + c2/n^2).
TailFit fitted_tail(const std::vector<double>& a, int N, double s) {
  std::vector<double> y(a.size());
  for (std::size_t n = 1; n < a.size(); ++n) y[n] = a[n] * std::pow(static_cast<double>(n), s);
  const int lo = std::max(1, N / 2);
  auto tail_of = [&](const std::array<double, 3>& c, int order) {
    double t = 0.0;
    for (int k = 0; k < order; ++k) t += c[static_cast<std::size_t>(k)] * zeta_tail(s + k, N);
    return t;
  };
  const double t3 = tail_of(fit_inverse_powers(y, lo, N, 3), 3);
  const double t2 = tail_of(fit_inverse_powers(y, lo, N, 2), 2);
  // Second 3-term fit on the upper half of the window probes fit stability.
  const double t3b = tail_of(fit_inverse_powers(y, (lo + N) / 2, N, 3), 3);
  return {t3, std::max(std::abs(t3 - t2), std::abs(t3 - t3b))};
}

}  // namespace

std::vector<double> return_probability_sequence(int dim, int n_max) {
  check_dimension(dim);
  if (n_max < 0) throw ValidationError("n_max must be nonnegative");
  const auto lf = log_factorials(2 * n_max);
  const auto N = static_cast<std::size_t>(n_max) + 1;
  std::vector<double> u1(N);
  for (std::size_t k = 0; k < N; ++k) u1[k] = std::exp(lf[2 * k] - 2.0 * lf[k] - 2.0 * static_cast<double>(k) * std::log(2.0));
  if (dim == 1) return u1;
  std::vector<double> u(N);
  for (std::size_t k = 0; k < N; ++k) u[k] = u1[k] * u1[k];  // the 2d walk factorises after a 45 degree rotation
  std::vector<double> log_u1(N);
  for (std::size_t k = 0; k < N; ++k) log_u1[k] = std::log(u1[k]);
  for (int level = 3; level <= dim; ++level) {
    const double lq = std::log(1.0 / level);
    const double lr = std::log(1.0 - 1.0 / level);
    std::vector<double> log_prev(N);
    for (std::size_t k = 0; k < N; ++k) log_prev[k] = std::log(u[k]);
    std::vector<double> next(N);
    for (std::size_t n = 0; n < N; ++n) {
      double acc = 0.0;
      for (std::size_t j = 0; j <= n; ++j) {
        const double lt = lf[2 * n] - lf[2 * j] - lf[2 * (n - j)] + 2.0 * static_cast<double>(j) * lq +
                          2.0 * static_cast<double>(n - j) * lr + log_u1[j] + log_prev[n - j];
        acc += std::exp(lt);
      }
      next[n] = acc;
    }
    u = std::move(next);
  }
  return u;
}

double return_probability(int dim, int n, int max_steps) {
  if (n < 1) throw ValidationError("return_probability requires n >= 1");
  if (2 * static_cast<long long>(n) > max_steps)
    throw BudgetError("return_probability: 2n exceeds the convolution budget");
  return return_probability_sequence(dim, n)[static_cast<std::size_t>(n)];
}

GreenTable green_g0(int dim, int n0, int max_steps) {
  check_dimension(dim);
  if (n0 < 1) throw ValidationError("green_g0 requires n0 >= 1");
  if (2 * static_cast<long long>(n0) > max_steps) throw BudgetError("green_g0: 2 n0 exceeds the convolution budget");
  const WalkKernel kernel(dim);
  GreenTable t;
  t.dim = dim;
  t.n0 = n0;
  SiteMap f{{Site{}, 1.0}};
  for (int k = 1; k <= n0; ++k) {
    f = convolve(convolve(f, kernel), kernel);
    for (const auto& [x, v] : f) t.values[x] += v;
  }
  double s1 = 0.0, s4 = 0.0;
  for (const auto& [x, v] : t.values) {
    s1 += v;
    s4 += v * v * v * v;
  }
  t.g0_at_0 = t.at(Site{});
  t.norm1 = s1;
  t.norm4 = std::pow(s4, 0.25);
  return t;
}

GreenSeries green_g_at_0(int dim, double tolerance, int max_terms) {
  check_dimension(dim);
  if (dim <= 2) throw ValidationError("green_g_at_0: the series diverges for d <= 2 (recurrent walk)");
  if (!(tolerance > 0.0)) throw ValidationError("green_g_at_0: tolerance must be positive");
  const double s = 0.5 * dim;
  GreenSeries best;
  int N = std::min(256, max_terms);
  while (true) {
    const auto u = return_probability_sequence(dim, N);
    GreenSeries r;
    r.truncation_point = N;
    for (int n = 1; n <= N; ++n) r.partial_sum += u[static_cast<std::size_t>(n)];
    double cmax = 0.0;
    for (int n = 1; n <= std::min(200, N); ++n)
      cmax = std::max(cmax, u[static_cast<std::size_t>(n)] * std::pow(static_cast<double>(n), s));
    r.envelope_constant = 2.0 * cmax;
    r.tail_bound = r.envelope_constant * zeta_tail(s, N);
    if (r.tail_bound <= tolerance) {
      r.value = r.partial_sum;
      r.tail_error = r.tail_bound;
      r.tolerance_met = true;
      return r;
    }
    const TailFit fit = fitted_tail(u, N, s);
    r.used_tail_fit = true;
    r.tail_estimate = fit.estimate;
    r.tail_error = fit.error;
    r.value = r.partial_sum + fit.estimate;
    r.tolerance_met = fit.error <= tolerance;
    if (r.tolerance_met || N >= max_terms) return r;
    N = std::min(2 * N, max_terms);
  }
}

ReturnProbability return_probability_renewal(int dim, int n_terms) {
  check_dimension(dim);
  if (dim <= 2) throw ValidationError("return_probability_renewal: p = 1 for d <= 2");
  const auto u = return_probability_sequence(dim, n_terms);
  const auto N = static_cast<std::size_t>(n_terms);
  std::vector<double> f(N + 1, 0.0);
  for (std::size_t k = 1; k <= N; ++k) {
    double acc = u[k];
    for (std::size_t j = 1; j < k; ++j) acc -= f[j] * u[k - j];
    f[k] = acc;
  }
  ReturnProbability r;
  r.truncation_point = n_terms;
  double partial = 0.0;
  for (std::size_t k = 1; k <= N; ++k) partial += f[k];
  const TailFit fit = fitted_tail(f, n_terms, 0.5 * dim);
  r.tail_estimate = fit.estimate;
  r.tail_error = fit.error;
  r.p = partial + fit.estimate;
  r.green_value = r.p / (1.0 - r.p);
  return r;
}

Beta2Result beta2_solve(const EnvSpec& env, int dim, double g_at_0, double tolerance) {
  validate(env);
  Beta2Result r;
  r.g_at_0 = g_at_0;
  if (is_degenerate(env)) {
    r.infinite = true;
    return r;
  }
  if (std::isinf(g_at_0)) {
    // chi(beta) > 0 for every beta > 0, so chi * g(0) = infinity.
    r.beta2 = 0.0;
    return r;
  }
  const auto sup = chi_supremum(env);
  if (sup && *sup * g_at_0 <= 1.0) {
    r.infinite = true;
    return r;
  }
  auto excess = [&](double b) { return chi(env, b) * g_at_0 - 1.0; };
  double lo = 0.0, hi = 1.0;
  while (excess(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) {
      r.infinite = true;
      return r;
    }
  }
  (void)dim;
  while (hi - lo > tolerance * std::max(1.0, lo) || std::abs(excess(0.5 * (lo + hi))) > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (excess(mid) < 0.0 ? lo : hi) = mid;
    ++r.iterations;
  }
  r.beta2 = 0.5 * (lo + hi);
  r.residual = std::abs(excess(r.beta2));
  return r;
}

Beta2Result beta2_solve(const EnvSpec& env, int dim, double tolerance) {
  check_dimension(dim);
  const double g = dim <= 2 ? std::numeric_limits<double>::infinity() : green_g_at_0(dim, 1e-9).value;
  return beta2_solve(env, dim, g, tolerance);
}

int minimal_n0(const EnvSpec& env, double beta, int dim, int max_n0) {
  const double c = chi(env, beta);
  if (!(c > 0.0)) throw CapabilityError("J process unavailable: chi(beta) = 0 (beta <= beta_2)");
  const auto u = return_probability_sequence(dim, max_n0);
  double acc = 0.0;
  for (int n = 1; n <= max_n0; ++n) {
    acc += u[static_cast<std::size_t>(n)];
    if (c * acc > 1.0) return n;
  }
  throw CapabilityError("J process unavailable: chi(beta) g0(0) <= 1 for every n0 <= " + std::to_string(max_n0) +
                        " (beta <= beta_2)");
}

}  // namespace dpolymer
