#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dpolymer/environment.hpp"
#include "dpolymer/stats.hpp"

namespace dpolymer {

struct FreeEnergyEstimate {
  std::vector<int> grid;
  std::vector<EstimateWithCI> per_n;  // (1/n) log W_n
  std::vector<double> envelope;       // running max over the grid of the means
  std::vector<EstimateWithCI> mean_W;  // W_n, for the mean-one check
};

// Replicas are shared across beta values with the same plan, so estimates at
// different beta are paired (common random numbers).
FreeEnergyEstimate estimate_free_energy(const ModelSpec& model, const ReplicaPlan& plan, std::vector<int> grid);

enum class CertificateMode { kSumOverEndpoints, kWhole };

std::string to_string(CertificateMode mode);
double certificate_threshold(CertificateMode mode, int n, int dim);

struct VSDCertificate {
  int n = 0;
  CertificateMode mode = CertificateMode::kSumOverEndpoints;
  EstimateWithCI estimate;  // rho_n or E[sqrt W_n]
  double ucb = 0.0;
  bool hoeffding = false;
  double threshold = 0.0;
  bool certified = false;
  double implied_free_energy_bound = 0.0;
  std::string note;
};

struct CertificateOptions {
  CertificateMode mode = CertificateMode::kSumOverEndpoints;
  bool hoeffding = false;
  double hoeffding_delta = 1e-3;
};

// One certificate per n in `grid`, all from the same replicas; the run stops
// scanning at the first certified n when stop_at_first is set.
std::vector<VSDCertificate> fractional_moment_certificates(const ModelSpec& model, const ReplicaPlan& plan,
                                                           const std::vector<int>& grid,
                                                           const CertificateOptions& options = {},
                                                           bool stop_at_first = false);

VSDCertificate fractional_moment_certificate(const ModelSpec& model, const ReplicaPlan& plan, int n,
                                             const CertificateOptions& options = {});

enum class TailQuantity { kMaxW, kMaxP2P };

struct TailOptions {
  int initial_horizon = 1000;
  int max_horizon = 64000;
  // A replica is retired once W_n < cutoff * min(u); by optional stopping the
  // probability that it would still reach u afterwards is below cutoff.
  double cutoff = 1e-4;
  double plateau_tolerance = 0.01;
};

struct TailPoint {
  double u = 1.0;
  std::size_t hits = 0;
  EstimateWithCI survival;
  double band_low = 0.0;   // 1/(L u) for max W, 0 for max p2p
  double band_high = 1.0;  // 1/u
};

struct TailCurve {
  TailQuantity quantity = TailQuantity::kMaxW;
  double L = 1.0;
  std::vector<TailPoint> points;
  int horizon = 0;
  bool plateau_reached = false;
  std::size_t retired = 0;    // stopped by the cutoff rule
  std::size_t truncated = 0;  // still alive at the final horizon
  double slope = 0.0;         // weighted log-log fit of survival against u
  double slope_std_error = 0.0;
  bool slope_consistent_with_minus_one = false;
  std::vector<std::string> warnings;
};

TailCurve tail_scan(const ModelSpec& model, const ReplicaPlan& plan, TailQuantity quantity,
                    const std::vector<double>& u_grid, const TailOptions& options = {});

struct BabacProbe {
  EstimateWithCI sqrt_W;         // E[sqrt W_n]
  EstimateWithCI p_event;        // P(A)
  EstimateWithCI p_tilted_miss;  // P_tilde_n(A^c)
  double rhs = 0.0;              // sqrt P(A) + sqrt P_tilde(A^c)
  double rhs_std_error = 0.0;
  bool pass = true;  // lhs <= rhs + 4 sigma
};

using FieldPredicate = std::function<bool(const DisorderField&)>;

// Left side from base fields of replicas 0..R-1, P(A) from the same fields,
// the size-biased side from spine fields of replicas R..2R-1.
BabacProbe babac_bound_probe(const ModelSpec& model, const ReplicaPlan& plan, int n, const FieldPredicate& event);

struct TailIndex {
  bool degenerate = false;
  std::size_t k = 0;
  double alpha = 0.0;  // Hill estimate of the survival exponent
  double std_error = 0.0;
  std::string caveat;
};

// Hill estimator on the top k order statistics of logarithms given in an
// arbitrary base (log_base = e for natural logs).
TailIndex hill_estimate(std::vector<double> log_values, double log_base, std::size_t k = 0);

TailIndex tail_index_diagnostic(const ModelSpec& model, const ReplicaPlan& plan, int s);

}  // namespace dpolymer
