#pragma once

// Theoretical convergence rates and small-eta approximation bounds.

#include <cstdint>
#include <optional>

#include "gibbsnet/graph.hpp"

namespace gibbsnet {

// Per-sweep KL contraction factor of the two-node chain:
//   1 / ((1 + eta alpha_f)^2 (1 + eta alpha_g)^2).
double two_node_rate(double alpha_f, double alpha_g, double eta);

// KL bound after k sweeps for merely convex potentials: w2_init_sq / (k eta).
double convex_rate_bound(double w2_init_sq, double eta, std::uint64_t k);

struct NetworkSummary {
  double min_col_sum = 0.0;  // min_j sum_i sigma_ij
  double min_row_sum = 0.0;  // min_i sum_j sigma_ij
  double min_alpha_f = 0.0;
  double min_alpha_g = 0.0;
  int n = 1;
  int m = 1;

  static NetworkSummary from(const BipartiteNetwork& net);
};

enum class Step { Y, X };

// Log-concavity coefficient along the interpolation t in [0, 1]. A term whose
// numerator vanishes contributes 0 even when its min-alpha is 0; otherwise a
// zero min-alpha makes the bracket infinite and c_t = 0.
double c_t(const NetworkSummary& s, double eta, double t, Step step);

struct BipartiteExponent {
  double C = 0.0;
  // Some min-alpha is 0, so at least one integrand vanishes on a set of
  // positive measure and the bound exp(-k C) is vacuous or weak.
  bool degenerate = false;
};

BipartiteExponent bipartite_C(const NetworkSummary& s, double eta, double quad_tol = 1e-10);

struct MixingEstimate {
  std::uint64_t sweeps = 0;  // smallest k with rate^k kl0 <= 2 delta^2
  double big_o = 0.0;        // (beta_f + beta_g) d / (alpha_f + alpha_g) log(kl0 / delta^2)
};

// Throws when the two-node factor is 1 (no contraction).
MixingEstimate mixing_sweeps_exact_rgo(double alpha_f, double alpha_g, double beta_f,
                                       double beta_g, int d, double eta, double kl0, double delta);

// f = 0, g alpha-strongly convex and beta-smooth.
double small_eta_kl_bound_example2(int d, double alpha, double beta, double eta);
double small_eta_tv_bound_example2(int d, double alpha, double beta, double eta);

// g = |y - u|^2 / (2 sigma_sq), f alpha_f-strongly convex and minimized at u.
double small_eta_tv_bound_prop3(int d, double alpha_f, double sigma_sq, double eta);
double small_eta_kl_bound_prop3(int d, double alpha_f, double sigma_sq, double eta);

struct SmallEtaBounds {
  double kl_bound;
  double tv_bound;
};

struct RateReport {
  double per_sweep_contraction = 1.0;  // in (0, 1]
  double C = 0.0;
  bool degenerate = false;
  // Set on two-node networks, where the sharper two-node factor is used.
  std::optional<double> two_node_factor;
  std::optional<SmallEtaBounds> small_eta_bounds;

  double kl_bound_at_k(std::uint64_t k, double kl0) const;
  // Smallest k with kl_bound_at_k(k, kl0) <= 2 delta^2. Throws when the
  // contraction is 1 and kl0 > 2 delta^2.
  std::uint64_t mixing_sweeps(double delta, double kl0) const;
};

// Small-eta bounds are attached for two-node networks matching either setup:
// f = 0 with a quadratic g, or an isotropic quadratic g whose center minimizes f.
RateReport rate_report(const BipartiteNetwork& net, double quad_tol = 1e-10);

}  // namespace gibbsnet
