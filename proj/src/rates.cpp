#include "gibbsnet/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gibbsnet/quadrature.hpp"

namespace gibbsnet {

double two_node_rate(double alpha_f, double alpha_g, double eta) {
  const double a = 1.0 + eta * alpha_f;
  const double b = 1.0 + eta * alpha_g;
  return 1.0 / (a * a * b * b);
}

double convex_rate_bound(double w2_init_sq, double eta, std::uint64_t k) {
  if (k == 0) throw Error("convex_rate_bound: k must be >= 1");
  if (!(eta > 0.0)) throw Error("convex_rate_bound: eta must be positive");
  return w2_init_sq / (static_cast<double>(k) * eta);
}

NetworkSummary NetworkSummary::from(const BipartiteNetwork& net) {
  NetworkSummary s;
  s.n = net.n();
  s.m = net.m();
  s.min_row_sum = kInfinity;
  s.min_col_sum = kInfinity;
  s.min_alpha_f = kInfinity;
  s.min_alpha_g = kInfinity;
  for (int i = 0; i < net.n(); ++i) {
    s.min_row_sum = std::min(s.min_row_sum, net.row_sum(i));
    s.min_alpha_f = std::min(s.min_alpha_f, net.f(i).alpha());
  }
  for (int j = 0; j < net.m(); ++j) {
    s.min_col_sum = std::min(s.min_col_sum, net.col_sum(j));
    s.min_alpha_g = std::min(s.min_alpha_g, net.g(j).alpha());
  }
  return s;
}

namespace {

double term(double numerator, double denominator) {
  if (numerator == 0.0) return 0.0;
  if (denominator == 0.0) return kInfinity;
  return numerator / denominator;
}

}  // namespace

double c_t(const NetworkSummary& s, double eta, double t, Step step) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error("c_t: t must lie in [0, 1]");
  if (!(eta > 0.0)) throw Error("c_t: eta must be positive");
  const double sum = step == Step::Y ? s.min_col_sum : s.min_row_sum;
  const double near = step == Step::Y ? s.min_alpha_f : s.min_alpha_g;
  const double far = step == Step::Y ? s.min_alpha_g : s.min_alpha_f;
  if (!(sum > 0.0)) throw Error("c_t: network summary has an isolated vertex");
  const double mn = static_cast<double>(s.m) * static_cast<double>(s.n);
  const double bracket =
      term(eta * t * (1.0 - t), sum) + term(mn * (1.0 - t) * (1.0 - t), near) + term(t * t, far);
  if (bracket == 0.0) return kInfinity;
  return std::isinf(bracket) ? 0.0 : 1.0 / bracket;
}

BipartiteExponent bipartite_C(const NetworkSummary& s, double eta, double quad_tol) {
  BipartiteExponent out;
  out.degenerate = s.min_alpha_f == 0.0 || s.min_alpha_g == 0.0;
  // Both integrands contain both alphas, so either one being 0 leaves c_t
  // nonzero only at an endpoint.
  if (out.degenerate) return out;
  const auto integral = [&](Step step) {
    return adaptive_simpson([&](double t) { return c_t(s, eta, t, step); }, 0.0, 1.0,
                            0.5 * quad_tol)
        .value;
  };
  out.C = eta / s.n * integral(Step::Y) + eta / s.m * integral(Step::X);
  return out;
}

MixingEstimate mixing_sweeps_exact_rgo(double alpha_f, double alpha_g, double beta_f,
                                       double beta_g, int d, double eta, double kl0,
                                       double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error("mixing_sweeps: delta must lie in (0, 1)");
  const double rate = two_node_rate(alpha_f, alpha_g, eta);
  MixingEstimate out;
  out.big_o = (beta_f + beta_g) * d / (alpha_f + alpha_g) * std::log(kl0 / (delta * delta));
  RateReport report;
  report.per_sweep_contraction = rate;
  if (rate >= 1.0) throw Error("mixing_sweeps: contraction factor is 1, the chain need not mix");
  out.sweeps = report.mixing_sweeps(delta, kl0);
  return out;
}

double small_eta_kl_bound_example2(int d, double alpha, double beta, double eta) {
  return d * alpha / (2.0 * beta) * std::expm1(2.0 * beta * beta * eta / alpha);
}

double small_eta_tv_bound_example2(int d, double alpha, double beta, double eta) {
  return std::sqrt(d * alpha / (4.0 * beta) * std::expm1(2.0 * beta * beta * eta / alpha));
}

double small_eta_tv_bound_prop3(int d, double alpha_f, double sigma_sq, double eta) {
  return eta * std::sqrt(static_cast<double>(d)) /
         (2.0 * (alpha_f * sigma_sq * sigma_sq + sigma_sq));
}

double small_eta_kl_bound_prop3(int d, double alpha_f, double sigma_sq, double eta) {
  const double den = alpha_f * sigma_sq * sigma_sq + sigma_sq;
  return d * eta * eta / (2.0 * den * den);
}

double RateReport::kl_bound_at_k(std::uint64_t k, double kl0) const {
  return kl0 * std::pow(per_sweep_contraction, static_cast<double>(k));
}

std::uint64_t RateReport::mixing_sweeps(double delta, double kl0) const {
  const double target = 2.0 * delta * delta;
  if (kl0 <= target) return 0;
  if (!(per_sweep_contraction < 1.0)) {
    throw Error("mixing_sweeps: contraction factor is 1, the chain need not mix");
  }
  const double guess = std::log(target / kl0) / std::log(per_sweep_contraction);
  auto k = static_cast<std::uint64_t>(std::max(1.0, std::floor(guess) - 1.0));
  while (k > 1 && kl_bound_at_k(k - 1, kl0) <= target) --k;
  while (kl_bound_at_k(k, kl0) > target) ++k;
  return k;
}

RateReport rate_report(const BipartiteNetwork& net, double quad_tol) {
  RateReport r;
  const NetworkSummary s = NetworkSummary::from(net);
  const BipartiteExponent e = bipartite_C(s, net.eta(), quad_tol);
  r.C = e.C;
  r.degenerate = e.degenerate;
  r.per_sweep_contraction = std::exp(-e.C);

  if (net.n() != 1 || net.m() != 1) return r;
  const double sigma = net.edges().front().sigma;
  const double eta = net.eta() / sigma;
  r.two_node_factor = two_node_rate(net.f(0).alpha(), net.g(0).alpha(), eta);
  r.per_sweep_contraction = std::min(r.per_sweep_contraction, *r.two_node_factor);

  const Potential& f = net.f(0);
  const Potential& g = net.g(0);
  const int d = net.d();
  if (f.kind() == PotentialKind::Zero && g.alpha() > 0.0 && std::isfinite(g.beta())) {
    r.small_eta_bounds = SmallEtaBounds{small_eta_kl_bound_example2(d, g.alpha(), g.beta(), eta),
                                        small_eta_tv_bound_example2(d, g.alpha(), g.beta(), eta)};
    return r;
  }
  const auto q = g.quadratic_form();
  if (q && q->isotropic && *q->isotropic > 0.0 && f.alpha() > 0.0 &&
      f.gradient(q->center).norm() <= 1e-8) {
    const double sigma_sq = 1.0 / *q->isotropic;
    r.small_eta_bounds = SmallEtaBounds{small_eta_kl_bound_prop3(d, f.alpha(), sigma_sq, eta),
                                        small_eta_tv_bound_prop3(d, f.alpha(), sigma_sq, eta)};
  }
  return r;
}

}  // namespace gibbsnet
