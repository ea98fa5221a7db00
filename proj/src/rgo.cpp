#include "gibbsnet/rgo.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "gibbsnet/kernels.hpp"

namespace gibbsnet {

namespace {

std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

RgoResult rgo_sample(const RgoProblem& problem, CounterStream& rng, const RgoOptions& options) {
  const Potential& h = problem.potential;
  const double eta = problem.eta_eff;
  const int d = h.dim();
  if (!(eta > 0.0)) throw RgoError(RgoError::Reason::BadProblem, "rgo: eta_eff must be > 0");
  if (!std::isfinite(h.beta())) {
    throw RgoError(RgoError::Reason::BadProblem, "rgo: potential must be smooth (finite beta)");
  }
  if (problem.center.size() != d) {
    throw RgoError(RgoError::Reason::BadProblem, "rgo: center has the wrong dimension");
  }

  const double inv_eta = 1.0 / eta;
  const double curvature = h.alpha() + inv_eta;
  const double proposal_sd = 1.0 / std::sqrt(curvature);
  const auto total = [&](const Vector& y) {
    return h.value(y) + 0.5 * inv_eta * kernels::squared_distance(as_span(y), as_span(problem.center));
  };

  RgoResult result;
  result.prox_point = prox(h, problem.center, eta, options.prox);
  const double h_min = total(result.prox_point);
  const double slack = options.envelope_slack * std::max(1.0, std::abs(h_min));

  Vector noise(d);
  Vector z(d);
  for (std::size_t attempt = 1; attempt <= options.max_proposals; ++attempt) {
    rng.fill_normal({noise.data(), static_cast<std::size_t>(d)});
    kernels::affine(as_span(result.prox_point), proposal_sd, as_span(noise),
                    {z.data(), static_cast<std::size_t>(d)});
    const double radius_sq = kernels::squared_distance(as_span(z), as_span(result.prox_point));
    const double log_accept = -(total(z) - h_min - 0.5 * curvature * radius_sq);
    if (log_accept > slack) {
      throw RgoError(RgoError::Reason::EnvelopeViolated,
                     "rgo: acceptance probability exceeds 1 (log " + std::to_string(log_accept) +
                         "); the declared strong-convexity constant is too large");
    }
    if (std::log(rng.uniform()) <= log_accept) {
      result.sample = z;
      result.proposals_used = attempt;
      return result;
    }
  }
  throw RgoError(RgoError::Reason::MaxProposals,
                 "rgo: no proposal accepted after " + std::to_string(options.max_proposals) +
                     " attempts (expected " +
                     std::to_string(expected_proposals(h.alpha(), h.beta(), eta, d)) +
                     "); eta is likely too large for the rejection envelope");
}

double expected_proposals(double alpha, double beta, double eta_eff, int d) {
  const double inv_eta = 1.0 / eta_eff;
  return std::pow((beta + inv_eta) / (alpha + inv_eta), 0.5 * d);
}

}  // namespace gibbsnet
