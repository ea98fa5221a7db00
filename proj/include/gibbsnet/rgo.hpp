#pragma once

// Exact restricted Gaussian oracle.
//
// Samples y from exp(-H(y)) with H(y) = h(y) + |y - c|^2 / (2 eta') by
// rejection: the proposal is N(x*, I / (alpha + 1/eta')) centered at the
// proximal point x* = argmin H, and a proposal z is accepted with probability
//   exp(-[H(z) - H(x*) - (alpha + 1/eta') |z - x*|^2 / 2]),
// which is at most 1 because H is (alpha + 1/eta')-strongly convex with
// gradient zero at x*. If h is beta-smooth the expected number of proposals is
// at most ((beta + 1/eta') / (alpha + 1/eta'))^(d/2).

#include <cstddef>
#include <string>

#include "gibbsnet/graph.hpp"
#include "gibbsnet/potentials.hpp"
#include "gibbsnet/rng.hpp"

namespace gibbsnet {

struct RgoOptions {
  std::size_t max_proposals = 1'000'000;
  ProxOptions prox{};
  // Log-acceptance above slack * max(1, |H(x*)|) means the declared alpha is
  // wrong; a little room is left for rounding in H.
  double envelope_slack = 1e-9;
};

struct RgoResult {
  Vector sample;
  std::size_t proposals_used = 0;
  Vector prox_point;
};

class RgoError : public Error {
 public:
  enum class Reason { MaxProposals, EnvelopeViolated, BadProblem };
  RgoError(Reason reason, const std::string& what) : Error(what), reason_(reason) {}
  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

RgoResult rgo_sample(const RgoProblem& problem, CounterStream& rng,
                     const RgoOptions& options = {});

// ((beta + 1/eta') / (alpha + 1/eta'))^(d/2)
double expected_proposals(double alpha, double beta, double eta_eff, int d);

}  // namespace gibbsnet
