#pragma once

// Blocked Gibbs sampler over a bipartite network.
//
// One sweep resamples every y_j from its conditional given the current X,
// then every x_i given the freshly drawn Y. No update in a block reads a value
// written in the same block, and each vertex update draws from its own
// counter-based stream keyed by (seed, chain, side, vertex, sweep), so the
// result does not depend on the order in which a block is visited.

#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "gibbsnet/graph.hpp"
#include "gibbsnet/rgo.hpp"

namespace gibbsnet {

struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t chain = 0;
};

struct GibbsState {
  SampleMatrix X;  // n x d
  SampleMatrix Y;  // m x d, meaningful once y_ready
  bool y_ready = false;
  std::uint64_t k = 0;  // completed sweeps
  StreamKey streams;
};

struct SweepStats {
  std::uint64_t k = 0;  // sweep index after the update
  std::vector<std::size_t> proposals_y;
  std::vector<std::size_t> proposals_x;
  double seconds_y = 0.0;
  double seconds_x = 0.0;
};

// Deterministic starting X.
struct FixedInit {
  SampleMatrix X0;
};
// Every x_i drawn independently from N(mean, cov) in R^d.
struct GaussianInit {
  Vector mean;
  Matrix cov;
};
using InitSpec = std::variant<FixedInit, GaussianInit>;

GibbsState init(const BipartiteNetwork& net, const InitSpec& mu0, std::uint64_t seed,
                std::uint64_t chain = 0);

struct SweepOptions {
  RgoOptions rgo{};
  // Optional visiting orders for the two blocks (permutations of 0..m-1 and
  // 0..n-1). Empty means natural order.
  std::span<const int> y_order{};
  std::span<const int> x_order{};
};

class SweepError : public Error {
 public:
  SweepError(const std::string& what, Side side, int vertex)
      : Error(what), side_(side), vertex_(vertex) {}
  Side side() const noexcept { return side_; }
  int vertex() const noexcept { return vertex_; }

 private:
  Side side_;
  int vertex_;
};

// One full sweep in place. Throws SweepError carrying the failing vertex.
SweepStats sweep(const BipartiteNetwork& net, GibbsState& state, const SweepOptions& options = {});

using TraceSink = std::function<void(const GibbsState&, const SweepStats&)>;

// Exactly K sweeps; the sink sees the state after each one.
GibbsState run(const BipartiteNetwork& net, GibbsState state, std::uint64_t K,
               const TraceSink& sink = {}, const SweepOptions& options = {});

// Message-passing simulation of the same sweep. Rounds per sweep:
//   A: every X vertex sends its sample along each of its edges
//   B: every Y vertex reduces its inbox and samples
//   C: every Y vertex sends its new sample along each of its edges
//   D: every X vertex reduces its inbox and samples
struct VertexCompute {
  int vertex;
  int messages_in;
  std::size_t proposals;
};

struct RoundRecord {
  std::uint64_t k = 0;  // sweep being executed (state.k before the sweep)
  char round = 'A';
  std::size_t messages = 0;
  std::vector<int> fan_in;  // per receiving vertex, messages delivered this round
  std::vector<VertexCompute> compute;  // filled for rounds B and D
};

using RoundsSink = std::function<void(const RoundRecord&)>;

GibbsState run_distributed_sim(const BipartiteNetwork& net, GibbsState state, std::uint64_t K,
                               const RoundsSink& rounds = {}, const TraceSink& trace = {},
                               const SweepOptions& options = {});

}  // namespace gibbsnet
