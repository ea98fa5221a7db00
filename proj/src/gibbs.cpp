#include "gibbsnet/gibbs.hpp"

#include <chrono>
#include <numeric>
#include <string>

namespace gibbsnet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<int> resolve_order(std::span<const int> order, int count, const char* block) {
  std::vector<int> out;
  if (order.empty()) {
    out.resize(static_cast<std::size_t>(count));
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  out.assign(order.begin(), order.end());
  std::vector<bool> seen(static_cast<std::size_t>(count), false);
  if (static_cast<int>(out.size()) != count) {
    throw Error(std::string("sweep: ") + block + " order must be a permutation");
  }
  for (const int v : out) {
    if (v < 0 || v >= count || seen[static_cast<std::size_t>(v)]) {
      throw Error(std::string("sweep: ") + block + " order must be a permutation");
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
  return out;
}

void require_valid(const BipartiteNetwork& net) {
  const ValidationReport report = validate(net);
  if (!report.ok()) throw Error("network failed validation: " + report.messages().front());
}

void check_state(const BipartiteNetwork& net, const GibbsState& state) {
  if (state.X.rows() != net.n() || state.X.cols() != net.d()) {
    throw Error("GibbsState: X shape does not match the network");
  }
}

RgoResult sample_vertex(const RgoProblem& problem, const GibbsState& state, Side side, int vertex,
                        const RgoOptions& options) {
  CounterStream rng(StreamId{state.streams.seed, state.streams.chain, side,
                             static_cast<std::uint64_t>(vertex), state.k});
  try {
    return rgo_sample(problem, rng, options);
  } catch (const Error& e) {
    throw SweepError(std::string(side == Side::Y ? "Y" : "X") + " vertex " +
                         std::to_string(vertex) + ": " + e.what(),
                     side, vertex);
  }
}

}  // namespace

GibbsState init(const BipartiteNetwork& net, const InitSpec& mu0, std::uint64_t seed,
                std::uint64_t chain) {
  GibbsState state;
  state.streams = {seed, chain};
  state.Y = SampleMatrix::Zero(net.m(), net.d());

  if (const auto* fixed = std::get_if<FixedInit>(&mu0)) {
    if (fixed->X0.rows() != net.n() || fixed->X0.cols() != net.d()) {
      throw Error("init: X0 must be n x d");
    }
    state.X = fixed->X0;
    return state;
  }

  const auto& gauss = std::get<GaussianInit>(mu0);
  if (gauss.mean.size() != net.d() || gauss.cov.rows() != net.d() || gauss.cov.cols() != net.d()) {
    throw Error("init: Gaussian initial law must live in R^d");
  }
  const Eigen::LLT<Matrix> chol(gauss.cov);
  if (chol.info() != Eigen::Success) throw Error("init: initial covariance must be SPD");
  const Matrix L = chol.matrixL();

  state.X.resize(net.n(), net.d());
  Vector noise(net.d());
  for (int i = 0; i < net.n(); ++i) {
    CounterStream rng(StreamId{seed, chain, Side::Init, static_cast<std::uint64_t>(i), 0});
    rng.fill_normal({noise.data(), static_cast<std::size_t>(noise.size())});
    state.X.row(i) = (gauss.mean + L * noise).transpose();
  }
  return state;
}

SweepStats sweep(const BipartiteNetwork& net, GibbsState& state, const SweepOptions& options) {
  check_state(net, state);
  const std::vector<int> y_order = resolve_order(options.y_order, net.m(), "Y");
  const std::vector<int> x_order = resolve_order(options.x_order, net.n(), "X");

  SweepStats stats;
  stats.proposals_y.assign(static_cast<std::size_t>(net.m()), 0);
  stats.proposals_x.assign(static_cast<std::size_t>(net.n()), 0);

  auto start = Clock::now();
  SampleMatrix next_y(net.m(), net.d());
  for (const int j : y_order) {
    const RgoResult r =
        sample_vertex(conditional_problem_y(net, j, state.X), state, Side::Y, j, options.rgo);
    next_y.row(j) = r.sample.transpose();
    stats.proposals_y[static_cast<std::size_t>(j)] = r.proposals_used;
  }
  stats.seconds_y = seconds_since(start);

  start = Clock::now();
  SampleMatrix next_x(net.n(), net.d());
  for (const int i : x_order) {
    const RgoResult r =
        sample_vertex(conditional_problem_x(net, i, next_y), state, Side::X, i, options.rgo);
    next_x.row(i) = r.sample.transpose();
    stats.proposals_x[static_cast<std::size_t>(i)] = r.proposals_used;
  }
  stats.seconds_x = seconds_since(start);

  state.Y = std::move(next_y);
  state.X = std::move(next_x);
  state.y_ready = true;
  ++state.k;
  stats.k = state.k;
  return stats;
}

GibbsState run(const BipartiteNetwork& net, GibbsState state, std::uint64_t K,
               const TraceSink& sink, const SweepOptions& options) {
  require_valid(net);
  for (std::uint64_t s = 0; s < K; ++s) {
    const SweepStats stats = sweep(net, state, options);
    if (sink) sink(state, stats);
  }
  return state;
}

namespace {

struct Message {
  int from;
  double sigma;
  Vector payload;
};

// Delivers one sample per edge from the sending side and returns the inboxes
// of the receiving side. Senders are visited in index order, so every inbox
// ends up sorted by sender.
std::vector<std::vector<Message>> broadcast(const SampleMatrix& samples,
                                            const std::vector<std::vector<Neighbor>>& out_edges,
                                            int receivers, RoundRecord& record) {
  std::vector<std::vector<Message>> inbox(static_cast<std::size_t>(receivers));
  record.fan_in.assign(static_cast<std::size_t>(receivers), 0);
  for (std::size_t sender = 0; sender < out_edges.size(); ++sender) {
    for (const Neighbor& nb : out_edges[sender]) {
      inbox[static_cast<std::size_t>(nb.vertex)].push_back(
          {static_cast<int>(sender), nb.sigma, samples.row(static_cast<Eigen::Index>(sender)).transpose()});
      ++record.fan_in[static_cast<std::size_t>(nb.vertex)];
      ++record.messages;
    }
  }
  return inbox;
}

RgoProblem reduce_inbox(const std::vector<Message>& inbox, const Potential& potential, double eta,
                        int d) {
  std::vector<double> weights;
  std::vector<const double*> rows;
  double total = 0.0;
  for (const Message& msg : inbox) {
    weights.push_back(msg.sigma);
    rows.push_back(msg.payload.data());
    total += msg.sigma;
  }
  return RgoProblem{potential, weighted_center(weights, rows, d), eta / total};
}

}  // namespace

GibbsState run_distributed_sim(const BipartiteNetwork& net, GibbsState state, std::uint64_t K,
                               const RoundsSink& rounds, const TraceSink& trace,
                               const SweepOptions& options) {
  require_valid(net);
  check_state(net, state);

  std::vector<std::vector<Neighbor>> x_out(static_cast<std::size_t>(net.n()));
  std::vector<std::vector<Neighbor>> y_out(static_cast<std::size_t>(net.m()));
  for (int i = 0; i < net.n(); ++i) x_out[static_cast<std::size_t>(i)] = net.neighbors_of_x(i);
  for (int j = 0; j < net.m(); ++j) y_out[static_cast<std::size_t>(j)] = net.neighbors_of_y(j);

  for (std::uint64_t s = 0; s < K; ++s) {
    SweepStats stats;
    stats.proposals_y.assign(static_cast<std::size_t>(net.m()), 0);
    stats.proposals_x.assign(static_cast<std::size_t>(net.n()), 0);

    RoundRecord a;
    a.k = state.k;
    a.round = 'A';
    const auto y_inbox = broadcast(state.X, x_out, net.m(), a);
    if (rounds) rounds(a);

    auto start = Clock::now();
    RoundRecord b;
    b.k = state.k;
    b.round = 'B';
    SampleMatrix next_y(net.m(), net.d());
    for (int j = 0; j < net.m(); ++j) {
      const auto& inbox = y_inbox[static_cast<std::size_t>(j)];
      const RgoResult r = sample_vertex(reduce_inbox(inbox, net.g(j), net.eta(), net.d()), state,
                                        Side::Y, j, options.rgo);
      next_y.row(j) = r.sample.transpose();
      stats.proposals_y[static_cast<std::size_t>(j)] = r.proposals_used;
      b.compute.push_back({j, static_cast<int>(inbox.size()), r.proposals_used});
    }
    stats.seconds_y = seconds_since(start);
    if (rounds) rounds(b);

    RoundRecord c;
    c.k = state.k;
    c.round = 'C';
    const auto x_inbox = broadcast(next_y, y_out, net.n(), c);
    if (rounds) rounds(c);

    start = Clock::now();
    RoundRecord dr;
    dr.k = state.k;
    dr.round = 'D';
    SampleMatrix next_x(net.n(), net.d());
    for (int i = 0; i < net.n(); ++i) {
      const auto& inbox = x_inbox[static_cast<std::size_t>(i)];
      const RgoResult r = sample_vertex(reduce_inbox(inbox, net.f(i), net.eta(), net.d()), state,
                                        Side::X, i, options.rgo);
      next_x.row(i) = r.sample.transpose();
      stats.proposals_x[static_cast<std::size_t>(i)] = r.proposals_used;
      dr.compute.push_back({i, static_cast<int>(inbox.size()), r.proposals_used});
    }
    stats.seconds_x = seconds_since(start);
    if (rounds) rounds(dr);

    state.Y = std::move(next_y);
    state.X = std::move(next_x);
    state.y_ready = true;
    ++state.k;
    stats.k = state.k;
    if (trace) trace(state, stats);
  }
  return state;
}

}  // namespace gibbsnet
