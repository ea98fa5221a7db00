#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "gibbsnet/gaussian_oracle.hpp"
#include "gibbsnet/gibbs.hpp"
#include "gibbsnet/metrics.hpp"

using namespace gibbsnet;
using fixtures::vec;

namespace {

bool same_bits(const SampleMatrix& a, const SampleMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

struct Trace {
  std::vector<SampleMatrix> X, Y;
  std::vector<std::vector<std::size_t>> proposals;
  TraceSink sink() {
    return [this](const GibbsState& s, const SweepStats& st) {
      X.push_back(s.X);
      Y.push_back(s.Y);
      auto p = st.proposals_y;
      p.insert(p.end(), st.proposals_x.begin(), st.proposals_x.end());
      proposals.push_back(p);
    };
  }
  bool operator==(const Trace& o) const {
    if (X.size() != o.X.size() || proposals != o.proposals) return false;
    for (std::size_t k = 0; k < X.size(); ++k)
      if (!same_bits(X[k], o.X[k]) || !same_bits(Y[k], o.Y[k])) return false;
    return true;
  }
};

SampleMatrix zeros(const BipartiteNetwork& net) { return SampleMatrix::Zero(net.n(), net.d()); }

// Stacked (X, Y) of one chain.
Vector stacked(const GibbsState& s) {
  Vector z(s.X.size() + s.Y.size());
  z << Eigen::Map<const Vector>(s.X.data(), s.X.size()), Eigen::Map<const Vector>(s.Y.data(), s.Y.size());
  return z;
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double worst = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    worst = std::max(worst, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return worst;
}

}  // namespace

TEST_CASE("init") {
  const BipartiteNetwork net = fixtures::two_node(0.0, 1.0, 1.0);
  const GibbsState fixed = init(net, FixedInit{zeros(net)}, 0);
  CHECK(fixed.X.isZero(0.0));
  CHECK_FALSE(fixed.y_ready);
  CHECK(fixed.k == 0);

  const GaussianInit gauss{vec({0.0}), Matrix::Identity(1, 1)};
  CHECK(same_bits(init(net, gauss, 42).X, init(net, gauss, 42).X));
  CHECK_FALSE(same_bits(init(net, gauss, 42).X, init(net, gauss, 43).X));
  CHECK_FALSE(same_bits(init(net, gauss, 42, 0).X, init(net, gauss, 42, 1).X));

  CHECK_THROWS_AS(init(net, FixedInit{SampleMatrix::Zero(2, 1)}, 0), Error);
  CHECK_THROWS_AS(init(net, GaussianInit{vec({0.0, 0.0}), Matrix::Identity(2, 2)}, 0), Error);
}

TEST_CASE("a two-node sweep is the two RGO steps with the vertex streams") {
  const BipartiteNetwork net = fixtures::two_node(0.0, 1.0, 0.6);
  GibbsState state = init(net, FixedInit{SampleMatrix::Constant(1, 1, 2.0)}, 5, 3);
  sweep(net, state);

  CounterStream ry({5, 3, Side::Y, 0, 0});
  const Vector y = rgo_sample({net.g(0), vec({2.0}), 0.6}, ry).sample;
  CounterStream rx({5, 3, Side::X, 0, 0});
  const Vector x = rgo_sample({net.f(0), y, 0.6}, rx).sample;
  CHECK(state.Y(0, 0) == y(0));
  CHECK(state.X(0, 0) == x(0));
  CHECK(state.k == 1);
  CHECK(state.y_ready);
}

TEST_CASE("run: K = 0 is a no-op and repeated runs are identical") {
  std::mt19937_64 rng(1);
  const BipartiteNetwork net = fixtures::random_quadratic(rng, 3, 2, 2, 0.5);
  const GibbsState start = init(net, GaussianInit{vec({0.0, 0.0}), Matrix::Identity(2, 2)}, 9);
  const GibbsState same = run(net, start, 0);
  CHECK(same.k == 0);
  CHECK(same_bits(same.X, start.X));

  Trace a, b;
  run(net, start, 10, a.sink());
  run(net, start, 10, b.sink());
  CHECK(a.X.size() == 10);
  CHECK(a == b);
}

TEST_CASE("block visiting order does not change the sweep") {
  std::mt19937_64 rng(2);
  const BipartiteNetwork net = fixtures::random_quadratic(rng, 4, 3, 2, 0.8);
  const GibbsState start = init(net, GaussianInit{vec({1.0, -1.0}), Matrix::Identity(2, 2)}, 3);
  Trace natural, permuted;
  run(net, start, 5, natural.sink());
  const std::vector<int> y_order{2, 0, 1};
  const std::vector<int> x_order{3, 1, 0, 2};
  SweepOptions opts;
  opts.y_order = y_order;
  opts.x_order = x_order;
  run(net, start, 5, permuted.sink(), opts);
  CHECK(natural == permuted);

  const std::vector<int> bad{0, 0, 1};
  opts.y_order = bad;
  GibbsState s = start;
  CHECK_THROWS_AS(sweep(net, s, opts), Error);
}

TEST_CASE("distributed simulation") {
  SUBCASE("bit-identical to run on the two-node network, seed 7, K = 20") {
    const BipartiteNetwork net = fixtures::two_node(0.0, 1.0, 1.0);
    const GibbsState start = init(net, FixedInit{zeros(net)}, 7);
    Trace seq, dist;
    run(net, start, 20, seq.sink());
    run_distributed_sim(net, start, 20, {}, dist.sink());
    CHECK(seq == dist);
  }
  SUBCASE("one message per edge and direction") {
    std::mt19937_64 rng(4);
    const BipartiteNetwork net = fixtures::random_quadratic(rng, 4, 3, 1, 1.0);
    std::vector<RoundRecord> rounds;
    run_distributed_sim(net, init(net, FixedInit{zeros(net)}, 0), 3,
                        [&](const RoundRecord& r) { rounds.push_back(r); });
    REQUIRE(rounds.size() == 12);
    for (std::size_t s = 0; s < 3; ++s) {
      std::size_t total = 0;
      for (std::size_t r = 0; r < 4; ++r) {
        const RoundRecord& rec = rounds[4 * s + r];
        CHECK(rec.round == "ABCD"[r]);
        CHECK(rec.k == s);
        total += rec.messages;
      }
      CHECK(total == 2 * net.edges().size());
      CHECK(rounds[4 * s + 1].compute.size() == static_cast<std::size_t>(net.m()));
      CHECK(rounds[4 * s + 3].compute.size() == static_cast<std::size_t>(net.n()));
    }
  }
  SUBCASE("star: the hub hears from every leaf in round A") {
    const auto p = fixtures::square(0.0);
    const BipartiteNetwork star(1, 1.0, {p, p, p, p}, {p},
                                {{0, 0, 1.0}, {1, 0, 1.0}, {2, 0, 1.0}, {3, 0, 1.0}});
    std::vector<RoundRecord> rounds;
    const GibbsState start = init(star, FixedInit{zeros(star)}, 1);
    Trace seq, dist;
    run(star, start, 4, seq.sink());
    run_distributed_sim(star, start, 4, [&](const RoundRecord& r) { rounds.push_back(r); }, dist.sink());
    CHECK(rounds[0].fan_in == std::vector<int>{4});
    CHECK(rounds[1].compute.front().messages_in == 4);
    CHECK(rounds[2].fan_in == std::vector<int>{1, 1, 1, 1});
    CHECK(seq == dist);
  }
}

TEST_CASE("zero potentials: Y given X is N(X, eta)") {
  const BipartiteNetwork net(1, 1.0, {Potential::zero(1)}, {Potential::zero(1)}, {{0, 0, 1.0}});
  const int chains = 100000;
  std::vector<double> ys;
  for (int c = 0; c < chains; ++c) {
    GibbsState s = init(net, FixedInit{SampleMatrix::Constant(1, 1, 3.0)}, 11, static_cast<std::uint64_t>(c));
    sweep(net, s);
    ys.push_back(s.Y(0, 0));
  }
  double mean = 0.0, var = 0.0;
  for (const double y : ys) mean += y / chains;
  for (const double y : ys) var += (y - mean) * (y - mean) / (chains - 1);
  CHECK(std::abs(mean - 3.0) <= 3.0 / std::sqrt(chains));
  CHECK(std::abs(var - 1.0) <= 3.0 * std::sqrt(2.0 / chains));
}

TEST_CASE("chain law matches the exact Gaussian propagation at k = 1 and 5") {
  std::mt19937_64 rng(17);
  const BipartiteNetwork net = fixtures::random_quadratic(rng, 2, 2, 1, 0.7);
  const GaussianInit mu0{vec({0.5}), Matrix::Constant(1, 1, 0.8)};
  const GaussianDist mu0_stacked(Vector::Constant(2, 0.5), 0.8 * Matrix::Identity(2, 2));
  const int chains = 100000;
  const int dim = net.n() + net.m();

  std::vector<Matrix> at(6, Matrix(chains, dim));
  for (int c = 0; c < chains; ++c) {
    run(net, init(net, mu0, 23, static_cast<std::uint64_t>(c)), 5,
        [&](const GibbsState& s, const SweepStats&) { at[s.k].row(c) = stacked(s).transpose(); });
  }
  for (const int k : {1, 5}) {
    CAPTURE(k);
    const ChainLaw law = propagate_chain(net, mu0_stacked, k);
    REQUIRE(law.y_defined);
    const Matrix& Z = at[static_cast<std::size_t>(k)];
    const Vector mean = Z.colwise().mean().transpose();
    const Matrix centered = Z.rowwise() - mean.transpose();
    const Matrix cov = centered.transpose() * centered / (chains - 1.0);
    for (int a = 0; a < dim; ++a) {
      CHECK(std::abs(mean(a) - law.law.mean()(a)) <= 3.0 * std::sqrt(law.law.cov()(a, a) / chains));
      for (int b = a; b < dim; ++b) {
        // SE of a sample covariance entry from its fourth moment.
        const Eigen::ArrayXd prod = centered.col(a).array() * centered.col(b).array();
        const double se = std::sqrt((prod - prod.mean()).square().mean() / chains);
        CHECK(std::abs(cov(a, b) - law.law.cov()(a, b)) <= 3.0 * se);
      }
    }
  }
}

TEST_CASE("two-node chains at k = 50 reproduce the closed-form X-marginal") {
  // u1 = 0, u2 = 1, eta = 1: mean (u2 + (2 eta + 1) u1) / (2 eta + 2) = 1/4 and
  // variance (2 eta + 1) / (4 eta + 4) = 3/8.
  const BipartiteNetwork net = fixtures::two_node(0.0, 1.0, 1.0);
  const int chains = 100000;
  std::vector<double> xs;
  for (int c = 0; c < chains; ++c) {
    xs.push_back(run(net, init(net, FixedInit{zeros(net)}, 0, static_cast<std::uint64_t>(c)), 50).X(0, 0));
  }
  double mean = 0.0, var = 0.0, m4 = 0.0;
  for (const double x : xs) mean += x / chains;
  for (const double x : xs) {
    var += (x - mean) * (x - mean) / (chains - 1);
    m4 += std::pow(x - mean, 4) / chains;
  }
  CHECK(std::abs(mean - 0.25) <= 3.0 * std::sqrt(var / chains));
  CHECK(std::abs(var - 0.375) <= 3.0 * std::sqrt((m4 - var * var) / chains));
}

TEST_CASE("starting at the target keeps the X-marginal stationary") {
  const BipartiteNetwork net = fixtures::two_node(0.0, 1.0, 1.0);
  const GaussianDist target = exact_x_marginal(net);
  const GaussianInit mu0{target.mean(), target.cov()};
  const int chains = 20000;
  std::vector<double> first, later;
  for (int c = 0; c < 2 * chains; ++c) {
    const bool early = c < chains;
    const GibbsState s = run(net, init(net, mu0, 31, static_cast<std::uint64_t>(c)), early ? 1 : 20);
    (early ? first : later).push_back(s.X(0, 0));
  }
  // 1% critical value of the two-sample KS statistic.
  const double critical = 1.628 * std::sqrt(2.0 / chains);
  CHECK(ks_two_sample(first, later) < critical);
}

TEST_CASE("empirical KL decays under the two-node contraction curve") {
  const BipartiteNetwork net = fixtures::two_node(0.0, 1.0, 1.0);
  const GaussianDist target = exact_x_marginal(net);
  const GaussianInit mu0{vec({5.0}), Matrix::Identity(1, 1)};
  const double kl0 = kl(GaussianDist(vec({5.0}), Matrix::Identity(1, 1)), target);
  const double rate = 1.0 / 81.0;
  const int chains = 20000;
  std::vector<Matrix> xs(6, Matrix(chains, 1));
  for (int c = 0; c < chains; ++c) {
    run(net, init(net, mu0, 41, static_cast<std::uint64_t>(c)), 5,
        [&](const GibbsState& s, const SweepStats&) { xs[s.k](c, 0) = s.X(0, 0); });
  }
  // Plug-in KL noise for d = 1 is of order d(d + 3) / (4 n) = 5e-5 here.
  const double noise = 20.0 * 1.0 / chains;
  double previous = kInfinity;
  for (int k = 1; k <= 5; ++k) {
    const double est = empirical_kl_vs_gaussian(xs[static_cast<std::size_t>(k)], target);
    CAPTURE(k);
    CHECK(est >= 0.0);
    CHECK(est <= kl0 * std::pow(rate, k) + noise);
    CHECK(est <= previous + noise);
    previous = est;
  }
}

TEST_CASE("sweep errors name the failing vertex") {
  const Potential wrong = Potential::custom(
      1, [](const VectorRef& y) { return y(0) * y(0); },
      [](const VectorRef& y) { return vec({2.0 * y(0)}); }, 5.0, 5.0);
  const BipartiteNetwork net(1, 1.0, {fixtures::square(0.0)}, {fixtures::square(0.0), wrong},
                             {{0, 0, 1.0}, {0, 1, 1.0}});
  GibbsState s = init(net, FixedInit{zeros(net)}, 0);
  try {
    sweep(net, s);
    FAIL("expected SweepError");
  } catch (const SweepError& e) {
    CHECK(e.side() == Side::Y);
    CHECK(e.vertex() == 1);
  }
}
