#pragma once

#include <random>
#include <vector>

#include "gibbsnet/graph.hpp"

namespace fixtures {

using gibbsnet::BipartiteNetwork;
using gibbsnet::Potential;
using gibbsnet::Vector;

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (const double x : v) out(k++) = x;
  return out;
}

// (x - u)^2, i.e. precision 2.
inline Potential square(double u) { return Potential::isotropic_quadratic(vec({u}), 2.0); }

// f = (x - u1)^2, g = (y - u2)^2, one edge with weight 1.
inline BipartiteNetwork two_node(double u1, double u2, double eta) {
  return BipartiteNetwork(1, eta, {square(u1)}, {square(u2)}, {{0, 0, 1.0}});
}

// Random quadratic bipartite network with every vertex regular.
inline BipartiteNetwork random_quadratic(std::mt19937_64& rng, int n, int m, int d, double eta) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto spd = [&] {
    Eigen::MatrixXd A(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) A(r, c) = unif(rng) - 0.5;
    Eigen::MatrixXd P = A * A.transpose();
    P.diagonal().array() += 0.5 + 2.0 * unif(rng);
    return P;
  };
  const auto center = [&] {
    Vector u(d);
    for (int k = 0; k < d; ++k) u(k) = 4.0 * unif(rng) - 2.0;
    return u;
  };
  std::vector<Potential> f;
  std::vector<Potential> g;
  for (int i = 0; i < n; ++i) f.push_back(Potential::quadratic(center(), spd()));
  for (int j = 0; j < m; ++j) g.push_back(Potential::quadratic(center(), spd()));

  std::vector<gibbsnet::Edge> edges;
  std::vector<bool> x_used(static_cast<std::size_t>(n)), y_used(static_cast<std::size_t>(m));
  const auto weight = [&] { return 0.1 + 0.9 * unif(rng); };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (unif(rng) < 0.5) {
        edges.push_back({i, j, weight()});
        x_used[static_cast<std::size_t>(i)] = y_used[static_cast<std::size_t>(j)] = true;
      }
  const auto has = [&](int i, int j) {
    for (const auto& e : edges)
      if (e.i == i && e.j == j) return true;
    return false;
  };
  for (int i = 0; i < n; ++i)
    if (!x_used[static_cast<std::size_t>(i)]) {
      const int j = static_cast<int>(rng() % static_cast<unsigned>(m));
      edges.push_back({i, j, weight()});
      y_used[static_cast<std::size_t>(j)] = true;
    }
  for (int j = 0; j < m; ++j)
    if (!y_used[static_cast<std::size_t>(j)]) {
      int i = static_cast<int>(rng() % static_cast<unsigned>(n));
      if (!has(i, j)) edges.push_back({i, j, weight()});
    }
  return BipartiteNetwork(d, eta, std::move(f), std::move(g), std::move(edges));
}

}  // namespace fixtures
