#include "gibbsnet/graph.hpp"

#include <algorithm>
#include <span>
#include <string>

#include "gibbsnet/kernels.hpp"

namespace gibbsnet {

BipartiteNetwork::BipartiteNetwork(int d, double eta, std::vector<Potential> f,
                                   std::vector<Potential> g, std::vector<Edge> edges)
    : d_(d), eta_(eta), f_(std::move(f)), g_(std::move(g)), edges_(std::move(edges)) {
  if (d_ < 1) throw Error("BipartiteNetwork: d must be >= 1");
  if (!(eta_ > 0.0)) throw Error("BipartiteNetwork: eta must be positive");
  if (f_.empty() || g_.empty()) throw Error("BipartiteNetwork: both sides need vertices");
  for (std::size_t i = 0; i < f_.size(); ++i) {
    if (f_[i].dim() != d_) {
      throw Error("BipartiteNetwork: f_" + std::to_string(i) + " has the wrong dimension");
    }
  }
  for (std::size_t j = 0; j < g_.size(); ++j) {
    if (g_[j].dim() != d_) {
      throw Error("BipartiteNetwork: g_" + std::to_string(j) + " has the wrong dimension");
    }
  }

  x_adj_.resize(f_.size());
  y_adj_.resize(g_.size());
  for (const Edge& e : edges_) {
    if (e.i < 0 || e.i >= n() || e.j < 0 || e.j >= m()) {
      throw Error("BipartiteNetwork: edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                  ") out of range");
    }
    x_adj_[e.i].push_back({e.j, e.sigma});
    y_adj_[e.j].push_back({e.i, e.sigma});
  }
  const auto by_vertex = [](const Neighbor& a, const Neighbor& b) { return a.vertex < b.vertex; };
  const auto same_vertex = [](const Neighbor& a, const Neighbor& b) {
    return a.vertex == b.vertex;
  };
  for (auto& adj : x_adj_) {
    std::sort(adj.begin(), adj.end(), by_vertex);
    if (std::adjacent_find(adj.begin(), adj.end(), same_vertex) != adj.end()) {
      throw Error("BipartiteNetwork: duplicate edge");
    }
  }
  for (auto& adj : y_adj_) std::sort(adj.begin(), adj.end(), by_vertex);

  // Only positive weights count towards regularity; invalid ones are reported
  // by validate().
  const auto positive_sum = [](const std::vector<Neighbor>& adj) {
    double total = 0.0;
    for (const Neighbor& nb : adj) {
      if (nb.sigma > 0.0) total += nb.sigma;
    }
    return total;
  };
  row_sums_.reserve(x_adj_.size());
  for (const auto& adj : x_adj_) row_sums_.push_back(positive_sum(adj));
  col_sums_.reserve(y_adj_.size());
  for (const auto& adj : y_adj_) col_sums_.push_back(positive_sum(adj));
}

double BipartiteNetwork::sigma(int i, int j) const {
  for (const Neighbor& nb : x_adj_.at(i)) {
    if (nb.vertex == j) return nb.sigma;
  }
  return 0.0;
}

BipartiteNetwork BipartiteNetwork::with_eta(double eta) const {
  return BipartiteNetwork(d_, eta, f_, g_, edges_);
}

std::vector<std::string> ValidationReport::messages() const {
  std::vector<std::string> out;
  for (const int i : isolated_x) {
    out.push_back("X vertex " + std::to_string(i) + " is isolated (row sum of sigma is 0)");
  }
  for (const int j : isolated_y) {
    out.push_back("Y vertex " + std::to_string(j) + " is isolated (column sum of sigma is 0)");
  }
  for (const Edge& e : bad_weights) {
    out.push_back("edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) + ") has weight " +
                  std::to_string(e.sigma) + " outside (0, 1]");
  }
  return out;
}

ValidationReport validate(const BipartiteNetwork& net) {
  ValidationReport report;
  for (const Edge& e : net.edges()) {
    if (!(e.sigma > 0.0 && e.sigma <= 1.0)) report.bad_weights.push_back(e);
  }
  for (int i = 0; i < net.n(); ++i) {
    if (!(net.row_sum(i) > 0.0)) report.isolated_x.push_back(i);
  }
  for (int j = 0; j < net.m(); ++j) {
    if (!(net.col_sum(j) > 0.0)) report.isolated_y.push_back(j);
  }
  return report;
}

Vector weighted_center(const std::vector<double>& weights,
                       const std::vector<const double*>& rows, int d) {
  Vector center = Vector::Zero(d);
  const std::span<double> out(center.data(), static_cast<std::size_t>(d));
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    kernels::axpy(weights[k], std::span<const double>(rows[k], static_cast<std::size_t>(d)), out);
    total += weights[k];
  }
  kernels::scale(1.0 / total, out);
  return center;
}

namespace {

RgoProblem reduce(const std::vector<Neighbor>& adj, double total, double eta,
                  const Potential& potential, const SampleMatrix& other, int d) {
  std::vector<double> weights;
  std::vector<const double*> rows;
  weights.reserve(adj.size());
  rows.reserve(adj.size());
  for (const Neighbor& nb : adj) {
    if (!(nb.sigma > 0.0)) continue;
    weights.push_back(nb.sigma);
    rows.push_back(other.row(nb.vertex).data());
  }
  return RgoProblem{potential, weighted_center(weights, rows, d), eta / total};
}

void check_samples(const SampleMatrix& s, int rows, int d, const char* where) {
  if (s.rows() != rows || s.cols() != d) {
    throw Error(std::string(where) + ": sample matrix has the wrong shape");
  }
}

}  // namespace

RgoProblem conditional_problem_y(const BipartiteNetwork& net, int j, const SampleMatrix& X) {
  check_samples(X, net.n(), net.d(), "conditional_problem_y");
  if (!(net.col_sum(j) > 0.0)) {
    throw Error("conditional_problem_y: Y vertex " + std::to_string(j) + " is isolated");
  }
  return reduce(net.neighbors_of_y(j), net.col_sum(j), net.eta(), net.g(j), X, net.d());
}

RgoProblem conditional_problem_x(const BipartiteNetwork& net, int i, const SampleMatrix& Y) {
  check_samples(Y, net.m(), net.d(), "conditional_problem_x");
  if (!(net.row_sum(i) > 0.0)) {
    throw Error("conditional_problem_x: X vertex " + std::to_string(i) + " is isolated");
  }
  return reduce(net.neighbors_of_x(i), net.row_sum(i), net.eta(), net.f(i), Y, net.d());
}

}  // namespace gibbsnet
