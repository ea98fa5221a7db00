#pragma once

// Bipartite coupling network.
//
// Target density over (x_1..x_n, y_1..y_m), each in R^d:
//   exp(-sum_i f_i(x_i) - sum_j g_j(y_j) - sum_ij sigma_ij |x_i - y_j|^2 / (2 eta))
// Edges are stored as a coordinate list with per-vertex adjacency and cached
// row/column sums, so each conditional reduction costs O(degree * d).

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gibbsnet/potentials.hpp"

namespace gibbsnet {

// One row per vertex, d columns.
using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Edge {
  int i = 0;  // X-side vertex
  int j = 0;  // Y-side vertex
  double sigma = 1.0;
};

struct Neighbor {
  int vertex;
  double sigma;
};

class BipartiteNetwork {
 public:
  // Throws on shape errors (potential dimension, edge index range, eta <= 0,
  // duplicate edges). Weight ranges and regularity are left to validate().
  BipartiteNetwork(int d, double eta, std::vector<Potential> f, std::vector<Potential> g,
                   std::vector<Edge> edges);

  int n() const noexcept { return static_cast<int>(f_.size()); }
  int m() const noexcept { return static_cast<int>(g_.size()); }
  int d() const noexcept { return d_; }
  double eta() const noexcept { return eta_; }

  const Potential& f(int i) const { return f_.at(i); }
  const Potential& g(int j) const { return g_.at(j); }
  const std::vector<Potential>& f() const noexcept { return f_; }
  const std::vector<Potential>& g() const noexcept { return g_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  // Neighbors sorted by vertex index.
  const std::vector<Neighbor>& neighbors_of_x(int i) const { return x_adj_.at(i); }
  const std::vector<Neighbor>& neighbors_of_y(int j) const { return y_adj_.at(j); }

  double row_sum(int i) const { return row_sums_.at(i); }
  double col_sum(int j) const { return col_sums_.at(j); }
  double sigma(int i, int j) const;

  // Same graph and potentials with a different coupling scale.
  BipartiteNetwork with_eta(double eta) const;

 private:
  int d_;
  double eta_;
  std::vector<Potential> f_;
  std::vector<Potential> g_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> x_adj_;
  std::vector<std::vector<Neighbor>> y_adj_;
  std::vector<double> row_sums_;
  std::vector<double> col_sums_;
};

struct ValidationReport {
  std::vector<int> isolated_x;  // rows with no positive weight
  std::vector<int> isolated_y;  // columns with no positive weight
  std::vector<Edge> bad_weights;  // outside (0, 1]
  bool ok() const noexcept {
    return isolated_x.empty() && isolated_y.empty() && bad_weights.empty();
  }
  std::vector<std::string> messages() const;
};

ValidationReport validate(const BipartiteNetwork& net);

// Single-center conditional: density proportional to
//   exp(-h(y) - |y - center|^2 / (2 eta_eff)).
struct RgoProblem {
  Potential potential;
  Vector center;
  double eta_eff;
};

// sum_k w_k v_k / sum_k w_k, accumulated in the order given. Shared by the
// sequential sweep and the message-passing simulator so both produce the same
// bits.
Vector weighted_center(const std::vector<double>& weights,
                       const std::vector<const double*>& rows, int d);

// Conditional of y_j given all of X (n x d).
RgoProblem conditional_problem_y(const BipartiteNetwork& net, int j, const SampleMatrix& X);
// Conditional of x_i given all of Y (m x d).
RgoProblem conditional_problem_x(const BipartiteNetwork& net, int i, const SampleMatrix& Y);

}  // namespace gibbsnet
