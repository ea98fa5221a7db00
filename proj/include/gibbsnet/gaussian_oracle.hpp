#pragma once

// Exact linear-Gaussian ground truth for networks whose potentials are all
// quadratic (Zero counts as a quadratic with zero precision).
//
// Dense linear algebra throughout; intended for the small networks used to
// check the sampler and the rate bounds, never called by the sampler itself.

#include <Eigen/Dense>

#include "gibbsnet/graph.hpp"
#include "gibbsnet/rng.hpp"

namespace gibbsnet {

class GaussianDist {
 public:
  // Throws unless cov is symmetric with eigenvalues > 1e-12 * max eigenvalue.
  GaussianDist(Vector mean, Matrix cov);

  int dim() const noexcept { return static_cast<int>(mean_.size()); }
  const Vector& mean() const noexcept { return mean_; }
  const Matrix& cov() const noexcept { return cov_; }

  double log_density(const VectorRef& x) const;
  Vector sample(CounterStream& rng) const;

  // Coordinates [first, first + count).
  GaussianDist block(int first, int count) const;

 private:
  Vector mean_;
  Matrix cov_;
  Eigen::LLT<Matrix> chol_;
};

// Law of the stacked vector (x_1..x_n, y_1..y_m), each block of size d.
GaussianDist exact_joint(const BipartiteNetwork& net);
// Marginal of the stacked X block of exact_joint.
GaussianDist exact_x_marginal(const BipartiteNetwork& net);

// A blocked conditional as an affine-Gaussian map: out | in ~ N(gain in + offset, noise).
struct AffineGaussianStep {
  Matrix gain;
  Vector offset;
  Matrix noise;
};
AffineGaussianStep y_given_x(const BipartiteNetwork& net);
AffineGaussianStep x_given_y(const BipartiteNetwork& net);

struct ChainLaw {
  // Stacked (X^k, Y^(k-1)) for k >= 1; only the X block for k == 0.
  GaussianDist law;
  bool y_defined;
};

// Exact law of the sampler state after k sweeps started from X^0 ~ mu0
// (mu0 over the stacked X block, dimension n * d).
ChainLaw propagate_chain(const BipartiteNetwork& net, const GaussianDist& mu0, int k);

// Law of X^k written as an offset from the exact X-marginal:
//   X^k ~ N(target.mean + mean_offset, target.cov + cov_offset).
// The offsets are propagated directly (e_k = A e_{k-1}, D_k = A D_{k-1} A^T,
// A the X-to-X gain of one sweep), so they keep full relative precision long
// after the absolute moments have converged to the target in double precision.
struct MarginalDeviation {
  GaussianDist target;
  Vector mean_offset;
  Matrix cov_offset;
};

MarginalDeviation initial_deviation(const BipartiteNetwork& net, const Vector& mu0_mean,
                                    const Matrix& mu0_cov);
MarginalDeviation propagate_deviation(const BipartiteNetwork& net, const MarginalDeviation& dev,
                                      int sweeps);

// KL(law(X^k) || target) from a deviation, evaluated without cancellation.
// Returns +infinity when target.cov + cov_offset is singular.
double kl_from_deviation(const MarginalDeviation& dev);

// KL(p || q) for Gaussians of equal dimension.
double kl(const GaussianDist& p, const GaussianDist& q);
// Squared 2-Wasserstein distance.
double w2_squared(const GaussianDist& p, const GaussianDist& q);
// Total variation for 1-D Gaussians by adaptive quadrature of |p - q| / 2.
double tv_1d(const GaussianDist& p, const GaussianDist& q, double abs_tol = 1e-10);

}  // namespace gibbsnet
