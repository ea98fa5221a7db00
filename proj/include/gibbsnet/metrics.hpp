#pragma once

// Estimators that connect sampler output to the exact laws and bounds.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gibbsnet/gaussian_oracle.hpp"
#include "gibbsnet/potentials.hpp"

namespace gibbsnet {

struct EmpiricalGaussian {
  Vector mean;
  Matrix cov;  // unbiased sample covariance + ridge * I
  double ridge = 0.0;
  long n_samples = 0;

  GaussianDist dist() const { return GaussianDist(mean, cov); }
};

// samples: one row per draw. The default ridge is 1e-9 * tr(cov) / d, which
// needs a non-degenerate sample; pass an explicit ridge otherwise.
EmpiricalGaussian fit_gaussian(const Matrix& samples, std::optional<double> ridge = std::nullopt);

double empirical_kl_vs_gaussian(const Matrix& samples, const GaussianDist& target,
                                std::optional<double> ridge = std::nullopt);

// A normalized 1-D density tabulated on an increasing grid.
struct Quadrature1D {
  std::vector<double> grid;
  std::vector<double> log_density;  // normalized
  double log_normalizer = 0.0;      // log of the trapezoid integral before normalization
  std::vector<double> cumulative;   // trapezoid integral from grid.front() to each node

  double density(std::size_t k) const;
  // Trapezoid integral of the tabulated density.
  double total_mass() const;
  // CDF from the cumulative trapezoid rule, linear between grid points.
  double cdf(double x) const;
};

// Evenly spaced grid with `points` nodes on [lo, hi].
std::vector<double> linear_grid(double lo, double hi, int points);

// Tabulates exp(log_density) on the grid and normalizes it. Throws unless the
// density at both ends is below 1e-12 of its peak.
Quadrature1D density_1d(const std::function<double(double)>& log_density,
                        std::vector<double> grid);

// X-marginal of the two-node density exp(-f(x) - g(y) - (x - y)^2 / (2 eta)),
// d = 1, with the y-integral done by adaptive quadrature at every grid point.
Quadrature1D marginal_density_1d(const Potential& f, const Potential& g, double eta,
                                 std::vector<double> grid);

// Normalized exp(-f - g) on the grid.
Quadrature1D composite_density_1d(const Potential& f, const Potential& g,
                                  std::vector<double> grid);

// Trapezoid TV between two tabulations on the same grid.
double tv_on_grid(const Quadrature1D& p, const Quadrature1D& q);
// Trapezoid TV against a 1-D Gaussian evaluated on p's grid.
double tv_on_grid(const Quadrature1D& p, const GaussianDist& q);

// sup_x |F_n(x) - F(x)| for a one-sample KS test; sorts a copy of samples.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

}  // namespace gibbsnet
