#include "gibbsnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gibbsnet/quadrature.hpp"

namespace gibbsnet {

EmpiricalGaussian fit_gaussian(const Matrix& samples, std::optional<double> ridge) {
  const long count = static_cast<long>(samples.rows());
  const long d = static_cast<long>(samples.cols());
  if (d < 1) throw Error("fit_gaussian: samples need at least one column");
  if (count < d + 2) {
    throw Error("fit_gaussian: need at least d + 2 = " + std::to_string(d + 2) + " samples, got " +
                std::to_string(count));
  }
  EmpiricalGaussian out;
  out.n_samples = count;
  out.mean = samples.colwise().mean().transpose();
  const Matrix centered = samples.rowwise() - out.mean.transpose();
  out.cov = centered.transpose() * centered / static_cast<double>(count - 1);
  if (ridge) {
    if (!(*ridge >= 0.0)) throw Error("fit_gaussian: ridge must be >= 0");
    out.ridge = *ridge;
  } else {
    out.ridge = 1e-9 * out.cov.trace() / static_cast<double>(d);
    if (!(out.ridge > 0.0)) {
      throw Error("fit_gaussian: samples are degenerate; pass an explicit ridge");
    }
  }
  out.cov.diagonal().array() += out.ridge;
  return out;
}

double empirical_kl_vs_gaussian(const Matrix& samples, const GaussianDist& target,
                                std::optional<double> ridge) {
  return kl(fit_gaussian(samples, ridge).dist(), target);
}

double Quadrature1D::density(std::size_t k) const { return std::exp(log_density.at(k)); }

double Quadrature1D::total_mass() const {
  double mass = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    mass += 0.5 * (grid[k] - grid[k - 1]) * (density(k) + density(k - 1));
  }
  return mass;
}

double Quadrature1D::cdf(double x) const {
  if (cumulative.size() != grid.size()) throw Error("Quadrature1D: cumulative mass not tabulated");
  if (x <= grid.front()) return 0.0;
  if (x >= grid.back()) return std::min(1.0, cumulative.back());
  const auto k = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), x) -
                                          grid.begin());
  // Exact integral of the linear interpolant from grid[k - 1] to x.
  const double h = grid[k] - grid[k - 1];
  const double s = x - grid[k - 1];
  const double p0 = density(k - 1);
  const double slope = (density(k) - p0) / h;
  return std::min(1.0, cumulative[k - 1] + s * (p0 + 0.5 * slope * s));
}

std::vector<double> linear_grid(double lo, double hi, int points) {
  if (points < 2 || !(hi > lo)) throw Error("linear_grid: need points >= 2 and hi > lo");
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double h = (hi - lo) / (points - 1);
  for (int k = 0; k < points; ++k) grid[static_cast<std::size_t>(k)] = lo + h * k;
  grid.back() = hi;
  return grid;
}

Quadrature1D density_1d(const std::function<double(double)>& log_density,
                        std::vector<double> grid) {
  if (grid.size() < 3) throw Error("density_1d: grid needs at least 3 points");
  if (!std::is_sorted(grid.begin(), grid.end()) ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    throw Error("density_1d: grid must be strictly increasing");
  }
  Quadrature1D q;
  q.log_density.reserve(grid.size());
  for (const double x : grid) {
    const double v = log_density(x);
    if (std::isnan(v)) throw Error("density_1d: log density is NaN at x = " + std::to_string(x));
    q.log_density.push_back(v);
  }
  const double peak = *std::max_element(q.log_density.begin(), q.log_density.end());
  if (!std::isfinite(peak)) throw Error("density_1d: log density has no finite maximum");
  const double tail_limit = peak + std::log(1e-12);
  if (q.log_density.front() >= tail_limit || q.log_density.back() >= tail_limit) {
    throw Error("density_1d: grid [" + std::to_string(grid.front()) + ", " +
                std::to_string(grid.back()) + "] does not cover the mass (tails above 1e-12 of peak)");
  }
  q.grid = std::move(grid);
  for (double& v : q.log_density) v -= peak;
  const double mass = q.total_mass();
  q.log_normalizer = peak + std::log(mass);
  for (double& v : q.log_density) v -= std::log(mass);
  q.cumulative.assign(q.grid.size(), 0.0);
  for (std::size_t k = 1; k < q.grid.size(); ++k) {
    q.cumulative[k] = q.cumulative[k - 1] +
                      0.5 * (q.grid[k] - q.grid[k - 1]) * (q.density(k) + q.density(k - 1));
  }
  return q;
}

Quadrature1D marginal_density_1d(const Potential& f, const Potential& g, double eta,
                                 std::vector<double> grid) {
  if (f.dim() != 1 || g.dim() != 1) throw Error("marginal_density_1d: potentials must be 1-D");
  if (!(eta > 0.0)) throw Error("marginal_density_1d: eta must be positive");
  const double half_width = 12.0 * std::sqrt(eta);
  const double tol = 1e-12 * std::sqrt(eta);
  const auto log_marginal = [&](double x) {
    Vector xv(1);
    xv(0) = x;
    // Conditional of y given x peaks at the prox point and has sd <= sqrt(eta).
    const double mode = prox(g, xv, eta)(0);
    const auto energy = [&](double y) {
      Vector yv(1);
      yv(0) = y;
      return g.value(yv) + (x - y) * (x - y) / (2.0 * eta);
    };
    const double shift = energy(mode);
    const double inner =
        adaptive_simpson([&](double y) { return std::exp(shift - energy(y)); }, mode - half_width,
                         mode + half_width, tol)
            .value;
    return -f.value(xv) - shift + std::log(inner);
  };
  return density_1d(log_marginal, std::move(grid));
}

Quadrature1D composite_density_1d(const Potential& f, const Potential& g,
                                  std::vector<double> grid) {
  if (f.dim() != 1 || g.dim() != 1) throw Error("composite_density_1d: potentials must be 1-D");
  return density_1d(
      [&](double x) {
        Vector xv(1);
        xv(0) = x;
        return -f.value(xv) - g.value(xv);
      },
      std::move(grid));
}

namespace {

double tv_trapezoid(const std::vector<double>& grid, const std::function<double(std::size_t)>& p,
                    const std::function<double(std::size_t)>& q) {
  double total = 0.0;
  double prev = std::abs(p(0) - q(0));
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double cur = std::abs(p(k) - q(k));
    total += 0.5 * (grid[k] - grid[k - 1]) * (cur + prev);
    prev = cur;
  }
  return 0.5 * total;
}

}  // namespace

double tv_on_grid(const Quadrature1D& p, const Quadrature1D& q) {
  if (p.grid != q.grid) throw Error("tv_on_grid: tabulations must share a grid");
  return tv_trapezoid(
      p.grid, [&](std::size_t k) { return p.density(k); },
      [&](std::size_t k) { return q.density(k); });
}

double tv_on_grid(const Quadrature1D& p, const GaussianDist& q) {
  if (q.dim() != 1) throw Error("tv_on_grid: Gaussian must be 1-D");
  return tv_trapezoid(
      p.grid, [&](std::size_t k) { return p.density(k); },
      [&](std::size_t k) {
        Vector x(1);
        x(0) = p.grid[k];
        return std::exp(q.log_density(x));
      });
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw Error("ks_statistic: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double count = static_cast<double>(sorted.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const double F = cdf(sorted[k]);
    worst = std::max({worst, (k + 1) / count - F, F - k / count});
  }
  return worst;
}

}  // namespace gibbsnet
