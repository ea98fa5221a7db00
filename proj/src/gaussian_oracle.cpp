#include "gibbsnet/gaussian_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "gibbsnet/quadrature.hpp"

namespace gibbsnet {

GaussianDist::GaussianDist(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  const auto d = mean_.size();
  if (d < 1 || cov_.rows() != d || cov_.cols() != d) {
    throw Error("GaussianDist: covariance must be d x d with d = mean size >= 1");
  }
  const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw Error("GaussianDist: covariance is not symmetric");
  }
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(cov_, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  if (!(lmax > 0.0) || !(eig.eigenvalues().minCoeff() > 1e-12 * lmax)) {
    throw Error("GaussianDist: covariance is not positive definite");
  }
  chol_.compute(cov_);
  if (chol_.info() != Eigen::Success) throw Error("GaussianDist: Cholesky factorization failed");
}

double GaussianDist::log_density(const VectorRef& x) const {
  const Vector diff = x - mean_;
  const Vector white = chol_.matrixL().solve(diff);
  const double log_det = 2.0 * chol_.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (white.squaredNorm() + log_det + dim() * std::log(2.0 * std::numbers::pi));
}

Vector GaussianDist::sample(CounterStream& rng) const {
  Vector noise(dim());
  rng.fill_normal({noise.data(), static_cast<std::size_t>(noise.size())});
  return mean_ + chol_.matrixL() * noise;
}

GaussianDist GaussianDist::block(int first, int count) const {
  return GaussianDist(mean_.segment(first, count), cov_.block(first, first, count, count));
}

namespace {

// Joint precision J and linear term h of the network density:
// -log density = 0.5 z'Jz - h'z + const, z = (x_1..x_n, y_1..y_m).
template <class T>
struct Information {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  Mat J;  // joint precision, X block first
  Vec h;  // J * mean
  int nx;
};

template <class T = double>
Information<T> information_form(const BipartiteNetwork& net) {
  using Mat = typename Information<T>::Mat;
  using Vec = typename Information<T>::Vec;
  const int d = net.d();
  const int nx = net.n() * d;
  const int total = nx + net.m() * d;
  Information<T> info{Mat::Zero(total, total), Vec::Zero(total), nx};

  const auto add_potential = [&](const Potential& p, int offset, const char* side, int index) {
    const auto q = p.quadratic_form();
    if (!q) {
      throw Error(std::string("gaussian_oracle: ") + side + std::to_string(index) +
                  " is not quadratic");
    }
    const Mat precision = q->precision.template cast<T>();
    info.J.block(offset, offset, d, d) += precision;
    info.h.segment(offset, d) += precision * q->center.template cast<T>();
  };
  for (int i = 0; i < net.n(); ++i) add_potential(net.f(i), i * d, "f_", i);
  for (int j = 0; j < net.m(); ++j) add_potential(net.g(j), nx + j * d, "g_", j);

  const Mat eye = Mat::Identity(d, d);
  for (const Edge& e : net.edges()) {
    const T w = static_cast<T>(e.sigma) / static_cast<T>(net.eta());
    const int xi = e.i * d;
    const int yj = nx + e.j * d;
    info.J.block(xi, xi, d, d) += w * eye;
    info.J.block(yj, yj, d, d) += w * eye;
    info.J.block(xi, yj, d, d) -= w * eye;
    info.J.block(yj, xi, d, d) -= w * eye;
  }
  return info;
}

// out | in ~ N(J_oo^{-1}(h_o - J_oi in), J_oo^{-1})
AffineGaussianStep conditional(const Matrix& Joo, const Matrix& Joi, const Vector& ho) {
  const Eigen::LLT<Matrix> chol(Joo);
  if (chol.info() != Eigen::Success) {
    throw Error("gaussian_oracle: conditional precision is singular");
  }
  const Matrix noise = chol.solve(Matrix::Identity(Joo.rows(), Joo.cols()));
  return {-chol.solve(Joi), chol.solve(ho), 0.5 * (noise + noise.transpose())};
}

// a - log1p(a), accurate for small |a|.
double excess_over_log1p(double a) {
  if (std::abs(a) < 1e-2) {
    // a^2/2 - a^3/3 + a^4/4 - ...
    double term = a * a;
    double sum = 0.0;
    for (int k = 2; k <= 12; ++k) {
      sum += ((k % 2 == 0) ? 1.0 : -1.0) * term / k;
      term *= a;
    }
    return sum;
  }
  return a - std::log1p(a);
}

double std_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

GaussianDist exact_joint(const BipartiteNetwork& net) {
  // Extended precision: the 1/eta couplings make J ill-conditioned for small
  // eta, and the marginal covariance comes out of a cancelling Schur complement.
  using Wide = Information<long double>;
  const Wide info = information_form<long double>(net);
  const Eigen::LLT<Wide::Mat> chol(info.J);
  if (chol.info() != Eigen::Success) {
    throw Error("exact_joint: joint precision is singular (improper target)");
  }
  const Wide::Mat cov = chol.solve(Wide::Mat::Identity(info.J.rows(), info.J.cols()));
  const Wide::Vec mean = chol.solve(info.h);
  return GaussianDist(mean.cast<double>(), cov.cast<double>());
}

GaussianDist exact_x_marginal(const BipartiteNetwork& net) {
  return exact_joint(net).block(0, net.n() * net.d());
}

AffineGaussianStep y_given_x(const BipartiteNetwork& net) {
  const Information<double> info = information_form(net);
  const int ny = static_cast<int>(info.J.rows()) - info.nx;
  return conditional(info.J.block(info.nx, info.nx, ny, ny), info.J.block(info.nx, 0, ny, info.nx),
                     info.h.segment(info.nx, ny));
}

AffineGaussianStep x_given_y(const BipartiteNetwork& net) {
  const Information<double> info = information_form(net);
  const int ny = static_cast<int>(info.J.rows()) - info.nx;
  return conditional(info.J.block(0, 0, info.nx, info.nx), info.J.block(0, info.nx, info.nx, ny),
                     info.h.segment(0, info.nx));
}

ChainLaw propagate_chain(const BipartiteNetwork& net, const GaussianDist& mu0, int k) {
  const int nx = net.n() * net.d();
  if (mu0.dim() != nx) throw Error("propagate_chain: mu0 must live on the stacked X block");
  if (k < 0) throw Error("propagate_chain: k must be >= 0");
  if (k == 0) return {mu0, false};

  const AffineGaussianStep ystep = y_given_x(net);
  const AffineGaussianStep xstep = x_given_y(net);
  Vector mx = mu0.mean();
  Matrix sx = mu0.cov();
  Vector my;
  Matrix sy;
  for (int s = 0; s < k; ++s) {
    my = ystep.gain * mx + ystep.offset;
    sy = ystep.gain * sx * ystep.gain.transpose() + ystep.noise;
    mx = xstep.gain * my + xstep.offset;
    sx = xstep.gain * sy * xstep.gain.transpose() + xstep.noise;
  }
  const int ny = static_cast<int>(my.size());
  Vector mean(nx + ny);
  mean << mx, my;
  Matrix cov(nx + ny, nx + ny);
  const Matrix cross = xstep.gain * sy;  // Cov(X^k, Y^(k-1))
  cov.topLeftCorner(nx, nx) = sx;
  cov.topRightCorner(nx, ny) = cross;
  cov.bottomLeftCorner(ny, nx) = cross.transpose();
  cov.bottomRightCorner(ny, ny) = sy;
  return {GaussianDist(mean, cov), true};
}

MarginalDeviation initial_deviation(const BipartiteNetwork& net, const Vector& mu0_mean,
                                    const Matrix& mu0_cov) {
  GaussianDist target = exact_x_marginal(net);
  if (mu0_mean.size() != target.dim() || mu0_cov.rows() != target.dim() ||
      mu0_cov.cols() != target.dim()) {
    throw Error("initial_deviation: mu0 must live on the stacked X block");
  }
  Vector e = mu0_mean - target.mean();
  Matrix D = mu0_cov - target.cov();
  return {std::move(target), std::move(e), std::move(D)};
}

MarginalDeviation propagate_deviation(const BipartiteNetwork& net, const MarginalDeviation& dev,
                                      int sweeps) {
  if (sweeps < 0) throw Error("propagate_deviation: sweeps must be >= 0");
  const Matrix A = x_given_y(net).gain * y_given_x(net).gain;
  MarginalDeviation out = dev;
  for (int s = 0; s < sweeps; ++s) {
    out.mean_offset = A * out.mean_offset;
    out.cov_offset = A * out.cov_offset * A.transpose();
    out.cov_offset = 0.5 * (out.cov_offset + out.cov_offset.transpose()).eval();
  }
  return out;
}

double kl_from_deviation(const MarginalDeviation& dev) {
  const Eigen::LLT<Matrix> chol(dev.target.cov());
  const Matrix L = chol.matrixL();
  const auto Lsolve = L.triangularView<Eigen::Lower>();
  // Whitened offset: L^{-1} D L^{-T}
  const Matrix half = Lsolve.solve(dev.cov_offset);
  Matrix whitened = Lsolve.solve(half.transpose());
  whitened = 0.5 * (whitened + whitened.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(whitened, Eigen::EigenvaluesOnly);
  double total = 0.0;
  for (const double lambda : eig.eigenvalues()) {
    if (!(lambda > -1.0)) return std::numeric_limits<double>::infinity();
    total += excess_over_log1p(lambda);
  }
  const Vector white_mean = Lsolve.solve(dev.mean_offset);
  return 0.5 * (total + white_mean.squaredNorm());
}

double kl(const GaussianDist& p, const GaussianDist& q) {
  if (p.dim() != q.dim()) throw Error("kl: dimension mismatch");
  const Eigen::LLT<Matrix> qc(q.cov());
  const Matrix qL = qc.matrixL();
  // Eigenvalues of the whitened covariance; each contributes
  // (lambda - 1) - log(lambda), taken through log1p so that nearly equal laws
  // keep their relative accuracy.
  const auto lower = qL.triangularView<Eigen::Lower>();
  const Matrix half = lower.solve(p.cov());
  const Matrix whitened = lower.solve(half.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (whitened + whitened.transpose()),
                                                  Eigen::EigenvaluesOnly);
  double spread = 0.0;
  for (const double lambda : eig.eigenvalues()) {
    if (!(lambda > 0.0)) return kInfinity;
    const double dev = lambda - 1.0;
    spread += dev - std::log1p(dev);
  }
  const Vector white_diff = lower.solve(q.mean() - p.mean());
  return std::max(0.0, 0.5 * (spread + white_diff.squaredNorm()));
}

namespace {

Matrix spd_sqrt(const Matrix& S) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (S + S.transpose()));
  const double floor = 1e-14 * std::max(0.0, eig.eigenvalues().maxCoeff());
  const Vector roots = eig.eigenvalues().cwiseMax(floor).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

double w2_squared(const GaussianDist& p, const GaussianDist& q) {
  if (p.dim() != q.dim()) throw Error("w2_squared: dimension mismatch");
  const Matrix q_half = spd_sqrt(q.cov());
  const Matrix cross = spd_sqrt(q_half * p.cov() * q_half);
  const double bures = (p.cov() + q.cov() - 2.0 * cross).trace();
  return std::max(0.0, (p.mean() - q.mean()).squaredNorm() + bures);
}

double tv_1d(const GaussianDist& p, const GaussianDist& q, double abs_tol) {
  if (p.dim() != 1 || q.dim() != 1) throw Error("tv_1d: both laws must be one-dimensional");
  const double mp = p.mean()(0), mq = q.mean()(0);
  const double sp = std::sqrt(p.cov()(0, 0)), sq = std::sqrt(q.cov()(0, 0));

  // Breakpoints: both laws' scale ladders plus the density crossings, so that
  // every panel is smooth and no feature is narrower than its panel.
  std::vector<double> cuts;
  for (const double k : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 40.0}) {
    cuts.insert(cuts.end(), {mp - k * sp, mp + k * sp, mq - k * sq, mq + k * sq});
  }
  // log p - log q = a x^2 + b x + c
  const double a = 0.5 / (sq * sq) - 0.5 / (sp * sp);
  const double b = mp / (sp * sp) - mq / (sq * sq);
  const double c = 0.5 * mq * mq / (sq * sq) - 0.5 * mp * mp / (sp * sp) + std::log(sq / sp);
  if (std::abs(a) > 1e-300) {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      cuts.push_back((-b + root) / (2.0 * a));
      cuts.push_back((-b - root) / (2.0 * a));
    }
  } else if (b != 0.0) {
    cuts.push_back(-c / b);
  }
  const double lo = std::min(mp - 40.0 * sp, mq - 40.0 * sq);
  const double hi = std::max(mp + 40.0 * sp, mq + 40.0 * sq);
  std::erase_if(cuts, [&](double x) { return !(x >= lo && x <= hi); });
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const auto integrand = [&](double x) {
    return 0.5 * std::abs(std_normal_pdf((x - mp) / sp) / sp - std_normal_pdf((x - mq) / sq) / sq);
  };
  const double panel_tol = abs_tol / static_cast<double>(cuts.size());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    total += adaptive_simpson(integrand, cuts[k], cuts[k + 1], panel_tol).value;
  }
  return std::clamp(total, 0.0, 1.0);
}

}  // namespace gibbsnet
