#include "gibbsnet/potentials.hpp"

#include <cmath>
#include <span>
#include <string>

#include "gibbsnet/kernels.hpp"

namespace gibbsnet {

struct Potential::Impl {
  PotentialKind kind;
  int dim;
  double alpha;
  double beta;
  ValueFn value;
  GradFn gradient;
  std::optional<ProxFn> prox;
  std::optional<QuadraticForm> quadratic;
};

namespace {

std::span<const double> as_span(const VectorRef& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void check_dim(const VectorRef& x, int dim, const char* where) {
  if (x.size() != dim) {
    throw Error(std::string(where) + ": expected dimension " + std::to_string(dim) + ", got " +
                std::to_string(x.size()));
  }
}

}  // namespace

Potential Potential::zero(int dim) {
  if (dim < 1) throw Error("Potential::zero: dimension must be >= 1");
  auto impl = std::make_shared<Impl>();
  impl->kind = PotentialKind::Zero;
  impl->dim = dim;
  impl->alpha = 0.0;
  impl->beta = 0.0;
  impl->value = [](const VectorRef&) { return 0.0; };
  impl->gradient = [dim](const VectorRef&) -> Vector { return Vector::Zero(dim); };
  impl->prox = [](const VectorRef& y, double) -> Vector { return y; };
  impl->quadratic = QuadraticForm{Vector::Zero(dim), Matrix::Zero(dim, dim), 0.0, 0.0};
  return Potential(std::move(impl));
}

Potential Potential::quadratic(Vector center, Matrix precision, double offset) {
  const auto dim = static_cast<int>(center.size());
  if (dim < 1 || precision.rows() != dim || precision.cols() != dim) {
    throw Error("Potential::quadratic: precision must be d x d with d = center size >= 1");
  }
  if (!precision.isApprox(precision.transpose(), 1e-12)) {
    throw Error("Potential::quadratic: precision must be symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(precision, Eigen::EigenvaluesOnly);
  const double lambda_min = eig.eigenvalues().minCoeff();
  const double lambda_max = eig.eigenvalues().maxCoeff();
  if (!(lambda_min > 0.0)) {
    throw Error("Potential::quadratic: precision must be positive definite");
  }

  std::optional<double> iso;
  const double p0 = precision(0, 0);
  if ((precision - p0 * Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff() == 0.0) {
    iso = p0;
  }

  auto impl = std::make_shared<Impl>();
  impl->kind = PotentialKind::Quadratic;
  impl->dim = dim;
  impl->alpha = iso ? *iso : lambda_min;
  impl->beta = iso ? *iso : lambda_max;
  impl->quadratic = QuadraticForm{center, precision, offset, iso};

  if (iso) {
    const double p = *iso;
    impl->value = [center, p, offset](const VectorRef& x) {
      return 0.5 * p * kernels::squared_distance(as_span(x), as_span(center)) + offset;
    };
    impl->gradient = [center, p](const VectorRef& x) -> Vector { return p * (x - center); };
    // (p eta' u + y) / (p eta' + 1)
    impl->prox = [center, p](const VectorRef& y, double eta_prime) -> Vector {
      return (p * eta_prime * center + y) / (p * eta_prime + 1.0);
    };
  } else {
    impl->value = [center, precision, offset](const VectorRef& x) {
      const Vector diff = x - center;
      return 0.5 * diff.dot(precision * diff) + offset;
    };
    impl->gradient = [center, precision](const VectorRef& x) -> Vector {
      return precision * (x - center);
    };
    // (P + I/eta') x = P u + y/eta'
    impl->prox = [center, precision, dim](const VectorRef& y, double eta_prime) -> Vector {
      const Matrix system = precision + Matrix::Identity(dim, dim) / eta_prime;
      return system.llt().solve(precision * center + y / eta_prime);
    };
  }
  return Potential(std::move(impl));
}

Potential Potential::isotropic_quadratic(Vector center, double precision, double offset) {
  const auto dim = center.size();
  return quadratic(std::move(center), precision * Matrix::Identity(dim, dim), offset);
}

Potential Potential::custom(int dim, ValueFn value, GradFn gradient, double alpha, double beta,
                            std::optional<ProxFn> prox) {
  if (dim < 1) throw Error("Potential::custom: dimension must be >= 1");
  if (!(alpha >= 0.0) || !(beta >= alpha)) {
    throw Error("Potential::custom: need 0 <= alpha <= beta");
  }
  if (!value || !gradient) throw Error("Potential::custom: value and gradient are required");
  auto impl = std::make_shared<Impl>();
  impl->kind = PotentialKind::Custom;
  impl->dim = dim;
  impl->alpha = alpha;
  impl->beta = beta;
  impl->value = std::move(value);
  impl->gradient = std::move(gradient);
  impl->prox = std::move(prox);
  return Potential(std::move(impl));
}

PotentialKind Potential::kind() const noexcept { return impl_->kind; }
int Potential::dim() const noexcept { return impl_->dim; }
double Potential::alpha() const noexcept { return impl_->alpha; }
double Potential::beta() const noexcept { return impl_->beta; }

double Potential::value(const VectorRef& x) const {
  check_dim(x, impl_->dim, "Potential::value");
  return impl_->value(x);
}

Vector Potential::gradient(const VectorRef& x) const {
  check_dim(x, impl_->dim, "Potential::gradient");
  return impl_->gradient(x);
}

bool Potential::has_closed_prox() const noexcept { return impl_->prox.has_value(); }

Vector Potential::closed_prox(const VectorRef& y, double eta_prime) const {
  if (!impl_->prox) throw Error("Potential::closed_prox: no closed-form proximal map");
  check_dim(y, impl_->dim, "Potential::closed_prox");
  return (*impl_->prox)(y, eta_prime);
}

std::optional<QuadraticForm> Potential::quadratic_form() const { return impl_->quadratic; }

Vector prox(const Potential& h, const VectorRef& y, double eta_prime, const ProxOptions& options) {
  if (!(eta_prime > 0.0)) throw Error("prox: eta' must be positive");
  if (!(h.alpha() + 1.0 / eta_prime > 0.0)) throw Error("prox: alpha + 1/eta' must be positive");
  if (h.has_closed_prox()) return h.closed_prox(y, eta_prime);
  if (!std::isfinite(h.beta())) {
    throw Error("prox: gradient descent needs a finite smoothness constant");
  }

  const double inv_eta = 1.0 / eta_prime;
  const double step = 1.0 / (h.beta() + inv_eta);
  const double target = options.tolerance * (1.0 + y.norm());
  Vector x = y;
  double residual = kInfinity;
  for (int iter = 0; iter < options.max_iter; ++iter) {
    const Vector grad = h.gradient(x) + (x - y) * inv_eta;
    residual = grad.norm();
    if (residual <= target) return x;
    x -= step * grad;
  }
  const Vector grad = h.gradient(x) + (x - y) * inv_eta;
  residual = grad.norm();
  if (residual <= target) return x;
  throw ProxError("prox: gradient descent did not converge in " +
                      std::to_string(options.max_iter) +
                      " iterations (residual " + std::to_string(residual) + ")",
                  x, residual);
}

Potential add_linear_term(const Potential& h, const VectorRef& v) {
  if (v.size() != h.dim()) throw Error("add_linear_term: dimension mismatch");
  if (v.isZero(0.0)) return h;

  if (h.kind() == PotentialKind::Quadratic) {
    // 0.5 (x-u)'P(x-u) + <v,x> + o = 0.5 (x-u')'P(x-u') + o', u' = u - P^{-1} v
    const QuadraticForm q = *h.quadratic_form();
    const Vector shift = q.precision.llt().solve(v);
    const double offset = q.offset + v.dot(q.center) - 0.5 * v.dot(shift);
    return Potential::quadratic(q.center - shift, q.precision, offset);
  }

  const Vector tilt = v;
  std::optional<Potential::ProxFn> tilted_prox;
  if (h.has_closed_prox()) {
    // prox_{h + <v,.>}(y) = prox_h(y - eta' v)
    tilted_prox = [h, tilt](const VectorRef& y, double eta_prime) -> Vector {
      return h.closed_prox(y - eta_prime * tilt, eta_prime);
    };
  }
  return Potential::custom(
      h.dim(), [h, tilt](const VectorRef& x) { return h.value(x) + tilt.dot(x); },
      [h, tilt](const VectorRef& x) -> Vector { return h.gradient(x) + tilt; }, h.alpha(),
      h.beta(), std::move(tilted_prox));
}

std::pair<Potential, Potential> shift_to_common_minimizer(const Potential& f, const Potential& g,
                                                          const VectorRef& x_star,
                                                          double tolerance) {
  if (f.dim() != g.dim() || x_star.size() != f.dim()) {
    throw Error("shift_to_common_minimizer: dimension mismatch");
  }
  const Vector grad_f = f.gradient(x_star);
  const double stationarity = (grad_f + g.gradient(x_star)).norm();
  if (stationarity > tolerance) {
    throw Error("shift_to_common_minimizer: x_star is not stationary for f + g (gradient norm " +
                std::to_string(stationarity) + ")");
  }
  return {add_linear_term(f, -grad_f), add_linear_term(g, grad_f)};
}

}  // namespace gibbsnet
