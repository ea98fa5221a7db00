#pragma once

// Potential functions (negative log-densities) attached to network vertices.
//
// A Potential is an immutable value: copies share the same underlying
// definition, and every member function is safe to call concurrently.

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <utility>

#include "gibbsnet/error.hpp"

namespace gibbsnet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorRef = Eigen::Ref<const Vector>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class PotentialKind { Quadratic, Zero, Custom };

// h(x) = 0.5 (x - center)^T precision (x - center) + offset
struct QuadraticForm {
  Vector center;
  Matrix precision;
  double offset = 0.0;
  // precision == p * I; value and gradient then run through the vector kernels
  std::optional<double> isotropic;
};

class Potential {
 public:
  using ValueFn = std::function<double(const VectorRef&)>;
  using GradFn = std::function<Vector(const VectorRef&)>;
  // (y, eta') -> argmin_x h(x) + |x - y|^2 / (2 eta')
  using ProxFn = std::function<Vector(const VectorRef&, double)>;

  static Potential zero(int dim);
  static Potential quadratic(Vector center, Matrix precision, double offset = 0.0);
  static Potential isotropic_quadratic(Vector center, double precision, double offset = 0.0);
  // alpha and beta are taken as declared; they are never estimated.
  static Potential custom(int dim, ValueFn value, GradFn gradient, double alpha, double beta,
                          std::optional<ProxFn> prox = std::nullopt);

  PotentialKind kind() const noexcept;
  int dim() const noexcept;
  double alpha() const noexcept;
  double beta() const noexcept;

  double value(const VectorRef& x) const;
  Vector gradient(const VectorRef& x) const;

  bool has_closed_prox() const noexcept;
  // Only valid when has_closed_prox().
  Vector closed_prox(const VectorRef& y, double eta_prime) const;

  // Present for Quadratic and Zero (precision 0) kinds.
  std::optional<QuadraticForm> quadratic_form() const;

 private:
  struct Impl;
  explicit Potential(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

struct ProxOptions {
  // Gradient-norm target, relative: tol * (1 + |y|).
  double tolerance = 1e-10;
  int max_iter = 10'000;
};

class ProxError : public Error {
 public:
  ProxError(const std::string& what, Vector last_iterate, double residual)
      : Error(what), last_iterate_(std::move(last_iterate)), residual_(residual) {}
  const Vector& last_iterate() const noexcept { return last_iterate_; }
  double residual() const noexcept { return residual_; }

 private:
  Vector last_iterate_;
  double residual_;
};

// argmin_x h(x) + |x - y|^2 / (2 eta'). Closed form when available, otherwise
// gradient descent with step 1 / (beta + 1/eta').
Vector prox(const Potential& h, const VectorRef& y, double eta_prime,
            const ProxOptions& options = {});

// Tilts f and g by a linear term so that both are stationary at x_star while
// f + g is unchanged. x_star must be stationary for f + g.
std::pair<Potential, Potential> shift_to_common_minimizer(const Potential& f, const Potential& g,
                                                          const VectorRef& x_star,
                                                          double tolerance = 1e-8);

// h(x) + <v, x>, preserving kind where possible.
Potential add_linear_term(const Potential& h, const VectorRef& v);

}  // namespace gibbsnet
