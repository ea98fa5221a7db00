#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "gibbsnet/potentials.hpp"

using namespace gibbsnet;
using fixtures::vec;

namespace {

// y^2 / 2 + sqrt(1 + y^2): curvature 1 + (1 + y^2)^{-3/2} in (1, 2].
Potential soft_abs() {
  return Potential::custom(
      1, [](const VectorRef& y) { return 0.5 * y(0) * y(0) + std::sqrt(1.0 + y(0) * y(0)); },
      [](const VectorRef& y) { return vec({y(0) + y(0) / std::sqrt(1.0 + y(0) * y(0))}); }, 1.0,
      2.0);
}

Matrix random_spd(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> normal;
  Matrix A(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) A(r, c) = normal(rng);
  Matrix P = A * A.transpose();
  P.diagonal().array() += 0.3;
  return P;
}

Vector random_point(std::mt19937_64& rng, int d, double scale = 3.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector x(d);
  for (int k = 0; k < d; ++k) x(k) = normal(rng);
  return x;
}

std::vector<Potential> zoo(std::mt19937_64& rng) {
  return {Potential::zero(3),
          Potential::isotropic_quadratic(vec({1.0, -2.0, 0.5}), 1.7, 0.3),
          Potential::quadratic(random_point(rng, 3), random_spd(rng, 3)),
          Potential::quadratic(vec({0.0, 1.0, 2.0}), Vector(vec({0.5, 2.0, 4.0})).asDiagonal()),
          soft_abs()};
}

// Central differences, step scaled to |x|.
Vector numeric_gradient(const Potential& h, const Vector& x) {
  Vector g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double step = 1e-5 * (1.0 + std::abs(x(k)));
    Vector hi = x, lo = x;
    hi(k) += step;
    lo(k) -= step;
    g(k) = (h.value(hi) - h.value(lo)) / (2.0 * step);
  }
  return g;
}

}  // namespace

TEST_CASE("zero potential") {
  const Potential z = Potential::zero(2);
  CHECK(z.kind() == PotentialKind::Zero);
  CHECK(z.alpha() == 0.0);
  CHECK(z.beta() == 0.0);
  CHECK(z.value(vec({3.0, 4.0})) == 0.0);
  CHECK(z.gradient(vec({3.0, 4.0})).isZero(0.0));
  CHECK(prox(z, vec({3.0, -1.0}), 0.7) == vec({3.0, -1.0}));
}

TEST_CASE("quadratic constants are the extreme eigenvalues of the precision") {
  Matrix P(2, 2);
  P << 2.0, 1.0, 1.0, 2.0;
  const Potential q = Potential::quadratic(vec({0.0, 0.0}), P);
  CHECK(q.alpha() == doctest::Approx(1.0));
  CHECK(q.beta() == doctest::Approx(3.0));
  CHECK(q.has_closed_prox());

  const Potential iso = Potential::isotropic_quadratic(vec({1.0}), 2.0, 0.5);
  CHECK(iso.alpha() == 2.0);
  CHECK(iso.beta() == 2.0);
  CHECK(iso.value(vec({3.0})) == doctest::Approx(0.5 * 2.0 * 4.0 + 0.5));
}

TEST_CASE("invalid quadratics and customs are rejected") {
  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(Potential::quadratic(vec({0.0, 0.0}), asym), Error);
  Matrix indefinite(2, 2);
  indefinite << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(Potential::quadratic(vec({0.0, 0.0}), indefinite), Error);
  CHECK_THROWS_AS(Potential::quadratic(vec({0.0}), Matrix::Identity(2, 2)), Error);
  CHECK_THROWS_AS(Potential::custom(
                      1, [](const VectorRef&) { return 0.0; },
                      [](const VectorRef& x) { return Vector(Vector::Zero(x.size())); }, 2.0, 1.0),
                  Error);
}

TEST_CASE("gradients agree with finite differences") {
  std::mt19937_64 rng(3);
  for (const Potential& h : zoo(rng)) {
    for (int t = 0; t < 50; ++t) {
      const Vector x = random_point(rng, h.dim());
      const Vector g = h.gradient(x);
      const Vector num = numeric_gradient(h, x);
      CHECK((g - num).norm() <= 1e-5 * std::max(1.0, g.norm()));
    }
  }
}

TEST_CASE("strong convexity and smoothness hold on random pairs") {
  std::mt19937_64 rng(4);
  for (const Potential& h : zoo(rng)) {
    for (int t = 0; t < 1000; ++t) {
      const Vector x = random_point(rng, h.dim());
      const Vector y = random_point(rng, h.dim());
      const double gap = h.value(x) - h.value(y) - h.gradient(y).dot(x - y);
      const double dist_sq = (x - y).squaredNorm();
      const double slack = 1e-9 * (1.0 + std::abs(h.value(x)) + std::abs(h.value(y)));
      CHECK(gap >= 0.5 * h.alpha() * dist_sq - slack);
      if (std::isfinite(h.beta())) CHECK(gap <= 0.5 * h.beta() * dist_sq + slack);
    }
  }
}

TEST_CASE("prox examples") {
  SUBCASE("(x - 2)^2 at y = 0, eta' = 1 solves 2(x - 2) + x = 0") {
    const Vector x = prox(fixtures::square(2.0), vec({0.0}), 1.0);
    CHECK(x(0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
    // Grid minimization of the prox objective.
    double best = 0.0, best_val = kInfinity;
    for (int k = 0; k <= 400000; ++k) {
      const double t = -1.0 + 4.0 * k / 400000.0;
      const double v = (t - 2.0) * (t - 2.0) + t * t / 2.0;
      if (v < best_val) {
        best_val = v;
        best = t;
      }
    }
    CHECK(std::abs(best - x(0)) <= 1e-5);
  }
  SUBCASE("isotropic closed form matches gradient descent on the same function") {
    const double sigma_sq = 0.4;
    const Vector u = vec({1.0, -3.0});
    const Potential closed = Potential::isotropic_quadratic(u, 1.0 / sigma_sq);
    const Potential opaque = Potential::custom(
        2, [&](const VectorRef& x) { return 0.5 * (x - u).squaredNorm() / sigma_sq; },
        [&](const VectorRef& x) { return Vector((x - u) / sigma_sq); }, 1.0 / sigma_sq,
        1.0 / sigma_sq);
    CHECK_FALSE(opaque.has_closed_prox());
    const Vector y = vec({0.3, 2.0});
    const double eta = 0.7;
    const Vector expected = (eta * u + sigma_sq * y) / (eta + sigma_sq);
    CHECK((prox(closed, y, eta) - expected).norm() <= 1e-14);
    CHECK((prox(opaque, y, eta) - expected).norm() <= 1e-9);
  }
  SUBCASE("full-matrix closed form satisfies the stationarity condition") {
    std::mt19937_64 rng(8);
    const Matrix P = random_spd(rng, 4);
    const Vector u = random_point(rng, 4);
    const Vector y = random_point(rng, 4);
    const Potential q = Potential::quadratic(u, P);
    const Vector x = prox(q, y, 0.3);
    CHECK((P * (x - u) + (x - y) / 0.3).norm() <= 1e-10 * (1.0 + y.norm()));
  }
}

TEST_CASE("gradient-descent prox meets its residual target") {
  const Potential h = soft_abs();
  for (const double y0 : {-5.0, -0.3, 0.0, 2.0, 40.0}) {
    const double eta = 0.8;
    const Vector x = prox(h, vec({y0}), eta);
    const double residual = std::abs(h.gradient(x)(0) + (x(0) - y0) / eta);
    CHECK(residual <= 1e-10 * (1.0 + std::abs(y0)));
  }
}

TEST_CASE("prox is non-expansive") {
  std::mt19937_64 rng(6);
  for (const Potential& h : zoo(rng)) {
    for (int t = 0; t < 200; ++t) {
      const Vector y1 = random_point(rng, h.dim());
      const Vector y2 = random_point(rng, h.dim());
      const double eta = 0.05 + 2.0 * std::uniform_real_distribution<double>()(rng);
      CHECK((prox(h, y1, eta) - prox(h, y2, eta)).norm() <= (y1 - y2).norm() * (1.0 + 1e-9) + 1e-12);
    }
  }
}

TEST_CASE("prox reports non-convergence with its last iterate") {
  ProxOptions opts;
  opts.max_iter = 2;
  try {
    prox(soft_abs(), vec({50.0}), 100.0, opts);
    FAIL("expected ProxError");
  } catch (const ProxError& e) {
    CHECK(e.last_iterate().size() == 1);
    CHECK(e.residual() > 0.0);
  }
  const Potential unbounded = Potential::custom(
      1, [](const VectorRef& x) { return std::cosh(x(0)); },
      [](const VectorRef& x) { return vec({std::sinh(x(0))}); }, 1.0, kInfinity);
  CHECK_THROWS_AS(prox(unbounded, vec({1.0}), 1.0), Error);
}

TEST_CASE("shift_to_common_minimizer") {
  const auto f_plus_g_unchanged = [](const Potential& f, const Potential& g, const Potential& fs,
                                     const Potential& gs) {
    for (const double x : {-3.0, -0.5, 0.0, 0.25, 1.0, 7.0}) {
      const double before = f.value(vec({x})) + g.value(vec({x}));
      const double after = fs.value(vec({x})) + gs.value(vec({x}));
      CHECK(after == doctest::Approx(before).epsilon(1e-13));
    }
  };

  SUBCASE("shared minimizer leaves both unchanged") {
    const Potential f = fixtures::square(1.0);
    const auto [fs, gs] = shift_to_common_minimizer(f, f, vec({1.0}));
    for (const double x : {-1.0, 0.0, 2.5}) {
      CHECK(fs.value(vec({x})) == doctest::Approx(f.value(vec({x}))));
      CHECK(gs.value(vec({x})) == doctest::Approx(f.value(vec({x}))));
    }
  }

  SUBCASE("f = x^2, g = (x - 1)^2 at x* = 1/2 gives x^2 - x and (x - 1)^2 + x") {
    const Potential f = fixtures::square(0.0);
    const Potential g = fixtures::square(1.0);
    const auto [fs, gs] = shift_to_common_minimizer(f, g, vec({0.5}));
    for (const double x : {-2.0, 0.0, 0.5, 1.3, 4.0}) {
      CHECK(fs.value(vec({x})) == doctest::Approx(x * x - x).epsilon(1e-13));
      CHECK(gs.value(vec({x})) == doctest::Approx((x - 1) * (x - 1) + x).epsilon(1e-13));
    }
    CHECK(std::abs(fs.gradient(vec({0.5}))(0)) <= 1e-14);
    CHECK(std::abs(gs.gradient(vec({0.5}))(0)) <= 1e-14);
    CHECK(std::abs(numeric_gradient(fs, vec({0.5}))(0)) <= 1e-8);
    CHECK(std::abs(numeric_gradient(gs, vec({0.5}))(0)) <= 1e-8);
    CHECK(fs.kind() == PotentialKind::Quadratic);
    f_plus_g_unchanged(f, g, fs, gs);
  }

  SUBCASE("zero f and its minimizer leave both unchanged") {
    const Potential f = Potential::zero(1);
    const Potential g = fixtures::square(3.0);
    const auto [fs, gs] = shift_to_common_minimizer(f, g, vec({3.0}));
    CHECK(fs.kind() == PotentialKind::Zero);
    f_plus_g_unchanged(f, g, fs, gs);
    CHECK(gs.value(vec({0.0})) == doctest::Approx(g.value(vec({0.0}))));
  }

  SUBCASE("custom potentials are tilted through the prox") {
    const Potential f = soft_abs();
    const Potential g = fixtures::square(2.0);
    // Stationary point of f + g solved by the prox of f with the tilt folded in.
    Vector x = vec({1.0});
    for (int it = 0; it < 200; ++it) x = prox(f, vec({x(0) - 0.25 * g.gradient(x)(0)}), 0.25);
    const auto [fs, gs] = shift_to_common_minimizer(f, g, x);
    CHECK(std::abs(fs.gradient(x)(0)) <= 1e-9);
    CHECK(std::abs(gs.gradient(x)(0)) <= 1e-9);
    f_plus_g_unchanged(f, g, fs, gs);
    // The tilted prox must still solve its stationarity condition.
    const Vector p = prox(fs, vec({0.7}), 0.5);
    CHECK(std::abs(fs.gradient(p)(0) + (p(0) - 0.7) / 0.5) <= 1e-9);
  }

  SUBCASE("non-stationary x* is rejected") {
    CHECK_THROWS_AS(
        shift_to_common_minimizer(fixtures::square(0.0), fixtures::square(1.0), vec({0.4})),
        Error);
  }
}
