#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>
#include <vector>

#include "gibbsnet/kernels.hpp"

namespace k = gibbsnet::kernels;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 3.0);
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 100, 1001};

}  // namespace

TEST_CASE("scalar kernels compute the textbook definitions") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{4.0, -5.0, 6.0};
  CHECK(k::scalar::dot(a.data(), b.data(), 3) == 12.0);
  CHECK(k::scalar::squared_distance(a.data(), b.data(), 3) == 9.0 + 49.0 + 9.0);

  std::vector<double> y{1.0, 1.0, 1.0};
  k::scalar::axpy(2.0, a.data(), y.data(), 3);
  CHECK(y == std::vector<double>{3.0, 5.0, 7.0});

  std::vector<double> out(3);
  k::scalar::affine(a.data(), -1.0, b.data(), out.data(), 3);
  CHECK(out == std::vector<double>{-3.0, 7.0, -3.0});

  k::scalar::scale(0.5, out.data(), 3);
  CHECK(out == std::vector<double>{-1.5, 3.5, -1.5});
}

TEST_CASE("scalar isa is always supported and selectable") {
  CHECK(k::isa_supported(k::Isa::Scalar));
  CHECK(k::table(k::Isa::Scalar).isa == k::Isa::Scalar);
  CHECK(k::isa_name(k::Isa::Scalar) == "scalar");
}

#ifdef GIBBSNET_HAVE_AVX2_KERNELS
TEST_CASE("avx2 kernels match the scalar reference") {
  if (!k::isa_supported(k::Isa::Avx2)) {
    MESSAGE("CPU lacks AVX2; equivalence test skipped");
    return;
  }
  std::mt19937_64 rng(11);
  const auto& s = k::table(k::Isa::Scalar);
  const auto& v = k::table(k::Isa::Avx2);
  for (const std::size_t n : kLengths) {
    CAPTURE(n);
    const auto a = random_vector(rng, n);
    const auto b = random_vector(rng, n);
    const double alpha = 0.37;

    // Reductions differ only in summation order.
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) abs_sum += std::abs(a[i] * b[i]);
    CHECK(std::abs(v.dot(a.data(), b.data(), n) - s.dot(a.data(), b.data(), n)) <=
          4.0 * n * 1e-16 * abs_sum + 1e-300);
    const double sd = s.squared_distance(a.data(), b.data(), n);
    CHECK(std::abs(v.squared_distance(a.data(), b.data(), n) - sd) <= 4.0 * n * 1e-16 * sd + 1e-300);

    // Elementwise kernels are bit-identical.
    auto ys = b;
    auto yv = b;
    s.axpy(alpha, a.data(), ys.data(), n);
    v.axpy(alpha, a.data(), yv.data(), n);
    CHECK(same_bits(ys, yv));

    std::vector<double> os(n), ov(n);
    s.affine(a.data(), alpha, b.data(), os.data(), n);
    v.affine(a.data(), alpha, b.data(), ov.data(), n);
    CHECK(same_bits(os, ov));

    auto xs = a;
    auto xv = a;
    s.scale(alpha, xs.data(), n);
    v.scale(alpha, xv.data(), n);
    CHECK(same_bits(xs, xv));
  }
}

TEST_CASE("force_isa pins the dispatcher") {
  const k::Isa before = k::active_isa();
  k::force_isa(k::Isa::Scalar);
  CHECK(k::active_isa() == k::Isa::Scalar);
  CHECK(k::active().isa == k::Isa::Scalar);
  if (k::isa_supported(k::Isa::Avx2)) {
    k::force_isa(k::Isa::Avx2);
    CHECK(k::active_isa() == k::Isa::Avx2);
  } else {
    CHECK_THROWS_AS(k::force_isa(k::Isa::Avx2), std::invalid_argument);
  }
  k::force_isa(before);
}
#endif

TEST_CASE("span wrappers route through the active table") {
  std::mt19937_64 rng(5);
  const auto a = random_vector(rng, 13);
  const auto b = random_vector(rng, 13);
  const auto& t = k::active();
  CHECK(k::dot(a, b) == t.dot(a.data(), b.data(), 13));
  CHECK(k::squared_distance(a, b) == t.squared_distance(a.data(), b.data(), 13));
  auto y = b;
  k::axpy(-2.0, a, y);
  auto y_ref = b;
  t.axpy(-2.0, a.data(), y_ref.data(), 13);
  CHECK(same_bits(y, y_ref));
}
