#include "gibbsnet/kernels.hpp"

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace gibbsnet::kernels {

namespace {

constexpr KernelTable kScalarTable{Isa::Scalar,  &scalar::dot,    &scalar::squared_distance,
                                   &scalar::axpy, &scalar::affine, &scalar::scale};

#ifdef GIBBSNET_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2Table{Isa::Avx2,    &avx2::dot,    &avx2::squared_distance,
                                 &avx2::axpy,  &avx2::affine, &avx2::scale};
#endif

const KernelTable* detect() noexcept {
  if (const char* env = std::getenv("GIBBSNET_ISA")) {
    if (std::string(env) == "scalar") return &kScalarTable;
  }
#ifdef GIBBSNET_HAVE_AVX2_KERNELS
  if (isa_supported(Isa::Avx2)) return &kAvx2Table;
#endif
  return &kScalarTable;
}

std::atomic<const KernelTable*>& slot() noexcept {
  static std::atomic<const KernelTable*> current{detect()};
  return current;
}

}  // namespace

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#ifdef GIBBSNET_HAVE_AVX2_KERNELS
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("kernels: ISA " + std::string(isa_name(isa)) +
                                " is not supported on this CPU");
  }
#ifdef GIBBSNET_HAVE_AVX2_KERNELS
  if (isa == Isa::Avx2) return kAvx2Table;
#endif
  return kScalarTable;
}

const KernelTable& active() noexcept { return *slot().load(std::memory_order_acquire); }

Isa active_isa() noexcept { return active().isa; }

void force_isa(Isa isa) { slot().store(&table(isa), std::memory_order_release); }

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().squared_distance(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void affine(std::span<const double> base, double step, std::span<const double> dir,
            std::span<double> out) {
  assert(base.size() == dir.size() && base.size() == out.size());
  active().affine(base.data(), step, dir.data(), out.data(), base.size());
}

void scale(double alpha, std::span<double> x) { active().scale(alpha, x.data(), x.size()); }

}  // namespace gibbsnet::kernels
