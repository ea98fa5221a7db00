#pragma once

// Dense vector kernels used on the sampler's hot paths.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The variant is picked once at first use from the CPU's feature
// bits; GIBBSNET_ISA=scalar in the environment (or force_isa) pins the scalar
// path. Elementwise kernels produce bit-identical results on every ISA;
// reductions (dot, squared_distance) differ only by summation order.

#include <cstddef>
#include <span>
#include <string_view>

namespace gibbsnet::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = base + step * dir
  void (*affine)(const double* base, double step, const double* dir, double* out, std::size_t n);
  // x *= alpha
  void (*scale)(double alpha, double* x, std::size_t n);
};

bool isa_supported(Isa isa) noexcept;

// Table for a specific ISA. Throws std::invalid_argument if the CPU lacks it.
const KernelTable& table(Isa isa);

// Table used by the free functions below.
const KernelTable& active() noexcept;
Isa active_isa() noexcept;

// Pins the dispatcher. Throws std::invalid_argument if unsupported.
void force_isa(Isa isa);

std::string_view isa_name(Isa isa) noexcept;

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void affine(std::span<const double> base, double step, std::span<const double> dir,
            std::span<double> out);
void scale(double alpha, std::span<double> x);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void affine(const double* base, double step, const double* dir, double* out, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define GIBBSNET_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void affine(const double* base, double step, const double* dir, double* out, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
}  // namespace avx2
#endif

}  // namespace gibbsnet::kernels
