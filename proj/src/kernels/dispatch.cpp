#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_impl.hpp"

namespace slm::kernels {

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{Isa::Scalar, scalar::dot, scalar::axpy, scalar::gemv,
                                 scalar::gemv_t};
  return table;
}

const KernelTable* avx2_table() noexcept {
#if defined(SLMTK_HAVE_AVX2_KERNELS)
  static const KernelTable table{Isa::Avx2, avx2::dot, avx2::axpy, avx2::gemv, avx2::gemv_t};
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_table() noexcept {
#if defined(SLMTK_HAVE_NEON_KERNELS)
  static const KernelTable table{Isa::Neon, neon::dot, neon::axpy, neon::gemv, neon::gemv_t};
  return &table;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable& resolve() noexcept {
  const char* forced = std::getenv("SLMTK_ISA");
  const std::string request = forced ? forced : "";
  if (request == "scalar") return scalar_table();
  if (request == "avx2") return avx2_table() ? *avx2_table() : scalar_table();
  if (request == "neon") return neon_table() ? *neon_table() : scalar_table();
  if (const KernelTable* t = avx2_table()) return *t;
  if (const KernelTable* t = neon_table()) return *t;
  return scalar_table();
}

}  // namespace

const KernelTable& active() noexcept {
  static const KernelTable& table = resolve();
  return table;
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: length mismatch");
  return active().dot(x.data(), y.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
  active().axpy(a, x.data(), y.data(), x.size());
}

}  // namespace slm::kernels

namespace slm {

DenseMatrix DenseMatrix::top_rows(std::size_t rows) const {
  if (rows > rows_) throw std::invalid_argument("top_rows: not enough rows");
  DenseMatrix out(rows, cols_);
  std::copy_n(data_.begin(), rows * cols_, out.data_.begin());
  return out;
}

void DenseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != cols_ || y.size() != rows_)
    throw std::invalid_argument("DenseMatrix::multiply: shape mismatch");
  kernels::active().gemv(data_.data(), rows_, cols_, x.data(), y.data());
}

void DenseMatrix::multiply_transposed(std::span<const double> x, std::span<double> y) const {
  if (x.size() != rows_ || y.size() != cols_)
    throw std::invalid_argument("DenseMatrix::multiply_transposed: shape mismatch");
  kernels::active().gemv_t(data_.data(), rows_, cols_, x.data(), y.data());
}

}  // namespace slm
