#pragma once

// One realization of y = A x + w with A_mn ~ N(0, 1/N) and w ~ N(0, I_M).

#include <cstddef>
#include <cstdint>
#include <vector>

#include "slm/kernels.hpp"
#include "slm/scalar_channel.hpp"

namespace slm {

struct LinearModelInstance {
  DenseMatrix A;
  std::vector<double> x;
  std::vector<double> w;
  std::vector<double> y;
  std::uint64_t seed = 0;

  std::size_t N() const noexcept { return A.cols(); }
  std::size_t M() const noexcept { return A.rows(); }
};

/// Draw order on stream (seed, stream): x (N prior draws), then A row-major,
/// then w. Nested instances for a sweep over M come from first_rows of one
/// instance, not from separate calls with different M.
LinearModelInstance generate_instance(const ScalarPrior& prior, std::size_t N, std::size_t M,
                                      std::uint64_t seed, std::uint64_t stream = 0);

/// The first M rows of `inst` as a standalone instance.
LinearModelInstance first_rows(const LinearModelInstance& inst, std::size_t M);

}  // namespace slm
