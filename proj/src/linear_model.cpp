#include "slm/linear_model.hpp"

#include <cmath>
#include <stdexcept>

namespace slm {

LinearModelInstance generate_instance(const ScalarPrior& prior, std::size_t N, std::size_t M,
                                      std::uint64_t seed, std::uint64_t stream) {
  if (N == 0) throw std::invalid_argument("generate_instance: N must be >= 1");
  RandomStream rng(seed, stream);
  LinearModelInstance inst;
  inst.seed = seed;
  inst.x.resize(N);
  for (double& v : inst.x) v = sample(prior, rng);
  inst.A = DenseMatrix(M, N);
  rng.fill_normal(inst.A.data(), 1.0 / std::sqrt(static_cast<double>(N)));
  inst.w.resize(M);
  rng.fill_normal(inst.w);
  inst.y.resize(M);
  if (M > 0) inst.A.multiply(inst.x, inst.y);
  for (std::size_t m = 0; m < M; ++m) inst.y[m] += inst.w[m];
  return inst;
}

LinearModelInstance first_rows(const LinearModelInstance& inst, std::size_t M) {
  if (M > inst.M()) throw std::invalid_argument("first_rows: not enough rows");
  LinearModelInstance out;
  out.seed = inst.seed;
  out.A = inst.A.top_rows(M);
  out.x = inst.x;
  out.w.assign(inst.w.begin(), inst.w.begin() + static_cast<std::ptrdiff_t>(M));
  out.y.assign(inst.y.begin(), inst.y.begin() + static_cast<std::ptrdiff_t>(M));
  return out;
}

}  // namespace slm
