#pragma once

// Subset response of the standard linear model. For an index set S of size K
// write A_S = [Q1 Q2] [R; 0] with R upper triangular (non-negative diagonal)
// and Q2 a uniformly random orthonormal basis of the complement of range(Q1).
// Rotating by Q^T gives
//   Y~1 = R X_S + B1 X_Sc + W~1,   Y~2 = B2 X_Sc + W~2
// and subtracting the estimated interference leaves
//   Z = Y~1 - B1 E[X_Sc | Y~2, B2] = R X_S + V.

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "slm/kernels.hpp"
#include "slm/linear_model.hpp"
#include "slm/scalar_channel.hpp"

namespace slm {

struct SubsetDecomposition {
  std::vector<std::size_t> S;   // signal block
  std::vector<std::size_t> Sc;  // interference block, increasing order
  Eigen::MatrixXd Q1;           // M x K
  Eigen::MatrixXd Q2;           // M x (M - K)
  Eigen::MatrixXd R;            // K x K
  Eigen::VectorXd y1;           // Q1^T y
  Eigen::VectorXd y2;           // Q2^T y
  Eigen::MatrixXd B1;           // Q1^T A_Sc
  Eigen::MatrixXd B2;           // Q2^T A_Sc

  std::size_t K() const noexcept { return S.size(); }
  Eigen::MatrixXd Q() const;
  /// max |Q^T Q - I|
  double orthogonality_residual() const;
  /// max |A_S - Q1 R|
  double factorization_residual(const DenseMatrix& A) const;
};

/// Throws std::invalid_argument for an empty, repeated or out-of-range S,
/// K > min(M, N), or a numerically rank-deficient A_S.
SubsetDecomposition qr_split(const DenseMatrix& A, std::span<const double> y,
                             std::span<const std::size_t> S, std::uint64_t seed);

/// Largest complement handled by exact interference estimation.
inline constexpr std::size_t kMaxInterferenceDim = 20;

struct SubsetResponse {
  Eigen::VectorXd z;
  Eigen::VectorXd v;             // Z - R x_S
  Eigen::VectorXd x_sc_mean;     // E[X_Sc | Y~2, B2]
  Eigen::VectorXd w_tilde;       // Q^T w
  double identity_residual = 0;  // max |Z - R x_S - (B1 (x_Sc - x_Sc_mean) + W~1)|
};

/// Interference subtraction with the exact posterior mean of X_Sc under the
/// iid prior. `inst` supplies the true x and w for V and the identity check.
SubsetResponse interference_subtract(const SubsetDecomposition& decomp, const ScalarPrior& prior,
                                     const LinearModelInstance& inst);

struct GaussianityDiagnostic {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double ks_distance = 0.0;  // sup |F_n - Phi((x - mean) / sd)|
  /// Skewness and excess kurtosis both within 4 null standard deviations
  /// (sqrt(6/n) and sqrt(24/n)).
  bool consistent_with_normal = true;
};

/// Needs at least 200 samples.
GaussianityDiagnostic gaussianity_diagnostic(std::span<const double> samples);

struct IndependenceCheck {
  std::size_t samples = 0;
  double max_abs_corr = 0.0;
  double threshold = 0.0;  // 3 / sqrt(samples)
  bool pass = true;
};

/// Largest absolute empirical correlation between any coordinate of `a` and
/// any coordinate of `b` (rows are paired samples). Needs at least 500 rows;
/// an empty `a` dimension passes vacuously.
IndependenceCheck independence_check(const std::vector<std::vector<double>>& a,
                                     const std::vector<std::vector<double>>& b);

struct SubsetTrial {
  std::vector<double> z, v, x_s, y1, y2, w_tilde;
  double identity_residual;
  double orthogonality_residual;
  double factorization_residual;
};

struct SubsetExperiment {
  std::size_t N = 0, M = 0, K = 0;
  std::vector<SubsetTrial> trials;
  double max_identity_residual = 0.0;
  double max_orthogonality_residual = 0.0;
  double max_factorization_residual = 0.0;
  std::vector<double> w_tilde_variance;       // per coordinate of Q^T w over trials
  std::vector<GaussianityDiagnostic> v_diag;  // per coordinate of V (when trials >= 200)
  IndependenceCheck independence;             // Y~2 vs X_S (when trials >= 500)
  IndependenceCheck positive_control;         // Y~1 vs X_S (when trials >= 500)
};

/// S = {0, ..., K-1}. Trial t uses instance stream t and Q2 seed derived from
/// (seed, t).
SubsetExperiment subset_experiment(const ScalarPrior& prior, std::size_t N, std::size_t M,
                                   std::size_t K, std::size_t trials, std::uint64_t seed);

}  // namespace slm
