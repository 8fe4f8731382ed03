#pragma once

// Exact posteriors by enumeration, for small instances of y = A x + w with an
// iid mixture prior on x.
//
// Each coordinate picks one prior mixture component (spike or slab for a
// Bernoulli-Gaussian prior, one atom for a finite prior). Given an assignment
// u the model is linear-Gaussian: y ~ N(A m_u, I_M + A_J D_J A_J^T), where J
// holds the coordinates with a non-degenerate component. Evidence and
// conditional moments are computed in the |J|-dimensional form
//   K = I + D^1/2 A_J^T A_J D^1/2
//   log det(I_M + A_J D A_J^T) = log det K
//   r^T (I_M + A_J D A_J^T)^-1 r = r^T r - |L^-1 D^1/2 A_J^T r|^2,  K = L L^T
//   Cov(x_J | u, y) = D^1/2 K^-1 D^1/2,  E[x_J | u, y] = m_J + Cov A_J^T r
// with r = y - A m_u. Everything is expressed through A^T A and A^T y, so the
// cost per assignment does not depend on M.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "slm/kernels.hpp"
#include "slm/scalar_channel.hpp"
#include "slm/stats.hpp"

namespace slm {

/// Largest number of enumerated component assignments.
inline constexpr std::size_t kMaxAssignments = std::size_t{1} << 20;

struct ConditionalGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

class SupportPosterior {
 public:
  SupportPosterior(const DenseMatrix& A, std::span<const double> y, const ScalarPrior& prior);

  std::size_t dimension() const noexcept { return n_; }
  std::size_t num_components() const noexcept { return comps_.size(); }
  std::size_t size() const noexcept { return log_w_.size(); }

  /// Component index of every coordinate for assignment i (coordinate n is
  /// digit n of i in base num_components()).
  std::vector<int> assignment(std::size_t i) const;

  /// Normalized log posterior weights.
  std::span<const double> log_weights() const noexcept { return log_w_; }
  double log_evidence() const noexcept { return log_evidence_; }
  /// Sum of the normalized weights (1 up to rounding).
  double weight_sum() const;

  ConditionalGaussian conditional(std::size_t i) const;

  /// Calls f(index, weight, conditional) for every assignment with a positive
  /// normalized weight of at least `min_weight`.
  template <class F>
  void for_each(F&& f, double min_weight = 0.0) const;

  const ScalarPrior& prior() const noexcept { return prior_; }

 private:
  double evaluate(std::size_t i, ConditionalGaussian* moments) const;

  ScalarPrior prior_;
  std::vector<MixtureComponent> comps_;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  Eigen::MatrixXd gram_;  // A^T A
  Eigen::VectorXd aty_;   // A^T y
  double yy_ = 0.0;
  std::vector<double> log_w_;
  double log_evidence_ = 0.0;
};

struct ExactMarginals {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;       // full posterior covariance
  Eigen::MatrixXd component_prob;   // N x K, P(coordinate n uses component k | y)
  std::vector<double> gamma;        // P(X_n != 0 | y) for a Bernoulli-Gaussian prior

  Eigen::VectorXd variance() const { return covariance.diagonal(); }
};

ExactMarginals exact_marginals(const SupportPosterior& posterior);

/// Monte Carlo estimate of (1/N) E|x - E[x | y, A]|^2 over fresh instances.
/// Each trial contributes the exact posterior trace (1/N) tr Cov(x | y, A),
/// whose expectation is the MMSE; M = 0 therefore returns Var(X) exactly.
Estimate exact_mmse_mc(const ScalarPrior& prior, std::size_t N, std::size_t M,
                       std::size_t trials, std::uint64_t seed);

struct RocPoint {
  double lambda;
  double fpr;  // NaN when there are no negatives
  double tpr;  // NaN when there are no positives
};

/// Declares coordinate n non-zero when gamma_n >= lambda.
std::vector<RocPoint> detection_roc(std::span<const double> gammas,
                                    const std::vector<bool>& truth_support,
                                    std::span<const double> thresholds);

/// 512 evenly spaced thresholds on [0, 1].
std::vector<double> default_roc_thresholds();

/// Area under an ROC curve by the trapezoid rule over points sorted by FPR.
double roc_auc(std::span<const RocPoint> curve);

struct Codebook {
  std::vector<std::vector<double>> codewords;  // uniform prior over codewords

  std::size_t size() const noexcept { return codewords.size(); }
  std::size_t dimension() const noexcept { return codewords.empty() ? 0 : codewords[0].size(); }
  /// (1/N) times the average squared codeword norm.
  double power() const;
};

/// L iid Gaussian codewords in R^N, rescaled so that power() == 1.
Codebook random_power_constrained_codebook(std::size_t L, std::size_t N, std::uint64_t seed);

struct CodebookEstimate {
  Estimate mmse;  // per dimension
  Estimate mi;    // nats per dimension
};

/// MMSE and mutual information of Y = sqrt(snr) X + W with X uniform on the
/// codebook, by Monte Carlo over (codeword, noise) with exact posteriors.
CodebookEstimate codebook_mmse_mi(const Codebook& codebook, double snr, std::size_t trials,
                                  std::uint64_t seed);

/// (lower, upper) MMSE bounds at s < snr for a unit-power code whose mutual
/// information at snr is within epsilon of 0.5 log(1 + snr).
std::pair<double, double> good_code_bounds(double snr, double epsilon, double s);

// ---------------------------------------------------------------------------

template <class F>
void SupportPosterior::for_each(F&& f, double min_weight) const {
  ConditionalGaussian cg;
  for (std::size_t i = 0; i < log_w_.size(); ++i) {
    const double w = std::exp(log_w_[i]);
    if (w == 0.0 || w < min_weight) continue;
    evaluate(i, &cg);
    f(i, w, cg);
  }
}

}  // namespace slm
