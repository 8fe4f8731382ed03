#pragma once

// Monte Carlo estimates of the information and MMSE sequences of the standard
// linear model with iid N(0, 1/N) measurement vectors:
//   I_m = I(X; Y^m | A^m),   M_m = (1/N) E|X - E[X | Y^m, A^m]|^2
// and the posterior covariance statistics built on the same enumeration.
//
// Every trial draws one instance (x, A, w) from stream `trial` of `seed` and
// evaluates all prefixes m = 0..M of it. The per-trial information sample is
// log p(y^m | x, A^m) - log p(y^m | A^m), with the marginal density summed
// exactly over the prior's mixture components. MMSE and covariance samples
// are exact posterior quantities (Rao-Blackwellized), so M_0 = Var(X) and
// I_0 = 0 hold without Monte Carlo error.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "slm/scalar_channel.hpp"
#include "slm/stats.hpp"

namespace slm {

struct InfoSequenceEstimate {
  std::size_t N = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<double> I;          // I_0..I_M
  std::vector<double> I_prime;    // I'_m = I_{m+1} - I_m, m = 0..M-1
  std::vector<double> I_dprime;   // I''_m = I'_{m+1} - I'_m, m = 0..M-2
  std::vector<double> std_err;    // of I_m
  std::vector<double> I_prime_se;
  std::vector<double> I_dprime_se;
  std::vector<std::vector<double>> per_trial;  // trials x (M + 1) samples of I_m
};

struct MMSESequenceEstimate {
  std::size_t N = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<double> M;  // M_0..M_M
  std::vector<double> std_err;
  std::vector<std::vector<double>> per_trial;  // trials x (M + 1)
};

/// Posterior covariance statistics at a fixed number of observations m.
/// With Lambda the eigenvalues of Cov(X | Y^m, A^m) and Lambda_bar their mean,
///   E|Cov|_F^2 = N (E Lambda_bar)^2 + N Var(Lambda_bar) + sum_n E(Lambda_n - Lambda_bar)^2.
struct CovarianceStats {
  std::size_t m = 0;
  std::size_t N = 0;
  Estimate msc;           // (1/N^2) E|Cov|_F^2
  Estimate mmse;          // (1/N) E tr Cov
  double frobenius = 0.0;       // E|Cov|_F^2, averaged directly over trials
  double mean_term = 0.0;       // N (E Lambda_bar)^2
  double trace_var_term = 0.0;  // N Var(Lambda_bar)
  double spread_term = 0.0;     // sum_n E(Lambda_n - Lambda_bar)^2
  double lower_bound = 0.0;     // (1/N) (E tr Cov)^2
  double upper_bound = 0.0;     // N^2 E[X^4]

  double decomposition_sum() const { return mean_term + trace_var_term + spread_term; }
};

struct SequenceEstimates {
  InfoSequenceEstimate info;
  MMSESequenceEstimate mmse;
  std::vector<CovarianceStats> covariance;  // one entry per m = 0..M
};

/// Enumeration needs num_components^N <= 2^20.
SequenceEstimates estimate_sequences(const ScalarPrior& prior, std::size_t N, std::size_t M,
                                     std::size_t trials, std::uint64_t seed);

InfoSequenceEstimate estimate_info_sequence(const ScalarPrior& prior, std::size_t N, std::size_t M,
                                            std::size_t trials, std::uint64_t seed);

MMSESequenceEstimate estimate_mmse_sequence(const ScalarPrior& prior, std::size_t N, std::size_t M,
                                            std::size_t trials, std::uint64_t seed);

/// With `fixed_matrix` the measurement matrix is drawn once (stream 0) and
/// only (x, w) vary across trials, so the statistics are conditional on A.
CovarianceStats mean_squared_covariance(const ScalarPrior& prior, std::size_t N, std::size_t m,
                                        std::size_t trials, std::uint64_t seed,
                                        bool fixed_matrix = false);

/// Five-atom stand-in for a Bernoulli-Gaussian prior: the spike plus the
/// four-point Gauss-Hermite rule for the slab. Moments up to order seven
/// match the original.
ScalarPrior discretize_bernoulli_gaussian(const ScalarPrior& bg);

// ---------------------------------------------------------------------------
// Inequality checks. A check passes when no entry exceeds its bound by more
// than three (combined) standard errors.

struct SequenceCheck {
  double worst = 0.0;         // max over entries of excess - 3 se
  std::size_t where = 0;      // index attaining `worst`
  std::size_t violations = 0; // entries with excess - 3 se > 0
  bool pass = true;
};

/// I'_{m+1} <= I'_m for all m.
SequenceCheck check_theorem_monotone(const InfoSequenceEstimate& info);

/// I'_m <= 0.5 log(1 + M_m) for all m. Estimates sharing seed, trials and N
/// are treated as paired samples.
SequenceCheck check_theorem_ip_ub(const InfoSequenceEstimate& info,
                                  const MMSESequenceEstimate& mmse);

struct BoundCheck {
  double value = 0.0;  // M_k
  double bound = 0.0;  // exp((2 I_m - k log(1 + M_0)) / (m - k)) - 1
  double std_err = 0.0;
  bool pass = true;
};

/// M_k >= exp((2 I_m - k log(1 + M_0)) / (m - k)) - 1 for 0 <= k < m.
BoundCheck check_theorem_mmse_lb(const InfoSequenceEstimate& info,
                                 const MMSESequenceEstimate& mmse, std::size_t k, std::size_t m);

struct CardinalityCheck {
  std::size_t count = 0;              // #{m : |I''_m| >= T}
  std::size_t significant_count = 0;  // #{m : |I''_m| - 3 se >= T}
  double bound = 0.0;                 // I_1 / T
  double bound_upper = 0.0;           // (I_1 + 3 se) / T
  bool pass = true;
};

/// #{m : |I''_m| >= T} <= I_1 / T.
CardinalityCheck check_card_bound(const InfoSequenceEstimate& info, double T);

// ---------------------------------------------------------------------------

struct ConditionalMMSE {
  std::vector<double> s;
  std::vector<double> M;     // (1/N) E|X - E[X | Y, Z(s)]|^2
  std::vector<double> M_se;
  double fd_step = 0.0;
  Estimate slope_fd;         // (M(0) - M(h)) / h
  Estimate msc_scaled;       // (1/N) E|Cov(X | Y)|_F^2
  Estimate gap;              // slope_fd - msc_scaled, paired over trials
};

/// Conditional MMSE function of m observations augmented by an independent
/// Gaussian channel Z(s) = sqrt(s) X + W'. The channels for different s are
/// coupled through one Brownian path and averaged with its mirror image.
ConditionalMMSE conditional_mmse_function(const ScalarPrior& prior, std::size_t N, std::size_t m,
                                          std::span<const double> s_grid, std::size_t trials,
                                          std::uint64_t seed, double fd_step = 1e-3);

}  // namespace slm
