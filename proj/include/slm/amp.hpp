#pragma once

// Approximate message passing with the Bayes-optimal separable denoiser.
//
// With A_mn ~ N(0, 1/N) and c = N/M, one iteration is
//   r     = x_hat + c A^T z
//   x_hat = E[X | r],   v = Var(X | r)      (scalar channel at snr 1/tau2)
//   z     = y - A x_hat + c z <eta'>,       <eta'> = mean(v) / tau2
//   tau2  = c (1 + mean(v))
// starting from x_hat = E[X], z = y - A x_hat, tau2 = c (1 + Var(X)).
// State evolution predicts tau2_t = c (1 + M_t).

#include <cstddef>
#include <span>
#include <vector>

#include "slm/kernels.hpp"
#include "slm/linear_model.hpp"
#include "slm/scalar_channel.hpp"

namespace slm {

struct AMPOptions {
  std::size_t max_iter = 200;
  double tol = 1e-8;             // relative change of x_hat
  double damping = 0.0;          // in [0, 1); weight on the previous x_hat
  double divergence_factor = 1e3;
};

struct AMPIterate {
  std::size_t iter;
  double tau2;           // effective noise variance used at this iteration
  double avg_sq_error;   // NaN when x_true is unknown
  double avg_post_var;
};

struct AMPOutput {
  std::vector<double> x_hat;
  std::vector<double> post_var;
  std::vector<BGPosteriorParams> marginals;  // Bernoulli-Gaussian priors only
  std::vector<double> r;                     // final pseudo-data
  double tau2 = 0.0;                         // noise variance behind the final estimate
  std::vector<AMPIterate> trace;
  std::size_t iterations = 0;
  bool converged = false;
  bool diverged = false;

  std::vector<double> tau_trace() const;
};

AMPOutput amp_run(const DenseMatrix& A, std::span<const double> y, const ScalarPrior& prior,
                  const AMPOptions& options = {}, std::span<const double> x_true = {});

inline AMPOutput amp_run(const LinearModelInstance& inst, const ScalarPrior& prior,
                         const AMPOptions& options = {}) {
  return amp_run(inst.A, inst.y, prior, options, inst.x);
}

struct AMPDiagnostics {
  double avg_sq_error;
  double avg_post_var;
};

AMPDiagnostics amp_diagnostics(const AMPOutput& out, std::span<const double> x_true);

struct Prediction {
  double y_hat;
  double variance;
};

/// Predictive mean and variance of <a_new, X> + W under the AMP marginals.
Prediction predict_new_observation(const AMPOutput& out, std::span<const double> a_new);

}  // namespace slm
