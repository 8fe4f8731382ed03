#include "slm/amp.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace slm {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double avg_sq_diff(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

}  // namespace

std::vector<double> AMPOutput::tau_trace() const {
  std::vector<double> out;
  out.reserve(trace.size());
  for (const auto& t : trace) out.push_back(t.tau2);
  return out;
}

AMPOutput amp_run(const DenseMatrix& A, std::span<const double> y, const ScalarPrior& prior,
                  const AMPOptions& options, std::span<const double> x_true) {
  const std::size_t M = A.rows();
  const std::size_t N = A.cols();
  if (M == 0 || N == 0) throw std::invalid_argument("amp_run: empty matrix");
  if (y.size() != M) throw std::invalid_argument("amp_run: y has the wrong length");
  if (!x_true.empty() && x_true.size() != N)
    throw std::invalid_argument("amp_run: x_true has the wrong length");
  if (!(options.damping >= 0.0 && options.damping < 1.0))
    throw std::invalid_argument("amp_run: damping must lie in [0, 1)");
  if (options.max_iter == 0) throw std::invalid_argument("amp_run: max_iter must be >= 1");

  const PriorMoments mom = prior_moments(prior);
  const double c = static_cast<double>(N) / static_cast<double>(M);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  AMPOutput out;
  std::vector<double> x_hat(N, mom.mean);
  std::vector<double> v(N, mom.variance);
  std::vector<double> z(M), Ax(M), r(N), x_new(N), v_new(N);
  A.multiply(x_hat, Ax);
  for (std::size_t m = 0; m < M; ++m) z[m] = y[m] - Ax[m];
  double tau2 = c * (1.0 + mom.variance);
  const double tau2_start = tau2;

  for (std::size_t t = 0; t < options.max_iter; ++t) {
    A.multiply_transposed(z, r);
    for (std::size_t n = 0; n < N; ++n) r[n] = x_hat[n] + c * r[n];

    const double tau = std::sqrt(tau2);
    const ScalarChannel channel(prior, 1.0 / tau2);
    for (std::size_t n = 0; n < N; ++n) {
      const PosteriorMoments pm = channel.posterior(r[n] / tau);
      x_new[n] = pm.mean;
      v_new[n] = pm.variance;
    }
    if (options.damping > 0.0) {
      const double d = options.damping;
      for (std::size_t n = 0; n < N; ++n) {
        x_new[n] = (1.0 - d) * x_new[n] + d * x_hat[n];
        v_new[n] = (1.0 - d) * v_new[n] + d * v[n];
      }
    }
    const double mean_v = mean_of(v_new);
    out.trace.push_back({t, tau2, x_true.empty() ? nan : avg_sq_diff(x_new, x_true), mean_v});

    double change = 0.0, norm = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      change += (x_new[n] - x_hat[n]) * (x_new[n] - x_hat[n]);
      norm += x_new[n] * x_new[n];
    }
    const double onsager = c * mean_v / tau2;
    A.multiply(x_new, Ax);
    for (std::size_t m = 0; m < M; ++m) z[m] = y[m] - Ax[m] + onsager * z[m];
    x_hat.swap(x_new);
    v.swap(v_new);
    out.r = r;
    out.tau2 = tau2;
    out.iterations = t + 1;

    const double next_tau2 = c * (1.0 + mean_v);
    if (!std::isfinite(next_tau2) || next_tau2 > options.divergence_factor * tau2_start) {
      out.diverged = true;
      break;
    }
    tau2 = next_tau2;
    if (std::sqrt(change) <= options.tol * std::max(std::sqrt(norm), 1e-300)) {
      out.converged = true;
      break;
    }
  }

  out.x_hat = std::move(x_hat);
  out.post_var = std::move(v);
  if (prior.kind() == PriorKind::BernoulliGaussian) {
    const double s = 1.0 / out.tau2;
    const double tau = std::sqrt(out.tau2);
    out.marginals.reserve(N);
    for (std::size_t n = 0; n < N; ++n)
      out.marginals.push_back(bg_posterior_update(prior, s, out.r[n] / tau));
  }
  return out;
}

AMPDiagnostics amp_diagnostics(const AMPOutput& out, std::span<const double> x_true) {
  if (x_true.size() != out.x_hat.size())
    throw std::invalid_argument("amp_diagnostics: dimension mismatch");
  double var = 0.0;
  if (!out.marginals.empty()) {
    for (const auto& mg : out.marginals) var += mg.variance();
    var /= static_cast<double>(out.marginals.size());
  } else {
    var = mean_of(out.post_var);
  }
  return {avg_sq_diff(out.x_hat, x_true), var};
}

Prediction predict_new_observation(const AMPOutput& out, std::span<const double> a_new) {
  if (a_new.size() != out.x_hat.size())
    throw std::invalid_argument("predict_new_observation: dimension mismatch");
  double y_hat = 0.0, var = 1.0;
  for (std::size_t n = 0; n < a_new.size(); ++n) {
    const double vn = out.marginals.empty() ? out.post_var[n] : out.marginals[n].variance();
    y_hat += a_new[n] * out.x_hat[n];
    var += a_new[n] * a_new[n] * vn;
  }
  return {y_hat, var};
}

}  // namespace slm
