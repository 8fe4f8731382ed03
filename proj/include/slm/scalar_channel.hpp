#pragma once

// Scalar Gaussian channel Y = sqrt(s) X + W, W ~ N(0,1), for the three
// built-in signal priors. All information quantities are in nats.
//
// Every built-in prior is a finite Gaussian mixture (a point mass is a
// zero-variance component), so posteriors, marginal densities, and the
// MMSE / mutual-information functionals share one code path. Expectations
// over Y are evaluated by adaptive Gauss-Kronrod quadrature on intervals
// aligned with each component's centre and spread at the given snr.

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "slm/rng.hpp"

namespace slm {

/// Raised when a quadrature or closed form produces a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PriorKind { Gaussian, BernoulliGaussian, FiniteAtoms };

struct MixtureComponent {
  double weight;
  double mean;
  double variance;  // 0 for a point mass
};

class ScalarPrior {
 public:
  static ScalarPrior gaussian(double mu, double sigma2);
  /// (1 - gamma) delta_0 + gamma N(mu, sigma2), gamma in (0, 1).
  static ScalarPrior bernoulli_gaussian(double mu, double sigma2, double gamma);
  /// Weights must be non-negative and sum to 1 within 1e-12.
  static ScalarPrior finite_atoms(std::vector<double> atoms, std::vector<double> weights);

  PriorKind kind() const noexcept { return kind_; }
  double mu() const noexcept { return mu_; }
  double sigma2() const noexcept { return sigma2_; }
  double gamma() const noexcept { return gamma_; }
  const std::vector<double>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// Mixture view. BG is ordered {spike, slab}; zero-weight atoms are dropped.
  const std::vector<MixtureComponent>& components() const noexcept { return components_; }

  /// Text form accepted by the CLI, e.g. "bg:0,1e6,0.2".
  std::string to_string() const;

 private:
  ScalarPrior() = default;
  void validate_and_build();

  PriorKind kind_ = PriorKind::Gaussian;
  double mu_ = 0.0;
  double sigma2_ = 1.0;
  double gamma_ = 1.0;
  std::vector<double> atoms_;
  std::vector<double> weights_;
  std::vector<MixtureComponent> components_;
};

/// Inverse of ScalarPrior::to_string: "gaussian:mu,sigma2", "bg:mu,sigma2,gamma"
/// or "atoms:v1:w1,v2:w2,...".
ScalarPrior parse_prior(std::string_view spec);

struct PriorMoments {
  double mean;
  double variance;
  double fourth_moment;  // E[X^4]
};

PriorMoments prior_moments(const ScalarPrior& prior);

/// One draw from the prior. BG consumes one uniform and, for the slab, one normal.
double sample(const ScalarPrior& prior, RandomStream& rng);

/// Parameters of a Bernoulli-Gaussian posterior (or any BG law).
struct BGPosteriorParams {
  double mu_n;
  double sigma2_n;
  double gamma_n;

  double mean() const noexcept { return gamma_n * mu_n; }
  double variance() const noexcept {
    return gamma_n * (1.0 - gamma_n) * mu_n * mu_n + gamma_n * sigma2_n;
  }
};

/// Closed-form posterior of a BG prior after observing y = sqrt(s) x + w.
/// gamma_n is evaluated as a logistic of a log-odds, so it never overflows.
BGPosteriorParams bg_posterior_update(const ScalarPrior& prior, double s, double y);

struct PosteriorMoments {
  double mean;
  double variance;
};

/// The scalar channel at a fixed snr. Precomputes per-component constants so
/// repeated posterior evaluations (quadrature nodes, AMP denoising) are cheap.
class ScalarChannel {
 public:
  ScalarChannel(const ScalarPrior& prior, double snr);

  double snr() const noexcept { return snr_; }

  PosteriorMoments posterior(double y) const;
  double log_marginal_density(double y) const;

  /// Component responsibilities given y (same order as prior.components()).
  void responsibilities(double y, std::span<double> out) const;

  /// Breakpoints for integrating functions of y against the marginal density.
  std::vector<double> integration_breakpoints() const;

 private:
  struct Term {
    double log_weight_norm;  // log w_c - 0.5 log(2 pi var_y)
    double center;           // sqrt(s) m_c
    double half_inv_var;     // 1 / (2 var_y)
    double var_y;            // 1 + s v_c
    double mean_prior;
    double gain;             // sqrt(s) v_c / (1 + s v_c)
    double post_var;         // v_c / (1 + s v_c)
  };

  double log_term(const Term& t, double y) const noexcept {
    const double d = y - t.center;
    return t.log_weight_norm - d * d * t.half_inv_var;
  }

  double snr_;
  std::vector<Term> terms_;
};

/// M_X(s) = E[(X - E[X | sqrt(s) X + W])^2].
double scalar_mmse(const ScalarPrior& prior, double s);

/// I_X(s) = I(X; sqrt(s) X + W) in nats.
double scalar_mi(const ScalarPrior& prior, double s);

struct ScalarFunctionals {
  double mi;
  double mmse;
};

ScalarFunctionals scalar_functionals(const ScalarPrior& prior, double s);

/// k_X(s) = 1 / M_X(s) - s. Requires s > 0 and a non-degenerate prior.
double k_transform(const ScalarPrior& prior, double s);

/// Worst |dI/ds - M/2| over the grid. dI/ds is a finite difference with step
/// `step` around each grid point (second-order one-sided near s = 0).
double check_immse(const ScalarPrior& prior, std::span<const double> s_grid, double step = 1e-4);

struct ScalarCurve {
  std::vector<double> s;
  std::vector<double> I;
  std::vector<double> M;
};

ScalarCurve scalar_curve(const ScalarPrior& prior, std::span<const double> s_grid);

/// n points log-spaced on [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t n);
/// n points evenly spaced on [lo, hi].
std::vector<double> linear_grid(double lo, double hi, std::size_t n);

}  // namespace slm
