#pragma once

// Replica-symmetric potential, its stationary points, state evolution, the
// information fixed-point curve, and phase-transition location.
//
// Stationary points of F(s) = I_X(s) + (delta/2)(log(delta/s) + s/delta - 1)
// are the solutions of h(s) = delta with h(s) = s (1 + M_X(s)); h does not
// depend on delta, so a tabulated h serves a whole sweep over delta.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "slm/scalar_channel.hpp"

namespace slm {

struct ReplicaPotentialSample {
  double s;
  double F;
};

/// F(s) in nats; s = 0 gives +infinity for delta > 0.
ReplicaPotentialSample potential(const ScalarPrior& prior, double delta, double s);

struct StationaryPoint {
  double s;
  double M;         // M_X(s)
  double F;         // potential at s
  bool is_minimum;  // residual s(1+M) - delta crosses from - to +
};

struct ReplicaSolution {
  double delta = 0.0;
  std::vector<StationaryPoint> stationary;
  double s_star = 0.0;
  double I_delta = 0.0;
  double M_delta = 0.0;
  bool unique = true;

  std::vector<double> stationary_s() const;
};

/// Tabulates h(s) = s(1 + M_X(s)) on a log grid and solves h(s) = delta by
/// bracketing sign changes and refining each bracket with TOMS 748.
class ReplicaSolver {
 public:
  /// Covers every delta in [delta_lo, delta_hi].
  ReplicaSolver(const ScalarPrior& prior, double delta_lo, double delta_hi,
                std::size_t grid_points = 400);

  std::vector<StationaryPoint> stationary_points(double delta) const;
  ReplicaSolution solve(double delta) const;

  const ScalarPrior& prior() const noexcept { return prior_; }
  double variance() const noexcept { return var_; }

 private:
  ScalarPrior prior_;
  double var_;
  double delta_lo_;
  double delta_hi_;
  std::vector<double> s_;
  std::vector<double> h_;
};

/// Stationary points for one delta, scanning [delta/(1+Var), delta].
std::vector<StationaryPoint> stationary_points(const ScalarPrior& prior, double delta);

/// Global minimizer of F; unique = false when two minima agree within 1e-9 nats.
ReplicaSolution replica_solution(const ScalarPrior& prior, double delta);

struct StateEvolutionResult {
  std::vector<double> M;  // M_0, M_1, ...
  bool converged = false;

  double limit() const { return M.back(); }
};

/// M_{t+1} = M_X(delta / (1 + M_t)) until |M_{t+1} - M_t| < tol.
StateEvolutionResult state_evolution(const ScalarPrior& prior, double delta, double M0,
                                     std::size_t max_iter = 10000, double tol = 1e-12);

/// s with M_X(s) = M by bisection on log s. M must lie in (0, Var(X)).
double inverse_mmse(const ScalarPrior& prior, double M, double rel_tol = 1e-13);

struct FixedPointCurvePoint {
  double delta;
  double M;
  double I_prime;  // 0.5 log(1 + M)
};

struct FixedPointCurve {
  std::vector<FixedPointCurvePoint> points;
  std::size_t rejected = 0;  // grid values outside (0, Var(X))
};

FixedPointCurve fixed_point_curve(const ScalarPrior& prior, std::span<const double> M_grid);

/// A local extremum of delta(M) along the fixed-point curve.
struct TurningPoint {
  double s;
  double delta;
  double M;
  bool is_local_max;  // in delta, as s increases
};

/// Turning points of h(s) = s(1 + M_X(s)) for s in [s_lo, s_hi].
std::vector<TurningPoint> fixed_point_turning_points(const ScalarPrior& prior, double s_lo,
                                                     double s_hi, std::size_t grid_points = 800);

struct PhaseTransition {
  double delta_star;       // replica transition
  double delta_alg;        // state evolution from Var(X) reaches the low branch
  double delta_alg_curve;  // upper turning point of the fixed-point curve
  double delta_low;        // lower turning point of the fixed-point curve
  double M_minus;          // high-branch MMSE at delta_star
  double M_plus;           // low-branch MMSE at delta_star
  double M_split;          // geometric mean of the turning-point MMSE values
};

/// Empty when the fixed-point curve has no S-bend over [delta_lo, delta_hi].
/// delta_star is bisected to `tol`, delta_alg to `alg_tol`; state evolution
/// slows down critically near delta_alg, so the second tolerance is looser.
std::optional<PhaseTransition> locate_phase_transition(const ScalarPrior& prior, double delta_lo,
                                                       double delta_hi, double tol = 1e-7,
                                                       double alg_tol = 1e-5);

/// Number of adjacent grid intervals where the global minimizer changes branch.
/// Branches are separated by the turning points of the fixed-point curve.
std::size_t single_crossing_diagnostic(const ScalarPrior& prior,
                                       std::span<const double> delta_grid);

}  // namespace slm
