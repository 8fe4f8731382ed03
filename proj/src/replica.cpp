#include "slm/replica.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace slm {

namespace {

constexpr double kTieTol = 1e-9;

double h_of(const ScalarPrior& prior, double s) { return s * (1.0 + scalar_mmse(prior, s)); }

std::size_t sweep_grid_points(double lo, double hi, std::size_t base) {
  return base + static_cast<std::size_t>(200.0 * std::log10(hi / lo));
}

// Branch index of an MMSE value: how many turning-point MMSE values lie below it.
std::size_t branch_of(double M, const std::vector<TurningPoint>& turns) {
  std::size_t b = 0;
  for (const auto& t : turns)
    if (t.M < M) ++b;
  return b;
}

}  // namespace

ReplicaPotentialSample potential(const ScalarPrior& prior, double delta, double s) {
  if (!(delta > 0.0)) throw std::invalid_argument("potential: delta must be > 0");
  if (!(s >= 0.0)) throw std::invalid_argument("potential: s must be >= 0");
  if (s == 0.0) return {0.0, std::numeric_limits<double>::infinity()};
  const double F = scalar_mi(prior, s) + 0.5 * delta * (std::log(delta / s) + s / delta - 1.0);
  return {s, F};
}

std::vector<double> ReplicaSolution::stationary_s() const {
  std::vector<double> out;
  out.reserve(stationary.size());
  for (const auto& p : stationary) out.push_back(p.s);
  return out;
}

// ---------------------------------------------------------------------------

ReplicaSolver::ReplicaSolver(const ScalarPrior& prior, double delta_lo, double delta_hi,
                             std::size_t grid_points)
    : prior_(prior), var_(prior_moments(prior).variance), delta_lo_(delta_lo),
      delta_hi_(delta_hi) {
  if (!(delta_lo > 0.0) || !(delta_hi >= delta_lo))
    throw std::invalid_argument("ReplicaSolver: need 0 < delta_lo <= delta_hi");
  if (grid_points < 3) throw std::invalid_argument("ReplicaSolver: need at least 3 grid points");
  // Every root of s(1+M(s)) = delta lies in [delta/(1+Var), delta].
  const double s_lo = 0.999 * delta_lo / (1.0 + var_);
  const double s_hi = 1.001 * delta_hi;
  s_ = log_grid(s_lo, s_hi, grid_points);
  h_.reserve(s_.size());
  for (double s : s_) h_.push_back(h_of(prior_, s));
}

std::vector<StationaryPoint> ReplicaSolver::stationary_points(double delta) const {
  if (!(delta >= delta_lo_ * (1.0 - 1e-12) && delta <= delta_hi_ * (1.0 + 1e-12)))
    throw std::invalid_argument("ReplicaSolver: delta outside the tabulated range");
  std::vector<StationaryPoint> out;
  auto g = [&](double s) { return h_of(prior_, s) - delta; };
  for (std::size_t k = 0; k + 1 < s_.size(); ++k) {
    const double a = h_[k] - delta;
    const double b = h_[k + 1] - delta;
    if ((a > 0.0) == (b > 0.0)) continue;
    std::uintmax_t iters = 100;
    const auto bracket = boost::math::tools::toms748_solve(
        g, s_[k], s_[k + 1], a, b, boost::math::tools::eps_tolerance<double>(50), iters);
    const double s = 0.5 * (bracket.first + bracket.second);
    StationaryPoint p{};
    p.s = s;
    p.M = scalar_mmse(prior_, s);
    p.F = potential(prior_, delta, s).F;
    p.is_minimum = b > 0.0;
    out.push_back(p);
  }
  if (out.empty()) throw NumericalError("stationary_points: residual has no sign change");
  return out;
}

ReplicaSolution ReplicaSolver::solve(double delta) const {
  ReplicaSolution sol;
  sol.delta = delta;
  sol.stationary = stationary_points(delta);
  const StationaryPoint* best = nullptr;
  for (const auto& p : sol.stationary)
    if (p.is_minimum && (!best || p.F < best->F)) best = &p;
  if (!best) throw NumericalError("replica_solution: no local minimum found");
  sol.s_star = best->s;
  sol.I_delta = best->F;
  sol.M_delta = best->M;
  for (const auto& p : sol.stationary)
    if (p.is_minimum && &p != best && std::abs(p.F - best->F) < kTieTol) sol.unique = false;
  return sol;
}

std::vector<StationaryPoint> stationary_points(const ScalarPrior& prior, double delta) {
  return ReplicaSolver(prior, delta, delta).stationary_points(delta);
}

ReplicaSolution replica_solution(const ScalarPrior& prior, double delta) {
  return ReplicaSolver(prior, delta, delta).solve(delta);
}

// ---------------------------------------------------------------------------

StateEvolutionResult state_evolution(const ScalarPrior& prior, double delta, double M0,
                                     std::size_t max_iter, double tol) {
  const double var = prior_moments(prior).variance;
  if (!(delta >= 0.0)) throw std::invalid_argument("state_evolution: delta must be >= 0");
  if (!(M0 >= 0.0 && M0 <= var * (1.0 + 1e-12)))
    throw std::invalid_argument("state_evolution: M0 must lie in [0, Var(X)]");
  if (!(tol > 0.0)) throw std::invalid_argument("state_evolution: tol must be > 0");
  StateEvolutionResult out;
  out.M.push_back(M0);
  double m = M0;
  for (std::size_t t = 0; t < max_iter; ++t) {
    const double next = scalar_mmse(prior, delta / (1.0 + m));
    out.M.push_back(next);
    if (std::abs(next - m) < tol) {
      out.converged = true;
      break;
    }
    m = next;
  }
  return out;
}

double inverse_mmse(const ScalarPrior& prior, double M, double rel_tol) {
  const double var = prior_moments(prior).variance;
  if (!(M > 0.0 && M < var)) throw std::invalid_argument("inverse_mmse: M outside (0, Var(X))");
  double lo = 1.0, hi = 1.0;
  while (scalar_mmse(prior, lo) <= M) {
    lo *= 0.1;
    if (lo < 1e-300) throw NumericalError("inverse_mmse: cannot bracket from below");
  }
  while (scalar_mmse(prior, hi) > M) {
    hi *= 10.0;
    if (hi > 1e300) throw NumericalError("inverse_mmse: cannot bracket from above");
  }
  while (hi / lo - 1.0 > rel_tol) {
    const double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    if (scalar_mmse(prior, mid) > M)
      lo = mid;
    else
      hi = mid;
  }
  return std::sqrt(lo * hi);
}

FixedPointCurve fixed_point_curve(const ScalarPrior& prior, std::span<const double> M_grid) {
  const double var = prior_moments(prior).variance;
  FixedPointCurve curve;
  for (double M : M_grid) {
    if (!(M > 0.0 && M < var)) {
      ++curve.rejected;
      continue;
    }
    const double s = inverse_mmse(prior, M);
    curve.points.push_back({(1.0 + M) * s, M, 0.5 * std::log1p(M)});
  }
  return curve;
}

std::vector<TurningPoint> fixed_point_turning_points(const ScalarPrior& prior, double s_lo,
                                                     double s_hi, std::size_t grid_points) {
  const std::vector<double> s = log_grid(s_lo, s_hi, grid_points);
  std::vector<double> h(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) h[k] = h_of(prior, s[k]);

  std::vector<TurningPoint> out;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const double left = h[k] - h[k - 1];
    const double right = h[k + 1] - h[k];
    const bool is_max = left > 0.0 && right <= 0.0;
    const bool is_min = left < 0.0 && right >= 0.0;
    if (!is_max && !is_min) continue;
    const double sign = is_max ? -1.0 : 1.0;
    auto f = [&](double log_s) { return sign * h_of(prior, std::exp(log_s)); };
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::brent_find_minima(f, std::log(s[k - 1]), std::log(s[k + 1]),
                                                         40, iters);
    const double sk = std::exp(r.first);
    out.push_back({sk, sign * r.second, scalar_mmse(prior, sk), is_max});
  }
  return out;
}

std::optional<PhaseTransition> locate_phase_transition(const ScalarPrior& prior, double delta_lo,
                                                       double delta_hi, double tol,
                                                       double alg_tol) {
  if (!(delta_lo > 0.0) || !(delta_hi > delta_lo))
    throw std::invalid_argument("locate_phase_transition: need 0 < delta_lo < delta_hi");
  if (!(tol > 0.0) || !(alg_tol > 0.0))
    throw std::invalid_argument("locate_phase_transition: tolerances must be > 0");
  const double var = prior_moments(prior).variance;
  const auto turns = fixed_point_turning_points(prior, 0.999 * delta_lo / (1.0 + var),
                                                1.001 * delta_hi,
                                                sweep_grid_points(delta_lo, delta_hi, 800));
  // First S-bend: a local max of delta(s) followed by a local min.
  const TurningPoint* upper = nullptr;
  const TurningPoint* lower = nullptr;
  for (std::size_t i = 0; i + 1 < turns.size(); ++i) {
    if (turns[i].is_local_max && !turns[i + 1].is_local_max) {
      upper = &turns[i];
      lower = &turns[i + 1];
      break;
    }
  }
  if (!upper) return std::nullopt;

  PhaseTransition pt{};
  pt.delta_alg_curve = upper->delta;
  pt.delta_low = lower->delta;
  pt.M_split = std::sqrt(upper->M * lower->M);

  const ReplicaSolver solver(prior, delta_lo, delta_hi,
                             sweep_grid_points(delta_lo, delta_hi, 400));
  auto on_low_branch = [&](double d) { return solver.solve(d).M_delta < pt.M_split; };
  if (on_low_branch(delta_lo) || !on_low_branch(delta_hi)) return std::nullopt;
  double lo = delta_lo, hi = delta_hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (on_low_branch(mid) ? hi : lo) = mid;
  }
  pt.delta_star = hi;

  const auto at_star = solver.stationary_points(pt.delta_star);
  pt.M_minus = 0.0;
  pt.M_plus = std::numeric_limits<double>::infinity();
  for (const auto& p : at_star) {
    if (!p.is_minimum) continue;
    pt.M_minus = std::max(pt.M_minus, p.M);
    pt.M_plus = std::min(pt.M_plus, p.M);
  }

  // State evolution from the uninformative start, stopped once it enters the
  // low branch or settles above it.
  auto se_reaches_low = [&](double d) {
    double m = var;
    for (std::size_t t = 0; t < 1000000; ++t) {
      const double next = scalar_mmse(prior, d / (1.0 + m));
      if (next < pt.M_split) return true;
      if (std::abs(next - m) < 1e-12 * next) return false;
      m = next;
    }
    return false;
  };
  if (!se_reaches_low(delta_hi)) {
    pt.delta_alg = std::numeric_limits<double>::quiet_NaN();
  } else {
    lo = std::max(delta_lo, pt.delta_low);
    hi = delta_hi;
    while (hi - lo > alg_tol) {
      const double mid = 0.5 * (lo + hi);
      (se_reaches_low(mid) ? hi : lo) = mid;
    }
    pt.delta_alg = hi;
  }
  return pt;
}

std::size_t single_crossing_diagnostic(const ScalarPrior& prior,
                                       std::span<const double> delta_grid) {
  if (delta_grid.size() < 2) return 0;
  for (std::size_t i = 0; i < delta_grid.size(); ++i)
    if (!(delta_grid[i] > 0.0) || (i && !(delta_grid[i] > delta_grid[i - 1])))
      throw std::invalid_argument("single_crossing_diagnostic: grid must be positive, ascending");
  const double lo = delta_grid.front(), hi = delta_grid.back();
  const double var = prior_moments(prior).variance;
  const auto turns = fixed_point_turning_points(prior, 0.999 * lo / (1.0 + var), 1.001 * hi,
                                                sweep_grid_points(lo, hi, 800));
  const ReplicaSolver solver(prior, lo, hi, sweep_grid_points(lo, hi, 400));
  std::size_t switches = 0;
  std::size_t prev = branch_of(solver.solve(delta_grid[0]).M_delta, turns);
  for (std::size_t i = 1; i < delta_grid.size(); ++i) {
    const std::size_t cur = branch_of(solver.solve(delta_grid[i]).M_delta, turns);
    if (cur != prev) ++switches;
    prev = cur;
  }
  return switches;
}

}  // namespace slm
