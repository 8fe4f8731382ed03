#include "slm/info_sequences.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "slm/exact_inference.hpp"
#include "slm/linear_model.hpp"
#include "slm/parallel.hpp"
#include "slm/rng.hpp"

namespace slm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

struct Summary {
  double log_evidence;  // without the -(rows/2) log 2 pi term
  Eigen::MatrixXd cov;
};

// Exact posterior of x given rows added one at a time. Finite-atom priors
// enumerate support points and update residuals incrementally; priors with a
// continuous component go through SupportPosterior.
class PosteriorEngine {
 public:
  PosteriorEngine(const ScalarPrior& prior, std::size_t N) : prior_(prior), n_(N) {
    const auto& comps = prior.components();
    atoms_ = std::all_of(comps.begin(), comps.end(),
                         [](const MixtureComponent& c) { return c.variance == 0.0; });
    const std::size_t k = comps.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < N; ++i) {
      if (total > kMaxAssignments / k)
        throw std::invalid_argument("sequence estimation: more than 2^20 component assignments");
      total *= k;
    }
    if (!atoms_) return;
    points_.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(N));
    log_prior_.resize(static_cast<Eigen::Index>(total));
    for (std::size_t u = 0; u < total; ++u) {
      std::size_t idx = u;
      double lp = 0.0;
      for (std::size_t n = 0; n < N; ++n) {
        const auto& c = comps[idx % k];
        idx /= k;
        points_(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(n)) = c.mean;
        lp += std::log(c.weight);
      }
      log_prior_[static_cast<Eigen::Index>(u)] = lp;
    }
    reset();
  }

  void reset() {
    rows_.clear();
    ys_.clear();
    if (atoms_) res_.setZero(points_.rows());
  }

  void add_row(std::span<const double> a, double y) {
    if (atoms_) {
      const Eigen::Map<const Eigen::VectorXd> av(a.data(), static_cast<Eigen::Index>(n_));
      res_.array() += (y - (points_ * av).array()).square();
    } else {
      rows_.insert(rows_.end(), a.begin(), a.end());
      ys_.push_back(y);
    }
  }

  Summary summary() const {
    if (!atoms_) {
      DenseMatrix A(ys_.size(), n_);
      std::copy(rows_.begin(), rows_.end(), A.data().begin());
      const SupportPosterior post(A, ys_, prior_);
      return {post.log_evidence() + 0.5 * static_cast<double>(ys_.size()) * kLog2Pi,
              exact_marginals(post).covariance};
    }
    const Eigen::ArrayXd lw = log_prior_.array() - 0.5 * res_.array();
    const double mx = lw.maxCoeff();
    const Eigen::ArrayXd e = (lw - mx).exp();
    const double z = e.sum();
    const Eigen::VectorXd p = (e / z).matrix();
    const Eigen::RowVectorXd mean = p.transpose() * points_;
    const Eigen::MatrixXd centered = points_.rowwise() - mean;
    Eigen::MatrixXd cov = centered.transpose() * (centered.array().colwise() * p.array()).matrix();
    cov = 0.5 * (cov + cov.transpose()).eval();
    return {mx + std::log(z), std::move(cov)};
  }

 private:
  ScalarPrior prior_;
  std::size_t n_;
  bool atoms_ = false;
  Eigen::MatrixXd points_;
  Eigen::VectorXd log_prior_;
  Eigen::VectorXd res_;
  std::vector<double> rows_;
  std::vector<double> ys_;
};

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t j) {
  std::vector<double> out(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) out[t] = rows[t][j];
  return out;
}

void check_sizes(std::size_t N, std::size_t trials) {
  if (N == 0) throw std::invalid_argument("sequence estimation: N must be >= 1");
  if (trials == 0) throw std::invalid_argument("sequence estimation: trials must be >= 1");
}

struct TrialRecord {
  std::vector<double> info, trace, frob, lbar, spread;
};

TrialRecord run_trial(const ScalarPrior& prior, const LinearModelInstance& inst, std::size_t M,
                      bool info) {
  const std::size_t N = inst.N();
  const double nd = static_cast<double>(N);
  TrialRecord rec;
  for (auto* v : {&rec.info, &rec.trace, &rec.frob, &rec.lbar, &rec.spread}) v->resize(M + 1);
  PosteriorEngine engine(prior, N);
  double wsum = 0.0;
  for (std::size_t m = 0; m <= M; ++m) {
    if (m > 0) {
      engine.add_row(inst.A.row(m - 1), inst.y[m - 1]);
      wsum += inst.w[m - 1] * inst.w[m - 1];
    }
    const Summary s = engine.summary();
    if (info) rec.info[m] = m == 0 ? 0.0 : -0.5 * wsum - s.log_evidence;
    const Eigen::VectorXd lam =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s.cov, Eigen::EigenvaluesOnly).eigenvalues();
    const double lb = lam.mean();
    rec.trace[m] = s.cov.trace() / nd;
    rec.frob[m] = s.cov.squaredNorm();
    rec.lbar[m] = lb;
    rec.spread[m] = (lam.array() - lb).square().sum();
  }
  return rec;
}

CovarianceStats covariance_stats(const std::vector<TrialRecord>& recs, std::size_t m,
                                 std::size_t N, double fourth_moment) {
  const double nd = static_cast<double>(N);
  const double T = static_cast<double>(recs.size());
  CovarianceStats cs;
  cs.m = m;
  cs.N = N;
  std::vector<double> msc(recs.size()), tr(recs.size());
  double lbar = 0.0, spread = 0.0, frob = 0.0;
  for (std::size_t t = 0; t < recs.size(); ++t) {
    msc[t] = recs[t].frob[m] / (nd * nd);
    tr[t] = recs[t].trace[m];
    lbar += recs[t].lbar[m];
    spread += recs[t].spread[m];
    frob += recs[t].frob[m];
  }
  lbar /= T;
  double var = 0.0;
  for (const auto& r : recs) var += (r.lbar[m] - lbar) * (r.lbar[m] - lbar);
  var /= T;
  cs.msc = jackknife_mean(msc);
  cs.mmse = jackknife_mean(tr);
  cs.frobenius = frob / T;
  cs.mean_term = nd * lbar * lbar;
  cs.trace_var_term = nd * var;
  cs.spread_term = spread / T;
  cs.lower_bound = nd * cs.mmse.value * cs.mmse.value;
  cs.upper_bound = nd * nd * fourth_moment;
  return cs;
}

bool paired(const InfoSequenceEstimate& info, const MMSESequenceEstimate& mmse) {
  return info.seed == mmse.seed && info.trials == mmse.trials && info.N == mmse.N &&
         info.per_trial.size() == info.trials && mmse.per_trial.size() == mmse.trials &&
         info.trials >= 2;
}

}  // namespace

SequenceEstimates estimate_sequences(const ScalarPrior& prior, std::size_t N, std::size_t M,
                                     std::size_t trials, std::uint64_t seed) {
  check_sizes(N, trials);
  PosteriorEngine probe(prior, N);  // size guard before any work
  std::vector<TrialRecord> recs(trials);
  parallel_for(trials, [&](std::size_t t) {
    recs[t] = run_trial(prior, generate_instance(prior, N, M, seed, t), M, true);
  });

  SequenceEstimates out;
  auto& info = out.info;
  auto& mm = out.mmse;
  info.N = mm.N = N;
  info.trials = mm.trials = trials;
  info.seed = mm.seed = seed;
  info.per_trial.resize(trials);
  mm.per_trial.resize(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    info.per_trial[t] = recs[t].info;
    mm.per_trial[t] = recs[t].trace;
  }
  for (std::size_t m = 0; m <= M; ++m) {
    const Estimate i = jackknife_mean(column(info.per_trial, m));
    info.I.push_back(i.value);
    info.std_err.push_back(i.std_err);
    const Estimate e = jackknife_mean(column(mm.per_trial, m));
    mm.M.push_back(e.value);
    mm.std_err.push_back(e.std_err);
  }
  std::vector<double> d(trials);
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t t = 0; t < trials; ++t) d[t] = info.per_trial[t][m + 1] - info.per_trial[t][m];
    const Estimate e = jackknife_mean(d);
    info.I_prime.push_back(e.value);
    info.I_prime_se.push_back(e.std_err);
  }
  for (std::size_t m = 0; m + 1 < M; ++m) {
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& r = info.per_trial[t];
      d[t] = r[m + 2] - 2.0 * r[m + 1] + r[m];
    }
    const Estimate e = jackknife_mean(d);
    info.I_dprime.push_back(e.value);
    info.I_dprime_se.push_back(e.std_err);
  }
  const double b = prior_moments(prior).fourth_moment;
  for (std::size_t m = 0; m <= M; ++m) out.covariance.push_back(covariance_stats(recs, m, N, b));
  return out;
}

InfoSequenceEstimate estimate_info_sequence(const ScalarPrior& prior, std::size_t N, std::size_t M,
                                            std::size_t trials, std::uint64_t seed) {
  return estimate_sequences(prior, N, M, trials, seed).info;
}

MMSESequenceEstimate estimate_mmse_sequence(const ScalarPrior& prior, std::size_t N, std::size_t M,
                                            std::size_t trials, std::uint64_t seed) {
  return estimate_sequences(prior, N, M, trials, seed).mmse;
}

CovarianceStats mean_squared_covariance(const ScalarPrior& prior, std::size_t N, std::size_t m,
                                        std::size_t trials, std::uint64_t seed,
                                        bool fixed_matrix) {
  check_sizes(N, trials);
  PosteriorEngine probe(prior, N);
  DenseMatrix A0;
  if (fixed_matrix) A0 = generate_instance(prior, N, m, seed, 0).A;
  std::vector<TrialRecord> recs(trials);
  parallel_for(trials, [&](std::size_t t) {
    LinearModelInstance inst = generate_instance(prior, N, m, seed, t);
    if (fixed_matrix && m > 0) {
      inst.A = A0;
      inst.A.multiply(inst.x, inst.y);
      for (std::size_t i = 0; i < m; ++i) inst.y[i] += inst.w[i];
    }
    recs[t] = run_trial(prior, inst, m, false);
  });
  return covariance_stats(recs, m, N, prior_moments(prior).fourth_moment);
}

ScalarPrior discretize_bernoulli_gaussian(const ScalarPrior& bg) {
  if (bg.kind() != PriorKind::BernoulliGaussian)
    throw std::invalid_argument("discretize_bernoulli_gaussian: need a Bernoulli-Gaussian prior");
  const double g = bg.gamma();
  if (bg.sigma2() == 0.0) return ScalarPrior::finite_atoms({0.0, bg.mu()}, {1.0 - g, g});
  const double sd = std::sqrt(bg.sigma2());
  const double r6 = std::sqrt(6.0);
  const double inner = std::sqrt(3.0 - r6), outer = std::sqrt(3.0 + r6);
  const double w_in = (3.0 + r6) / 12.0, w_out = (3.0 - r6) / 12.0;
  return ScalarPrior::finite_atoms(
      {0.0, bg.mu() - sd * outer, bg.mu() - sd * inner, bg.mu() + sd * inner, bg.mu() + sd * outer},
      {1.0 - g, g * w_out, g * w_in, g * w_in, g * w_out});
}

// ---------------------------------------------------------------------------

SequenceCheck check_theorem_monotone(const InfoSequenceEstimate& info) {
  SequenceCheck c;
  c.worst = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < info.I_dprime.size(); ++m) {
    const double v = info.I_dprime[m] - 3.0 * info.I_dprime_se[m];
    if (v > c.worst) {
      c.worst = v;
      c.where = m;
    }
    if (v > 0.0) ++c.violations;
  }
  if (info.I_dprime.empty()) c.worst = 0.0;
  c.pass = c.violations == 0;
  return c;
}

SequenceCheck check_theorem_ip_ub(const InfoSequenceEstimate& info,
                                  const MMSESequenceEstimate& mmse) {
  const std::size_t n = std::min(info.I_prime.size(), mmse.M.size());
  const bool pair = paired(info, mmse);
  SequenceCheck c;
  c.worst = n ? -std::numeric_limits<double>::infinity() : 0.0;
  std::vector<std::vector<double>> rows(pair ? info.trials : 0, std::vector<double>(3));
  for (std::size_t m = 0; m < n; ++m) {
    double excess = info.I_prime[m] - 0.5 * std::log1p(mmse.M[m]);
    double se;
    if (pair) {
      for (std::size_t t = 0; t < info.trials; ++t)
        rows[t] = {info.per_trial[t][m], info.per_trial[t][m + 1], mmse.per_trial[t][m]};
      const Estimate e = jackknife(
          rows, [](const std::vector<double>& v) { return v[1] - v[0] - 0.5 * std::log1p(v[2]); });
      excess = e.value;
      se = e.std_err;
    } else {
      const double dm = 0.5 / (1.0 + mmse.M[m]) * mmse.std_err[m];
      se = std::hypot(info.I_prime_se[m], dm);
    }
    const double v = excess - 3.0 * se;
    if (v > c.worst) {
      c.worst = v;
      c.where = m;
    }
    if (v > 0.0) ++c.violations;
  }
  c.pass = c.violations == 0;
  return c;
}

BoundCheck check_theorem_mmse_lb(const InfoSequenceEstimate& info,
                                 const MMSESequenceEstimate& mmse, std::size_t k, std::size_t m) {
  if (!(k < m)) throw std::invalid_argument("check_theorem_mmse_lb: need 0 <= k < m");
  if (m >= info.I.size() || k >= mmse.M.size() || mmse.M.empty())
    throw std::invalid_argument("check_theorem_mmse_lb: index beyond the estimated sequences");
  const double kd = static_cast<double>(k), span = static_cast<double>(m - k);
  auto bound = [&](double im, double m0) {
    return std::exp((2.0 * im - kd * std::log1p(m0)) / span) - 1.0;
  };
  BoundCheck b;
  b.value = mmse.M[k];
  b.bound = bound(info.I[m], mmse.M[0]);
  if (paired(info, mmse)) {
    std::vector<std::vector<double>> rows(info.trials);
    for (std::size_t t = 0; t < info.trials; ++t)
      rows[t] = {mmse.per_trial[t][k], info.per_trial[t][m], mmse.per_trial[t][0]};
    b.std_err = jackknife(rows, [&](const std::vector<double>& v) {
                  return v[0] - bound(v[1], v[2]);
                }).std_err;
  } else {
    const double slope = 2.0 / span * (b.bound + 1.0);
    b.std_err = std::hypot(mmse.std_err[k], slope * info.std_err[m]);
  }
  b.pass = b.value - b.bound >= -3.0 * b.std_err;
  return b;
}

CardinalityCheck check_card_bound(const InfoSequenceEstimate& info, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("check_card_bound: T must be > 0");
  if (info.I.size() < 2) throw std::invalid_argument("check_card_bound: need M >= 1");
  CardinalityCheck c;
  for (std::size_t m = 0; m < info.I_dprime.size(); ++m) {
    const double a = std::abs(info.I_dprime[m]);
    if (a >= T) ++c.count;
    if (a - 3.0 * info.I_dprime_se[m] >= T) ++c.significant_count;
  }
  c.bound = info.I[1] / T;
  c.bound_upper = (info.I[1] + 3.0 * info.std_err[1]) / T;
  c.pass = static_cast<double>(c.significant_count) <= c.bound_upper;
  return c;
}

// ---------------------------------------------------------------------------

ConditionalMMSE conditional_mmse_function(const ScalarPrior& prior, std::size_t N, std::size_t m,
                                          std::span<const double> s_grid, std::size_t trials,
                                          std::uint64_t seed, double fd_step) {
  check_sizes(N, trials);
  if (!(fd_step > 0.0) || !std::isfinite(fd_step))
    throw std::invalid_argument("conditional_mmse_function: fd_step must be > 0");
  for (double s : s_grid)
    if (!(s >= 0.0) || !std::isfinite(s))
      throw std::invalid_argument("conditional_mmse_function: s must be finite and >= 0");
  PosteriorEngine probe(prior, N);

  std::vector<double> pts(s_grid.begin(), s_grid.end());
  pts.push_back(0.0);
  pts.push_back(fd_step);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t P = pts.size();
  const std::size_t h_idx =
      static_cast<std::size_t>(std::lower_bound(pts.begin(), pts.end(), fd_step) - pts.begin());
  const double nd = static_cast<double>(N);

  std::vector<std::vector<double>> values(trials, std::vector<double>(P));
  std::vector<double> msc(trials);
  parallel_for(trials, [&](std::size_t t) {
    const LinearModelInstance inst = generate_instance(prior, N, m, seed, t);
    RandomStream aux(seed, t | (std::uint64_t{1} << 63));
    PosteriorEngine base(prior, N);
    for (std::size_t i = 0; i < m; ++i) base.add_row(inst.A.row(i), inst.y[i]);
    const Summary s0 = base.summary();
    msc[t] = s0.cov.squaredNorm() / nd;

    std::vector<double> path(N, 0.0), row(N), xi(N);
    double prev = 0.0;
    for (std::size_t j = 0; j < P; ++j) {
      const double s = pts[j];
      aux.fill_normal(xi, std::sqrt(s - prev));
      for (std::size_t n = 0; n < N; ++n) path[n] += xi[n];
      prev = s;
      if (s == 0.0) {
        values[t][j] = s0.cov.trace() / nd;
        continue;
      }
      const double rs = std::sqrt(s);
      double acc = 0.0;
      for (double sign : {1.0, -1.0}) {
        PosteriorEngine e = base;
        for (std::size_t n = 0; n < N; ++n) {
          std::fill(row.begin(), row.end(), 0.0);
          row[n] = rs;
          e.add_row(row, (s * inst.x[n] + sign * path[n]) / rs);
        }
        acc += e.summary().cov.trace() / nd;
      }
      values[t][j] = 0.5 * acc;
    }
  });

  ConditionalMMSE out;
  out.fd_step = fd_step;
  for (double s : s_grid) {
    const auto j = static_cast<std::size_t>(std::lower_bound(pts.begin(), pts.end(), s) - pts.begin());
    const Estimate e = jackknife_mean(column(values, j));
    out.s.push_back(s);
    out.M.push_back(e.value);
    out.M_se.push_back(e.std_err);
  }
  std::vector<double> slope(trials), gap(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    slope[t] = (values[t][0] - values[t][h_idx]) / fd_step;
    gap[t] = slope[t] - msc[t];
  }
  out.slope_fd = jackknife_mean(slope);
  out.msc_scaled = jackknife_mean(msc);
  out.gap = jackknife_mean(gap);
  return out;
}

}  // namespace slm
