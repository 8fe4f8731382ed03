#include "slm/exact_inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "slm/linear_model.hpp"
#include "slm/parallel.hpp"

namespace slm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Pairwise summation keeps the reduction error at O(log n) ulps.
double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

double log_sum_exp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  std::vector<double> e(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) e[i] = std::exp(v[i] - mx);
  return mx + std::log(pairwise_sum(e.data(), e.size()));
}

bool is_nonzero_component(const MixtureComponent& c) { return c.mean != 0.0 || c.variance > 0.0; }

}  // namespace

SupportPosterior::SupportPosterior(const DenseMatrix& A, std::span<const double> y,
                                   const ScalarPrior& prior)
    : prior_(prior), comps_(prior.components()), n_(A.cols()), m_(A.rows()) {
  if (y.size() != m_) throw std::invalid_argument("SupportPosterior: y has the wrong length");
  if (n_ == 0) throw std::invalid_argument("SupportPosterior: N must be >= 1");
  const std::size_t k = comps_.size();
  std::size_t total = 1;
  for (std::size_t n = 0; n < n_; ++n) {
    if (total > kMaxAssignments / k)
      throw std::invalid_argument("SupportPosterior: more than 2^20 component assignments");
    total *= k;
  }

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> a(A.data().data(), static_cast<Eigen::Index>(m_),
                                     static_cast<Eigen::Index>(n_));
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(m_));
  gram_ = a.transpose() * a;
  aty_ = a.transpose() * yv;
  yy_ = yv.squaredNorm();

  log_w_.resize(total);
  for (std::size_t i = 0; i < total; ++i) log_w_[i] = evaluate(i, nullptr);
  log_evidence_ = log_sum_exp(log_w_);
  if (!std::isfinite(log_evidence_)) throw NumericalError("SupportPosterior: evidence is not finite");
  for (double& v : log_w_) v -= log_evidence_;
}

std::vector<int> SupportPosterior::assignment(std::size_t i) const {
  std::vector<int> u(n_);
  const std::size_t k = comps_.size();
  for (std::size_t n = 0; n < n_; ++n) {
    u[n] = static_cast<int>(i % k);
    i /= k;
  }
  return u;
}

double SupportPosterior::weight_sum() const {
  std::vector<double> e(log_w_.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = std::exp(log_w_[i]);
  return pairwise_sum(e.data(), e.size());
}

ConditionalGaussian SupportPosterior::conditional(std::size_t i) const {
  if (i >= log_w_.size()) throw std::out_of_range("SupportPosterior::conditional");
  ConditionalGaussian cg;
  evaluate(i, &cg);
  return cg;
}

double SupportPosterior::evaluate(std::size_t i, ConditionalGaussian* moments) const {
  const auto N = static_cast<Eigen::Index>(n_);
  const std::size_t k = comps_.size();
  Eigen::VectorXd m(N);
  std::vector<Eigen::Index> active;
  std::vector<double> sd;
  double log_prior = 0.0;
  std::size_t idx = i;
  for (Eigen::Index n = 0; n < N; ++n) {
    const MixtureComponent& c = comps_[idx % k];
    idx /= k;
    m[n] = c.mean;
    log_prior += std::log(c.weight);
    if (c.variance > 0.0) {
      active.push_back(n);
      sd.push_back(std::sqrt(c.variance));
    }
  }

  const Eigen::VectorXd gm = gram_ * m;
  const Eigen::VectorXd atr = aty_ - gm;  // A^T r
  const double rr = yy_ - 2.0 * m.dot(aty_) + m.dot(gm);
  const double base = log_prior - 0.5 * static_cast<double>(m_) * kLog2Pi;

  if (moments) {
    moments->mean = m;
    moments->covariance.setZero(N, N);
  }
  if (active.empty()) return base - 0.5 * rr;

  const auto J = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd K(J, J);
  Eigen::VectorXd b(J);
  for (Eigen::Index p = 0; p < J; ++p) {
    b[p] = sd[p] * atr[active[p]];
    for (Eigen::Index q = 0; q < J; ++q) K(p, q) = sd[p] * sd[q] * gram_(active[p], active[q]);
    K(p, p) += 1.0;
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) throw NumericalError("SupportPosterior: Cholesky failed");
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::VectorXd t = llt.matrixL().solve(b);
  double logdet = 0.0;
  for (Eigen::Index p = 0; p < J; ++p) logdet += 2.0 * std::log(L(p, p));
  const double quad = rr - t.squaredNorm();

  if (moments) {
    const Eigen::VectorXd u = llt.matrixU().solve(t);
    const Eigen::MatrixXd Kinv = llt.solve(Eigen::MatrixXd::Identity(J, J));
    for (Eigen::Index p = 0; p < J; ++p) {
      moments->mean[active[p]] += sd[p] * u[p];
      for (Eigen::Index q = 0; q < J; ++q)
        moments->covariance(active[p], active[q]) = sd[p] * Kinv(p, q) * sd[q];
    }
  }
  return base - 0.5 * logdet - 0.5 * quad;
}

ExactMarginals exact_marginals(const SupportPosterior& posterior) {
  const auto N = static_cast<Eigen::Index>(posterior.dimension());
  const auto K = static_cast<Eigen::Index>(posterior.num_components());
  const auto lw = posterior.log_weights();
  const std::size_t best = static_cast<std::size_t>(
      std::max_element(lw.begin(), lw.end()) - lw.begin());
  const Eigen::VectorXd shift = posterior.conditional(best).mean;

  Eigen::VectorXd first = Eigen::VectorXd::Zero(N);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(N, N);
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(N, K);
  double total = 0.0;
  posterior.for_each([&](std::size_t i, double w, const ConditionalGaussian& cg) {
    const Eigen::VectorXd d = cg.mean - shift;
    first += w * d;
    second += w * (cg.covariance + d * d.transpose());
    const auto u = posterior.assignment(i);
    for (Eigen::Index n = 0; n < N; ++n) comp(n, u[static_cast<std::size_t>(n)]) += w;
    total += w;
  });

  ExactMarginals out;
  const Eigen::VectorXd d = first / total;
  out.mean = shift + d;
  out.covariance = second / total - d * d.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  out.component_prob = comp / total;
  const auto& comps = posterior.prior().components();
  out.gamma.assign(static_cast<std::size_t>(N), 0.0);
  for (Eigen::Index n = 0; n < N; ++n)
    for (Eigen::Index c = 0; c < K; ++c)
      if (is_nonzero_component(comps[static_cast<std::size_t>(c)]))
        out.gamma[static_cast<std::size_t>(n)] += out.component_prob(n, c);
  return out;
}

Estimate exact_mmse_mc(const ScalarPrior& prior, std::size_t N, std::size_t M,
                       std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("exact_mmse_mc: trials must be >= 1");
  std::vector<double> per_trial(trials);
  parallel_for(trials, [&](std::size_t t) {
    const LinearModelInstance inst = generate_instance(prior, N, M, seed, t);
    const SupportPosterior post(inst.A, inst.y, prior);
    per_trial[t] = exact_marginals(post).covariance.trace() / static_cast<double>(N);
  });
  return jackknife_mean(per_trial);
}

// ---------------------------------------------------------------------------

std::vector<RocPoint> detection_roc(std::span<const double> gammas,
                                    const std::vector<bool>& truth_support,
                                    std::span<const double> thresholds) {
  if (gammas.size() != truth_support.size())
    throw std::invalid_argument("detection_roc: length mismatch");
  std::size_t pos = 0;
  for (bool t : truth_support) pos += t ? 1 : 0;
  const std::size_t neg = truth_support.size() - pos;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<RocPoint> out;
  out.reserve(thresholds.size());
  for (double lambda : thresholds) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t n = 0; n < gammas.size(); ++n) {
      if (gammas[n] >= lambda) {
        if (truth_support[n]) ++tp;
        else ++fp;
      }
    }
    out.push_back({lambda, neg ? static_cast<double>(fp) / static_cast<double>(neg) : nan,
                   pos ? static_cast<double>(tp) / static_cast<double>(pos) : nan});
  }
  return out;
}

std::vector<double> default_roc_thresholds() { return linear_grid(0.0, 1.0, 512); }

double roc_auc(std::span<const RocPoint> curve) {
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}, {1.0, 1.0}};
  for (const auto& p : curve)
    if (std::isfinite(p.fpr) && std::isfinite(p.tpr)) pts.emplace_back(p.fpr, p.tpr);
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    area += 0.5 * (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second);
  return area;
}

// ---------------------------------------------------------------------------

double Codebook::power() const {
  if (codewords.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& c : codewords)
    for (double v : c) acc += v * v;
  return acc / static_cast<double>(codewords.size() * dimension());
}

Codebook random_power_constrained_codebook(std::size_t L, std::size_t N, std::uint64_t seed) {
  if (L == 0 || N == 0) throw std::invalid_argument("random codebook: need L, N >= 1");
  RandomStream rng(seed, 0);
  Codebook cb;
  cb.codewords.assign(L, std::vector<double>(N));
  for (auto& c : cb.codewords) rng.fill_normal(c);
  const double scale = 1.0 / std::sqrt(cb.power());
  for (auto& c : cb.codewords)
    for (double& v : c) v *= scale;
  return cb;
}

CodebookEstimate codebook_mmse_mi(const Codebook& codebook, double snr, std::size_t trials,
                                  std::uint64_t seed) {
  const std::size_t L = codebook.size();
  const std::size_t N = codebook.dimension();
  if (L == 0 || N == 0) throw std::invalid_argument("codebook_mmse_mi: empty codebook");
  if (L > (std::size_t{1} << 16)) throw std::invalid_argument("codebook_mmse_mi: L > 2^16");
  if (!(snr >= 0.0)) throw std::invalid_argument("codebook_mmse_mi: snr must be >= 0");
  if (trials == 0) throw std::invalid_argument("codebook_mmse_mi: trials must be >= 1");
  const double rs = std::sqrt(snr);
  const double nd = static_cast<double>(N);
  std::vector<double> mmse(trials), mi(trials), ll(L), y(N), xhat(N);
  for (std::size_t t = 0; t < trials; ++t) {
    RandomStream rng(seed, t);
    const std::size_t j = std::min(L - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(L)));
    for (std::size_t n = 0; n < N; ++n) y[n] = rs * codebook.codewords[j][n] + rng.normal();
    for (std::size_t l = 0; l < L; ++l) {
      double d2 = 0.0;
      for (std::size_t n = 0; n < N; ++n) {
        const double d = y[n] - rs * codebook.codewords[l][n];
        d2 += d * d;
      }
      ll[l] = -0.5 * d2;
    }
    const double lse = log_sum_exp(ll);
    std::fill(xhat.begin(), xhat.end(), 0.0);
    for (std::size_t l = 0; l < L; ++l) {
      const double p = std::exp(ll[l] - lse);
      for (std::size_t n = 0; n < N; ++n) xhat[n] += p * codebook.codewords[l][n];
    }
    double tr = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      const double p = std::exp(ll[l] - lse);
      double d2 = 0.0;
      for (std::size_t n = 0; n < N; ++n) {
        const double d = codebook.codewords[l][n] - xhat[n];
        d2 += d * d;
      }
      tr += p * d2;
    }
    mmse[t] = tr / nd;
    mi[t] = (ll[j] - (lse - std::log(static_cast<double>(L)))) / nd;
  }
  return {jackknife_mean(mmse), jackknife_mean(mi)};
}

std::pair<double, double> good_code_bounds(double snr, double epsilon, double s) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("good_code_bounds: epsilon must be >= 0");
  if (!(s >= 0.0)) throw std::invalid_argument("good_code_bounds: s must be >= 0");
  if (!(s < snr)) throw std::invalid_argument("good_code_bounds: need s < snr");
  const double e = std::exp(-2.0 * epsilon);
  return {e / (1.0 + s) - (1.0 - e) / (snr - s), 1.0 / (1.0 + s)};
}

}  // namespace slm
