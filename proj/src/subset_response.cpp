#include "slm/subset_response.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "slm/exact_inference.hpp"
#include "slm/parallel.hpp"
#include "slm/rng.hpp"

namespace slm {

namespace {

// Thin QR with the diagonal of R made non-negative.
void thin_qr(const Eigen::MatrixXd& X, Eigen::MatrixXd& Q, Eigen::MatrixXd& R) {
  const Eigen::Index m = X.rows(), k = X.cols();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  Q = qr.householderQ() * Eigen::MatrixXd::Identity(m, k);
  R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (R(j, j) < 0.0) {
      R.row(j) *= -1.0;
      Q.col(j) *= -1.0;
    }
  }
}

Eigen::MatrixXd columns(const DenseMatrix& A, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(A.rows()), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = A(i, idx[j]);
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

Eigen::MatrixXd SubsetDecomposition::Q() const {
  Eigen::MatrixXd q(Q1.rows(), Q1.cols() + Q2.cols());
  q << Q1, Q2;
  return q;
}

double SubsetDecomposition::orthogonality_residual() const {
  const Eigen::MatrixXd q = Q();
  return (q.transpose() * q - Eigen::MatrixXd::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

double SubsetDecomposition::factorization_residual(const DenseMatrix& A) const {
  return (columns(A, S) - Q1 * R).cwiseAbs().maxCoeff();
}

SubsetDecomposition qr_split(const DenseMatrix& A, std::span<const double> y,
                             std::span<const std::size_t> S, std::uint64_t seed) {
  const std::size_t M = A.rows(), N = A.cols(), K = S.size();
  if (y.size() != M) throw std::invalid_argument("qr_split: y has the wrong length");
  if (K == 0 || K > std::min(M, N)) throw std::invalid_argument("qr_split: need 1 <= |S| <= min(M, N)");
  std::vector<char> used(N, 0);
  for (std::size_t s : S) {
    if (s >= N || used[s]) throw std::invalid_argument("qr_split: S has a repeated or out-of-range index");
    used[s] = 1;
  }

  SubsetDecomposition d;
  d.S.assign(S.begin(), S.end());
  for (std::size_t n = 0; n < N; ++n)
    if (!used[n]) d.Sc.push_back(n);

  const Eigen::MatrixXd AS = columns(A, d.S);
  thin_qr(AS, d.Q1, d.R);
  const double scale = AS.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < d.R.rows(); ++j)
    if (!(d.R(j, j) > 1e-12 * scale * static_cast<double>(M)))
      throw std::invalid_argument("qr_split: A_S is rank deficient");

  const auto Mi = static_cast<Eigen::Index>(M), Ki = static_cast<Eigen::Index>(K);
  if (K < M) {
    RandomStream rng(seed, 0);
    Eigen::MatrixXd G(Mi, Mi - Ki);
    for (Eigen::Index j = 0; j < G.cols(); ++j)
      for (Eigen::Index i = 0; i < Mi; ++i) G(i, j) = rng.normal();
    for (int pass = 0; pass < 2; ++pass) G -= d.Q1 * (d.Q1.transpose() * G);
    Eigen::MatrixXd unused;
    thin_qr(G, d.Q2, unused);
  } else {
    d.Q2.resize(Mi, 0);
  }

  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), Mi);
  const Eigen::MatrixXd ASc = columns(A, d.Sc);
  d.y1 = d.Q1.transpose() * yv;
  d.y2 = d.Q2.transpose() * yv;
  d.B1 = d.Q1.transpose() * ASc;
  d.B2 = d.Q2.transpose() * ASc;
  return d;
}

SubsetResponse interference_subtract(const SubsetDecomposition& d, const ScalarPrior& prior,
                                     const LinearModelInstance& inst) {
  const std::size_t nc = d.Sc.size();
  if (nc > kMaxInterferenceDim)
    throw std::invalid_argument("interference_subtract: N - K exceeds 20");
  if (inst.N() != d.S.size() + nc || inst.M() != static_cast<std::size_t>(d.Q1.rows()))
    throw std::invalid_argument("interference_subtract: instance does not match the decomposition");

  SubsetResponse out;
  out.x_sc_mean.resize(static_cast<Eigen::Index>(nc));
  if (nc > 0) {
    const std::size_t rows = static_cast<std::size_t>(d.B2.rows());
    DenseMatrix B2(rows, nc);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < nc; ++j)
        B2(i, j) = d.B2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    const std::vector<double> y2(d.y2.data(), d.y2.data() + d.y2.size());
    const SupportPosterior post(B2, y2, prior);
    out.x_sc_mean = exact_marginals(post).mean;
  }

  Eigen::VectorXd xs(static_cast<Eigen::Index>(d.S.size())), xsc(static_cast<Eigen::Index>(nc));
  for (std::size_t j = 0; j < d.S.size(); ++j) xs[static_cast<Eigen::Index>(j)] = inst.x[d.S[j]];
  for (std::size_t j = 0; j < nc; ++j) xsc[static_cast<Eigen::Index>(j)] = inst.x[d.Sc[j]];
  const Eigen::Map<const Eigen::VectorXd> w(inst.w.data(), static_cast<Eigen::Index>(inst.w.size()));

  out.z = d.y1 - d.B1 * out.x_sc_mean;
  out.v = out.z - d.R * xs;
  out.w_tilde = d.Q().transpose() * w;
  const Eigen::VectorXd v_def = d.B1 * (xsc - out.x_sc_mean) + out.w_tilde.head(d.R.rows());
  out.identity_residual = (out.z - d.R * xs - v_def).cwiseAbs().maxCoeff();
  return out;
}

GaussianityDiagnostic gaussianity_diagnostic(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 200) throw std::invalid_argument("gaussianity_diagnostic: need at least 200 samples");
  const double nd = static_cast<double>(n);
  GaussianityDiagnostic g;
  g.n = n;
  for (double v : x) g.mean += v;
  g.mean /= nd;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - g.mean, d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= nd;
  m3 /= nd;
  m4 /= nd;
  g.variance = m2;
  if (m2 > 0.0) {
    g.skewness = m3 / std::pow(m2, 1.5);
    g.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    const double sd = std::sqrt(m2);
    for (std::size_t i = 0; i < n; ++i) {
      const double F = normal_cdf((s[i] - g.mean) / sd);
      g.ks_distance = std::max({g.ks_distance, static_cast<double>(i + 1) / nd - F,
                                F - static_cast<double>(i) / nd});
    }
  } else {
    g.ks_distance = 1.0;
  }
  g.consistent_with_normal = m2 > 0.0 && std::abs(g.skewness) <= 4.0 * std::sqrt(6.0 / nd) &&
                             std::abs(g.excess_kurtosis) <= 4.0 * std::sqrt(24.0 / nd);
  return g;
}

IndependenceCheck independence_check(const std::vector<std::vector<double>>& a,
                                     const std::vector<std::vector<double>>& b) {
  const std::size_t n = a.size();
  if (n != b.size()) throw std::invalid_argument("independence_check: unpaired samples");
  if (n < 500) throw std::invalid_argument("independence_check: need at least 500 samples");
  IndependenceCheck c;
  c.samples = n;
  c.threshold = 3.0 / std::sqrt(static_cast<double>(n));
  const std::size_t da = a.front().size(), db = b.front().size();
  if (da == 0 || db == 0) return c;

  auto standardize = [n](const std::vector<std::vector<double>>& rows, std::size_t d) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t t = 0; t < n; ++t) {
      if (rows[t].size() != d) throw std::invalid_argument("independence_check: ragged samples");
      for (std::size_t j = 0; j < d; ++j)
        out(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = rows[t][j];
    }
    out.rowwise() -= out.colwise().mean();
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      const double norm = out.col(j).norm();
      if (norm > 0.0) out.col(j) /= norm;
    }
    return out;
  };
  const Eigen::MatrixXd corr = standardize(a, da).transpose() * standardize(b, db);
  c.max_abs_corr = corr.cwiseAbs().maxCoeff();
  c.pass = c.max_abs_corr < c.threshold;
  return c;
}

SubsetExperiment subset_experiment(const ScalarPrior& prior, std::size_t N, std::size_t M,
                                   std::size_t K, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("subset_experiment: trials must be >= 1");
  if (K == 0 || K > std::min(M, N)) throw std::invalid_argument("subset_experiment: need 1 <= K <= min(M, N)");
  if (N - K > kMaxInterferenceDim)
    throw std::invalid_argument("subset_experiment: N - K exceeds 20");
  std::vector<std::size_t> S(K);
  for (std::size_t k = 0; k < K; ++k) S[k] = k;

  SubsetExperiment ex;
  ex.N = N;
  ex.M = M;
  ex.K = K;
  ex.trials.resize(trials);
  auto to_vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  parallel_for(trials, [&](std::size_t t) {
    const LinearModelInstance inst = generate_instance(prior, N, M, seed, t);
    const std::uint64_t q_seed = RandomStream(seed, t | (std::uint64_t{1} << 62)).next_u64();
    const SubsetDecomposition d = qr_split(inst.A, inst.y, S, q_seed);
    const SubsetResponse r = interference_subtract(d, prior, inst);
    SubsetTrial& tr = ex.trials[t];
    tr.z = to_vec(r.z);
    tr.v = to_vec(r.v);
    tr.x_s.assign(inst.x.begin(), inst.x.begin() + static_cast<std::ptrdiff_t>(K));
    tr.y1 = to_vec(d.y1);
    tr.y2 = to_vec(d.y2);
    tr.w_tilde = to_vec(r.w_tilde);
    tr.identity_residual = r.identity_residual;
    tr.orthogonality_residual = d.orthogonality_residual();
    tr.factorization_residual = d.factorization_residual(inst.A);
  });

  for (const auto& tr : ex.trials) {
    ex.max_identity_residual = std::max(ex.max_identity_residual, tr.identity_residual);
    ex.max_orthogonality_residual = std::max(ex.max_orthogonality_residual, tr.orthogonality_residual);
    ex.max_factorization_residual = std::max(ex.max_factorization_residual, tr.factorization_residual);
  }
  ex.w_tilde_variance.assign(M, 0.0);
  for (const auto& tr : ex.trials)
    for (std::size_t i = 0; i < M; ++i) ex.w_tilde_variance[i] += tr.w_tilde[i] * tr.w_tilde[i];
  for (double& v : ex.w_tilde_variance) v /= static_cast<double>(trials);

  if (trials >= 200) {
    std::vector<double> col(trials);
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t t = 0; t < trials; ++t) col[t] = ex.trials[t].v[k];
      ex.v_diag.push_back(gaussianity_diagnostic(col));
    }
  }
  if (trials >= 500) {
    std::vector<std::vector<double>> xs, y1, y2;
    for (const auto& tr : ex.trials) {
      xs.push_back(tr.x_s);
      y1.push_back(tr.y1);
      y2.push_back(tr.y2);
    }
    ex.independence = independence_check(y2, xs);
    ex.positive_control = independence_check(y1, xs);
  }
  return ex;
}

}  // namespace slm
