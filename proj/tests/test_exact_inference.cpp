#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "slm/exact_inference.hpp"
#include "slm/linear_model.hpp"
#include "slm/rng.hpp"

using slm::ScalarPrior;

namespace {

struct Direct {
  std::vector<double> log_joint;  // log p(u) + log p(y | u, A), unnormalized
  Eigen::VectorXd mean;
  Eigen::MatrixXd second;  // E[x x^T | y]
  double log_evidence;
};

// Enumerates assignments and evaluates the M x M Gaussian density of y
// directly, without the push-through identities used by the library.
Direct direct_oracle(const slm::DenseMatrix& Ad, const std::vector<double>& yv, const ScalarPrior& p) {
  const auto& comps = p.components();
  const std::size_t N = Ad.cols(), M = Ad.rows(), K = comps.size();
  Eigen::MatrixXd A(M, N);
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = 0; j < N; ++j) A(i, j) = Ad(i, j);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(yv.data(), M);
  std::size_t total = 1;
  for (std::size_t n = 0; n < N; ++n) total *= K;
  Direct d;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> seconds;
  for (std::size_t u = 0; u < total; ++u) {
    Eigen::VectorXd m(N);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(N, N);
    double lp = 0.0;
    std::size_t r = u;
    for (std::size_t n = 0; n < N; ++n, r /= K) {
      const auto& c = comps[r % K];
      m(n) = c.mean;
      D(n, n) = c.variance;
      lp += std::log(c.weight);
    }
    const Eigen::MatrixXd S = Eigen::MatrixXd::Identity(M, M) + A * D * A.transpose();
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
    const Eigen::VectorXd res = y - A * m;
    const Eigen::VectorXd Sinv_res = lu.solve(res);
    lp += -0.5 * static_cast<double>(M) * std::log(2.0 * std::numbers::pi) -
          0.5 * std::log(lu.determinant()) - 0.5 * res.dot(Sinv_res);
    d.log_joint.push_back(lp);
    const Eigen::VectorXd mu = m + D * A.transpose() * Sinv_res;
    const Eigen::MatrixXd C = D - D * A.transpose() * lu.solve(A * D);
    means.push_back(mu);
    seconds.push_back(C + mu * mu.transpose());
  }
  double mx = -1e300;
  for (double v : d.log_joint) mx = std::max(mx, v);
  double z = 0.0;
  for (double v : d.log_joint) z += std::exp(v - mx);
  d.log_evidence = mx + std::log(z);
  d.mean = Eigen::VectorXd::Zero(N);
  d.second = Eigen::MatrixXd::Zero(N, N);
  for (std::size_t u = 0; u < total; ++u) {
    const double w = std::exp(d.log_joint[u] - d.log_evidence);
    d.mean += w * means[u];
    d.second += w * seconds[u];
  }
  return d;
}

}  // namespace

TEST_SUITE("exact_inference") {

TEST_CASE("enumeration matches the direct M x M density oracle") {
  const std::vector<ScalarPrior> priors{ScalarPrior::bernoulli_gaussian(0.0, 1.0, 0.3),
                                        ScalarPrior::bernoulli_gaussian(0.5, 4.0, 0.6),
                                        ScalarPrior::finite_atoms({-1.0, 0.5, 2.0}, {0.2, 0.5, 0.3}),
                                        ScalarPrior::gaussian(1.0, 2.0)};
  for (const auto& p : priors) {
    for (auto [N, M] : {std::pair<std::size_t, std::size_t>{2, 3}, {3, 2}, {4, 6}}) {
      CAPTURE(p.to_string());
      CAPTURE(N);
      const auto inst = slm::generate_instance(p, N, M, 21, N * 10 + M);
      const slm::SupportPosterior post(inst.A, inst.y, p);
      const auto d = direct_oracle(inst.A, inst.y, p);
      CHECK(post.log_evidence() == doctest::Approx(d.log_evidence).epsilon(1e-10));
      REQUIRE(post.size() == d.log_joint.size());
      for (std::size_t u = 0; u < post.size(); ++u)
        CHECK(post.log_weights()[u] == doctest::Approx(d.log_joint[u] - d.log_evidence).epsilon(1e-9));
      const auto em = slm::exact_marginals(post);
      const Eigen::MatrixXd cov = d.second - d.mean * d.mean.transpose();
      CHECK((em.mean - d.mean).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((em.covariance - cov).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(std::abs(post.weight_sum() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("zero measurements return the prior") {
  const auto p = ScalarPrior::bernoulli_gaussian(0.0, 2.0, 0.25);
  const slm::DenseMatrix A(3, 3, 0.0);
  const std::vector<double> y{0.3, -1.0, 2.0};
  const slm::SupportPosterior post(A, y, p);
  const auto em = slm::exact_marginals(post);
  for (std::size_t n = 0; n < 3; ++n) {
    CHECK(em.gamma[n] == doctest::Approx(0.25));
    CHECK(em.mean(static_cast<Eigen::Index>(n)) == doctest::Approx(0.0).scale(1.0));
    CHECK(em.variance()(static_cast<Eigen::Index>(n)) == doctest::Approx(0.5));
  }
  for (std::size_t u = 0; u < post.size(); ++u) {
    const auto a = post.assignment(u);
    double w = 1.0;
    for (int k : a) w *= post.prior().components()[static_cast<std::size_t>(k)].weight;
    CHECK(std::exp(post.log_weights()[u]) == doctest::Approx(w));
  }
}

TEST_CASE("dense slab limit is linear-Gaussian") {
  const auto p = ScalarPrior::bernoulli_gaussian(0.0, 1.0, 1.0 - 1e-12);
  const auto g = ScalarPrior::gaussian(0.0, 1.0);
  const auto inst = slm::generate_instance(g, 5, 4, 2, 0);
  const auto em = slm::exact_marginals(slm::SupportPosterior(inst.A, inst.y, p));
  const auto eg = slm::exact_marginals(slm::SupportPosterior(inst.A, inst.y, g));
  CHECK((em.mean - eg.mean).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((em.covariance - eg.covariance).cwiseAbs().maxCoeff() < 1e-9);
  for (double gam : em.gamma) CHECK(gam == doctest::Approx(1.0));
}

TEST_CASE("symmetric prior and sign-flipped data give mirrored posteriors") {
  const auto p = ScalarPrior::finite_atoms({-1.0, 1.0}, {0.5, 0.5});
  const auto inst = slm::generate_instance(p, 4, 5, 6, 0);
  std::vector<double> neg(inst.y);
  for (double& v : neg) v = -v;
  const auto a = slm::exact_marginals(slm::SupportPosterior(inst.A, inst.y, p));
  const auto b = slm::exact_marginals(slm::SupportPosterior(inst.A, neg, p));
  CHECK((a.mean + b.mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.covariance - b.covariance).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Rao-Blackwellized MMSE agrees with squared error") {
  const auto p = ScalarPrior::finite_atoms({-1.0, 1.0}, {0.5, 0.5});
  const std::size_t N = 4, M = 6, T = 3000;
  const auto rb = slm::exact_mmse_mc(p, N, M, T, 12);
  double err = 0.0, err2 = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const auto inst = slm::generate_instance(p, N, M, 99, t);
    const auto em = slm::exact_marginals(slm::SupportPosterior(inst.A, inst.y, p));
    double e = 0.0;
    for (std::size_t n = 0; n < N; ++n) e += std::pow(inst.x[n] - em.mean(Eigen::Index(n)), 2);
    e /= N;
    err += e;
    err2 += e * e;
  }
  err /= T;
  const double se = std::sqrt((err2 / T - err * err) / T);
  CHECK(std::abs(rb.value - err) < 4.0 * std::hypot(se, rb.std_err));
  CHECK(slm::exact_mmse_mc(p, N, 0, 10, 1).value == doctest::Approx(1.0));
}

TEST_CASE("enumeration size guard") {
  const auto p = ScalarPrior::finite_atoms({0.0, 1.0, 2.0}, {0.2, 0.3, 0.5});
  const slm::DenseMatrix A(2, 13);
  const std::vector<double> y(2, 0.0);
  CHECK_THROWS_AS(slm::SupportPosterior(A, y, p), std::invalid_argument);
  CHECK_THROWS_AS(slm::SupportPosterior(A, std::vector<double>(3), ScalarPrior::gaussian(0, 1)),
                  std::invalid_argument);
}

TEST_CASE("ROC curve endpoints and AUC") {
  const std::vector<double> gam{0.9, 0.8, 0.2, 0.1, 0.7, 0.05};
  const std::vector<bool> truth{true, true, false, false, true, false};
  const auto roc = slm::detection_roc(gam, truth, slm::default_roc_thresholds());
  CHECK(roc.front().lambda == 0.0);
  CHECK(roc.front().fpr == 1.0);
  CHECK(roc.front().tpr == 1.0);
  CHECK(roc.back().fpr == 0.0);
  CHECK(roc.back().tpr == 0.0);
  CHECK(slm::roc_auc(roc) == doctest::Approx(1.0));
  for (std::size_t i = 1; i < roc.size(); ++i) {
    CHECK(roc[i].fpr <= roc[i - 1].fpr);
    CHECK(roc[i].tpr <= roc[i - 1].tpr);
  }
  const std::vector<bool> flipped{false, false, true, true, false, true};
  CHECK(slm::roc_auc(slm::detection_roc(gam, flipped, slm::default_roc_thresholds())) ==
        doctest::Approx(0.0));
  const auto none = slm::detection_roc(gam, std::vector<bool>(6, false), std::vector<double>{0.5});
  CHECK(std::isnan(none[0].tpr));
}

TEST_CASE("codebooks") {
  const auto cb = slm::random_power_constrained_codebook(64, 6, 3);
  CHECK(cb.size() == 64);
  CHECK(cb.dimension() == 6);
  CHECK(cb.power() == doctest::Approx(1.0).epsilon(1e-12));

  slm::Codebook single{{{1.0, -1.0, 1.0}}};
  const auto e1 = slm::codebook_mmse_mi(single, 2.0, 50, 1);
  CHECK(e1.mmse.value == doctest::Approx(0.0).scale(1.0));
  CHECK(e1.mi.value == doctest::Approx(0.0).scale(1.0));

  // Antipodal one-dimensional code is the equiprobable binary prior.
  slm::Codebook anti{{{1.0}, {-1.0}}};
  const auto e2 = slm::codebook_mmse_mi(anti, 1.0, 40000, 2);
  const auto bin = ScalarPrior::finite_atoms({-1.0, 1.0}, {0.5, 0.5});
  CHECK(std::abs(e2.mmse.value - slm::scalar_mmse(bin, 1.0)) < 4.0 * e2.mmse.std_err);
  CHECK(std::abs(e2.mi.value - slm::scalar_mi(bin, 1.0)) < 4.0 * e2.mi.std_err);
}

TEST_CASE("good-code bounds") {
  for (double s : {0.0, 0.3, 0.9}) {
    const auto [lo, hi] = slm::good_code_bounds(1.0, 0.0, s);
    CHECK(lo == hi);
    CHECK(hi == doctest::Approx(1.0 / (1.0 + s)));
    const auto [lo2, hi2] = slm::good_code_bounds(1.0, 0.05, s);
    CHECK(lo2 < lo);
    CHECK(hi2 == hi);
  }
  CHECK_THROWS_AS(slm::good_code_bounds(1.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(slm::good_code_bounds(1.0, -0.1, 0.5), std::invalid_argument);
}

}  // TEST_SUITE
