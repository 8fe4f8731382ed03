#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "slm/linear_model.hpp"
#include "slm/rng.hpp"
#include "slm/subset_response.hpp"

using slm::ScalarPrior;

namespace {

Eigen::MatrixXd to_eigen(const slm::DenseMatrix& A) {
  Eigen::MatrixXd E(A.rows(), A.cols());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) E(i, j) = A(i, j);
  return E;
}

const ScalarPrior kBinary = ScalarPrior::finite_atoms({-1.0, 1.0}, {0.5, 0.5});

}  // namespace

TEST_SUITE("subset_response") {

TEST_CASE("QR split structure") {
  const auto inst = slm::generate_instance(kBinary, 9, 12, 4, 0);
  const std::vector<std::size_t> S{5, 1, 7};
  const auto d = slm::qr_split(inst.A, inst.y, S, 3);
  const auto A = to_eigen(inst.A);
  CHECK(d.K() == 3);
  CHECK(d.Sc == std::vector<std::size_t>{0, 2, 3, 4, 6, 8});
  CHECK(d.orthogonality_residual() < 1e-12);
  CHECK(d.factorization_residual(inst.A) < 1e-12);
  for (int i = 0; i < 3; ++i) {
    CHECK(d.R(i, i) > 0.0);
    for (int j = 0; j < i; ++j) CHECK(d.R(i, j) == 0.0);
  }
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(inst.y.data(), 12);
  CHECK((d.y1 - d.Q1.transpose() * y).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((d.y2 - d.Q2.transpose() * y).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::MatrixXd ASc(12, d.Sc.size());
  for (std::size_t j = 0; j < d.Sc.size(); ++j) ASc.col(static_cast<Eigen::Index>(j)) = A.col(static_cast<Eigen::Index>(d.Sc[j]));
  CHECK((d.B1 - d.Q1.transpose() * ASc).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((d.B2 - d.Q2.transpose() * ASc).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((d.Q2.transpose() * A.col(5)).cwiseAbs().maxCoeff() < 1e-12);

  // Q2 is random, its range is not.
  const auto e = slm::qr_split(inst.A, inst.y, S, 99);
  CHECK((d.Q2 - e.Q2).cwiseAbs().maxCoeff() > 1e-3);
  CHECK((d.Q2 * d.Q2.transpose() - e.Q2 * e.Q2.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((d.Q1 - e.Q1).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("QR split argument validation") {
  const auto inst = slm::generate_instance(kBinary, 6, 4, 1, 0);
  const std::vector<std::size_t> rep{1, 1}, out{6}, big{0, 1, 2, 3, 4};
  CHECK_THROWS_AS(slm::qr_split(inst.A, inst.y, rep, 1), std::invalid_argument);
  CHECK_THROWS_AS(slm::qr_split(inst.A, inst.y, out, 1), std::invalid_argument);
  CHECK_THROWS_AS(slm::qr_split(inst.A, inst.y, big, 1), std::invalid_argument);
  CHECK_THROWS_AS(slm::qr_split(inst.A, inst.y, std::vector<std::size_t>{}, 1), std::invalid_argument);
  slm::DenseMatrix Z(4, 6, 0.0);
  CHECK_THROWS_AS(slm::qr_split(Z, inst.y, std::vector<std::size_t>{0}, 1), std::invalid_argument);
}

TEST_CASE("interference subtraction") {
  const auto inst = slm::generate_instance(kBinary, 8, 12, 5, 2);
  const std::vector<std::size_t> S{0, 3};
  const auto d = slm::qr_split(inst.A, inst.y, S, 8);
  const auto r = slm::interference_subtract(d, kBinary, inst);
  CHECK(r.identity_residual < 1e-12);
  Eigen::VectorXd xs(2);
  xs << inst.x[0], inst.x[3];
  CHECK((r.z - d.R * xs - r.v).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(inst.w.data(), 12);
  CHECK((r.w_tilde - d.Q().transpose() * w).cwiseAbs().maxCoeff() < 1e-12);

  // Without interference Z is R x_S plus the rotated noise.
  const auto full = slm::generate_instance(kBinary, 3, 5, 5, 3);
  const std::vector<std::size_t> all{0, 1, 2};
  const auto df = slm::qr_split(full.A, full.y, all, 1);
  const auto rf = slm::interference_subtract(df, kBinary, full);
  CHECK(rf.x_sc_mean.size() == 0);
  CHECK((rf.v - rf.w_tilde.head(3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Gaussianity diagnostic") {
  slm::RandomStream rng(2, 2);
  std::vector<double> g(5000), u(5000);
  for (double& v : g) v = 1.0 + 2.0 * rng.normal();
  for (double& v : u) v = rng.uniform();
  const auto dg = slm::gaussianity_diagnostic(g);
  CHECK(dg.consistent_with_normal);
  CHECK(dg.mean == doctest::Approx(1.0).epsilon(0.1));
  CHECK(dg.variance == doctest::Approx(4.0).epsilon(0.1));
  CHECK(dg.ks_distance < 1.63 / std::sqrt(5000.0));
  const auto du = slm::gaussianity_diagnostic(u);
  CHECK_FALSE(du.consistent_with_normal);
  CHECK(du.excess_kurtosis == doctest::Approx(-1.2).epsilon(0.1));
  CHECK_THROWS_AS(slm::gaussianity_diagnostic(std::vector<double>(100)), std::invalid_argument);
}

TEST_CASE("independence check") {
  slm::RandomStream rng(3, 3);
  std::vector<std::vector<double>> a(2000), b(2000), c(2000);
  for (std::size_t t = 0; t < 2000; ++t) {
    a[t] = {rng.normal(), rng.normal()};
    b[t] = {rng.normal()};
    c[t] = {a[t][1] + 0.5 * rng.normal()};
  }
  const auto ind = slm::independence_check(a, b);
  CHECK(ind.pass);
  CHECK(ind.threshold == doctest::Approx(3.0 / std::sqrt(2000.0)));
  const auto dep = slm::independence_check(a, c);
  CHECK_FALSE(dep.pass);
  CHECK(dep.max_abs_corr > 0.8);
  CHECK(slm::independence_check(std::vector<std::vector<double>>(600, std::vector<double>{}),
                                std::vector<std::vector<double>>(600, std::vector<double>{1.0}))
            .pass);
  CHECK_THROWS_AS(slm::independence_check(std::vector<std::vector<double>>(10, {1.0}),
                                          std::vector<std::vector<double>>(10, {1.0})),
                  std::invalid_argument);
}

TEST_CASE("subset experiment") {
  const auto ex = slm::subset_experiment(kBinary, 8, 12, 2, 600, 4);
  CHECK(ex.trials.size() == 600);
  CHECK(ex.max_identity_residual < 1e-10);
  CHECK(ex.max_orthogonality_residual < 1e-10);
  CHECK(ex.max_factorization_residual < 1e-10);
  REQUIRE(ex.w_tilde_variance.size() == 12);
  for (double v : ex.w_tilde_variance) CHECK(std::abs(v - 1.0) < 5.0 * std::sqrt(2.0 / 600));
  CHECK(ex.v_diag.size() == 2);
  CHECK(ex.positive_control.max_abs_corr > ex.positive_control.threshold);
  const auto again = slm::subset_experiment(kBinary, 8, 12, 2, 600, 4);
  CHECK(again.trials[17].z == ex.trials[17].z);
  CHECK_THROWS_AS(slm::subset_experiment(kBinary, 30, 40, 2, 10, 1), std::invalid_argument);
}

}  // TEST_SUITE
