#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "slm/rng.hpp"
#include "slm/scalar_channel.hpp"

using slm::ScalarPrior;

namespace {

struct Oracle {
  double mmse;
  double mi;
};

// Brute-force trapezoid integration over y of the mixture marginal. Shares no
// code with the library's quadrature or posterior routines.
Oracle trapezoid_oracle(const std::vector<slm::MixtureComponent>& comps, double s) {
  const double rs = std::sqrt(s);
  double max_sd = 1.0, lo = 0.0, hi = 0.0, ex2 = 0.0;
  for (const auto& c : comps) {
    const double sd = std::sqrt(1.0 + s * c.variance);
    max_sd = std::max(max_sd, sd);
    lo = std::min(lo, rs * c.mean - 14.0 * sd);
    hi = std::max(hi, rs * c.mean + 14.0 * sd);
    ex2 += c.weight * (c.variance + c.mean * c.mean);
  }
  const double h = 0.004;
  const auto n = static_cast<std::size_t>((hi - lo) / h) + 1;
  double acc_m2 = 0.0, acc_ent = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double y = lo + h * static_cast<double>(i);
    double p = 0.0, num = 0.0;
    for (const auto& c : comps) {
      const double v = 1.0 + s * c.variance;
      const double d = y - rs * c.mean;
      const double pc = c.weight * std::exp(-0.5 * d * d / v) / std::sqrt(2.0 * std::numbers::pi * v);
      p += pc;
      num += pc * (c.mean + rs * c.variance / v * d);
    }
    const double wt = (i == 0 || i == n) ? 0.5 * h : h;
    if (p > 0.0) {
      acc_m2 += wt * num * num / p;
      acc_ent -= wt * p * std::log(p);
    }
  }
  return {ex2 - acc_m2, acc_ent - 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e)};
}

std::vector<ScalarPrior> builtin_priors() {
  return {ScalarPrior::gaussian(0.0, 1.0),
          ScalarPrior::gaussian(1.5, 4.0),
          ScalarPrior::bernoulli_gaussian(0.0, 1.0, 0.2),
          ScalarPrior::bernoulli_gaussian(0.0, 1.0, 0.5),
          ScalarPrior::bernoulli_gaussian(0.0, 1e6, 0.2),
          ScalarPrior::bernoulli_gaussian(2.0, 0.5, 0.7),
          ScalarPrior::finite_atoms({-1.0, 1.0}, {0.5, 0.5}),
          ScalarPrior::finite_atoms({0.0, 1.0, 3.0}, {0.6, 0.3, 0.1})};
}

}  // namespace

TEST_SUITE("scalar_channel") {

TEST_CASE("Gaussian prior closed forms") {
  for (double s2 : {0.25, 1.0, 7.0}) {
    const auto p = ScalarPrior::gaussian(0.3, s2);
    for (double s : {0.0, 1e-4, 0.1, 1.0, 10.0, 1e3}) {
      CAPTURE(s2);
      CAPTURE(s);
      CHECK(std::abs(slm::scalar_mmse(p, s) - s2 / (1.0 + s * s2)) <= 1e-9);
      CHECK(std::abs(slm::scalar_mi(p, s) - 0.5 * std::log1p(s * s2)) <= 1e-9);
    }
  }
}

TEST_CASE("mixture functionals match a brute-force trapezoid oracle") {
  const std::vector<double> snrs{0.01, 0.3, 1.0, 2.0, 8.0};
  for (const auto& p : builtin_priors()) {
    for (double s : snrs) {
      CAPTURE(p.to_string());
      CAPTURE(s);
      const auto o = trapezoid_oracle(p.components(), s);
      const auto f = slm::scalar_functionals(p, s);
      const double var = slm::prior_moments(p).variance;
      CHECK(std::abs(f.mmse - o.mmse) <= 1e-8 * std::max(1.0, var));
      CHECK(std::abs(f.mi - o.mi) <= 1e-8);
    }
  }
}

TEST_CASE("reference values") {
  const auto bg = ScalarPrior::bernoulli_gaussian(0.0, 1.0, 0.5);
  CHECK(slm::scalar_mmse(bg, 2.0) == doctest::Approx(0.232240889781937).epsilon(1e-10));
  CHECK(slm::scalar_mi(bg, 1.0) == doctest::Approx(0.200793739573493).epsilon(1e-10));
  const auto pm = ScalarPrior::finite_atoms({-1.0, 1.0}, {0.5, 0.5});
  CHECK(slm::scalar_mmse(pm, 1.0) == doctest::Approx(0.449599509206673).epsilon(1e-10));
  CHECK(slm::scalar_mi(pm, 1.0) == doctest::Approx(0.336830820346831).epsilon(1e-10));
}

TEST_CASE("endpoints and limits") {
  for (const auto& p : builtin_priors()) {
    CAPTURE(p.to_string());
    const auto mom = slm::prior_moments(p);
    CHECK(slm::scalar_mmse(p, 0.0) == doctest::Approx(mom.variance).epsilon(1e-12));
    CHECK(slm::scalar_mi(p, 0.0) == 0.0);
    CHECK(slm::scalar_mmse(p, 1e4) <= 1.0 / 1e4 + 1e-12);
  }
  // Discrete priors: I(s) tends to the entropy.
  const auto pm = ScalarPrior::finite_atoms({-1.0, 1.0}, {0.5, 0.5});
  CHECK(slm::scalar_mi(pm, 200.0) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK_THROWS_AS(slm::scalar_mmse(pm, -1.0), std::invalid_argument);
}

TEST_CASE("I-MMSE relation on fine grids") {
  for (const auto& p : builtin_priors()) {
    if (slm::prior_moments(p).variance > 100.0) continue;
    CAPTURE(p.to_string());
    const auto grid = slm::linear_grid(0.0, 2.0, 41);
    CHECK(slm::check_immse(p, grid) < 1e-5);
  }
}

TEST_CASE("MMSE decreasing, MI increasing and concave") {
  const auto grid = slm::log_grid(1e-3, 50.0, 60);
  for (const auto& p : builtin_priors()) {
    CAPTURE(p.to_string());
    const auto c = slm::scalar_curve(p, grid);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      CHECK(c.M[i] <= c.M[i - 1] * (1.0 + 1e-12));
      CHECK(c.I[i] >= c.I[i - 1] - 1e-12);
    }
  }
}

TEST_CASE("k-transform is non-decreasing and constant for Gaussians") {
  const auto g = ScalarPrior::gaussian(0.0, 2.0);
  for (double s : {0.1, 1.0, 5.0}) CHECK(slm::k_transform(g, s) == doctest::Approx(0.5).epsilon(1e-9));
  for (const auto& p : builtin_priors()) {
    CAPTURE(p.to_string());
    const auto grid = slm::log_grid(1e-3, 20.0, 50);
    double prev = -1e300;
    for (double s : grid) {
      const double k = slm::k_transform(p, s);
      CHECK(k >= prev - 1e-6 * std::max(1.0, std::abs(prev)));
      prev = k;
    }
  }
}

TEST_CASE("Monte Carlo posterior error matches the MMSE") {
  const auto p = ScalarPrior::bernoulli_gaussian(0.0, 1.0, 0.3);
  const double s = 1.7;
  const slm::ScalarChannel ch(p, s);
  slm::RandomStream rng(3, 0);
  const int n = 200000;
  double err = 0.0, err2 = 0.0, pv = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = slm::sample(p, rng);
    const auto pm = ch.posterior(std::sqrt(s) * x + rng.normal());
    const double e = (x - pm.mean) * (x - pm.mean);
    err += e;
    err2 += e * e;
    pv += pm.variance;
  }
  err /= n, err2 /= n, pv /= n;
  const double se = std::sqrt((err2 - err * err) / n);
  const double m = slm::scalar_mmse(p, s);
  CHECK(std::abs(err - m) < 4.0 * se);
  CHECK(std::abs(pv - m) < 4.0 * se);
}

TEST_CASE("closed-form BG posterior agrees with the generic channel") {
  const auto p = ScalarPrior::bernoulli_gaussian(0.4, 2.5, 0.15);
  for (double s : {0.05, 1.0, 30.0}) {
    const slm::ScalarChannel ch(p, s);
    for (double y : {-40.0, -3.0, 0.0, 0.7, 5.0, 60.0}) {
      const auto bg = slm::bg_posterior_update(p, s, y);
      const auto pm = ch.posterior(y);
      CHECK(bg.gamma_n >= 0.0);
      CHECK(bg.gamma_n <= 1.0);
      CHECK(bg.mean() == doctest::Approx(pm.mean).epsilon(1e-10).scale(1.0));
      CHECK(bg.variance() == doctest::Approx(pm.variance).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("priors validate, round-trip and sample with the right moments") {
  CHECK_THROWS_AS(ScalarPrior::gaussian(0.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(ScalarPrior::bernoulli_gaussian(0.0, 1.0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(ScalarPrior::finite_atoms({0.0, 1.0}, {0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(slm::parse_prior("laplace:1"), std::invalid_argument);
  CHECK_THROWS_AS(slm::parse_prior("bg:0,1"), std::invalid_argument);
  CHECK_THROWS_AS(slm::parse_prior("atoms:1:x"), std::invalid_argument);

  for (const auto& p : builtin_priors()) {
    const auto q = slm::parse_prior(p.to_string());
    CHECK(q.to_string() == p.to_string());
    CHECK(slm::scalar_mmse(q, 0.7) == slm::scalar_mmse(p, 0.7));
  }
  const auto p = slm::parse_prior("bg:1,4,0.25");
  const auto mom = slm::prior_moments(p);
  CHECK(mom.mean == doctest::Approx(0.25));
  CHECK(mom.variance == doctest::Approx(0.25 * 5.0 - 0.0625));
  slm::RandomStream rng(8, 1);
  double m1 = 0.0, m2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = slm::sample(p, rng);
    m1 += x;
    m2 += x * x;
  }
  m1 /= n;
  CHECK(std::abs(m1 - mom.mean) < 5.0 * std::sqrt(mom.variance / n));
  CHECK(std::abs(m2 / n - m1 * m1 - mom.variance) < 0.05);
}

TEST_CASE("grids") {
  const auto g = slm::log_grid(1e-3, 10.0, 5);
  CHECK(g.front() == doctest::Approx(1e-3));
  CHECK(g.back() == doctest::Approx(10.0));
  CHECK(g[2] == doctest::Approx(0.1));
  const auto l = slm::linear_grid(0.0, 1.0, 3);
  CHECK(l[1] == 0.5);
}

}  // TEST_SUITE
