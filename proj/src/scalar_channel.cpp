#include "slm/scalar_channel.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace slm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2 pi)
constexpr double kQuadTol = 1e-14;
constexpr unsigned kQuadDepth = 12;
constexpr std::array<double, 15> kBreakOffsets{-12, -8, -5, -3, -2, -1, -0.5, 0,
                                               0.5, 1,  2,  3,  5,  8,  12};

void require_snr(double s, const char* where) {
  if (!(s >= 0.0) || !std::isfinite(s))
    throw std::invalid_argument(std::string(where) + ": snr must be finite and >= 0");
}

double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;

template <class F>
double adaptive_gk(F& f, double a, double b, double abs_tol, unsigned depth) {
  double err = 0.0;
  const double r = Quad::integrate(f, a, b, 0, 0.0, &err);
  if (err <= abs_tol || depth == 0) return r;
  const double m = 0.5 * (a + b);
  return adaptive_gk(f, a, m, 0.5 * abs_tol, depth - 1) +
         adaptive_gk(f, m, b, 0.5 * abs_tol, depth - 1);
}

// The tolerance is absolute, scaled by a first-pass estimate of the whole
// integral, so intervals carrying negligible mass are not refined.
template <class F>
double integrate_over_y(const ScalarChannel& ch, F&& f) {
  const std::vector<double> bp = ch.integration_breakpoints();
  std::vector<double> coarse(bp.size() - 1);
  std::vector<double> coarse_err(bp.size() - 1);
  double scale = 0.0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    coarse[i] = Quad::integrate(f, bp[i], bp[i + 1], 0, 0.0, &coarse_err[i]);
    scale += std::abs(coarse[i]);
  }
  const double abs_tol = kQuadTol * scale;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    if (coarse_err[i] <= abs_tol)
      total += coarse[i];
    else
      total += adaptive_gk(f, bp[i], bp[i + 1], abs_tol, kQuadDepth);
  }
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// ScalarPrior

ScalarPrior ScalarPrior::gaussian(double mu, double sigma2) {
  ScalarPrior p;
  p.kind_ = PriorKind::Gaussian;
  p.mu_ = mu;
  p.sigma2_ = sigma2;
  p.gamma_ = 1.0;
  p.validate_and_build();
  return p;
}

ScalarPrior ScalarPrior::bernoulli_gaussian(double mu, double sigma2, double gamma) {
  ScalarPrior p;
  p.kind_ = PriorKind::BernoulliGaussian;
  p.mu_ = mu;
  p.sigma2_ = sigma2;
  p.gamma_ = gamma;
  p.validate_and_build();
  return p;
}

ScalarPrior ScalarPrior::finite_atoms(std::vector<double> atoms, std::vector<double> weights) {
  ScalarPrior p;
  p.kind_ = PriorKind::FiniteAtoms;
  p.atoms_ = std::move(atoms);
  p.weights_ = std::move(weights);
  p.validate_and_build();
  return p;
}

void ScalarPrior::validate_and_build() {
  components_.clear();
  switch (kind_) {
    case PriorKind::Gaussian:
      if (!std::isfinite(mu_) || !(sigma2_ >= 0.0) || !std::isfinite(sigma2_))
        throw std::invalid_argument("gaussian prior: need finite mu and sigma2 >= 0");
      components_.push_back({1.0, mu_, sigma2_});
      break;
    case PriorKind::BernoulliGaussian:
      if (!std::isfinite(mu_) || !(sigma2_ >= 0.0) || !std::isfinite(sigma2_))
        throw std::invalid_argument("bg prior: need finite mu and sigma2 >= 0");
      if (!(gamma_ > 0.0 && gamma_ < 1.0))
        throw std::invalid_argument("bg prior: gamma must lie in (0, 1)");
      components_.push_back({1.0 - gamma_, 0.0, 0.0});
      components_.push_back({gamma_, mu_, sigma2_});
      break;
    case PriorKind::FiniteAtoms: {
      if (atoms_.empty() || atoms_.size() != weights_.size())
        throw std::invalid_argument("atoms prior: need equal-length, non-empty atoms and weights");
      double sum = 0.0;
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (!std::isfinite(atoms_[i])) throw std::invalid_argument("atoms prior: non-finite atom");
        if (!(weights_[i] >= 0.0)) throw std::invalid_argument("atoms prior: negative weight");
        sum += weights_[i];
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("atoms prior: weights must sum to 1 (got " + fmt(sum) + ")");
      for (std::size_t i = 0; i < atoms_.size(); ++i)
        if (weights_[i] > 0.0) components_.push_back({weights_[i], atoms_[i], 0.0});
      mu_ = 0.0;
      sigma2_ = 0.0;
      gamma_ = 1.0;
      break;
    }
  }
}

std::string ScalarPrior::to_string() const {
  switch (kind_) {
    case PriorKind::Gaussian: return "gaussian:" + fmt(mu_) + "," + fmt(sigma2_);
    case PriorKind::BernoulliGaussian:
      return "bg:" + fmt(mu_) + "," + fmt(sigma2_) + "," + fmt(gamma_);
    case PriorKind::FiniteAtoms: {
      std::string out = "atoms:";
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (i) out += ",";
        out += fmt(atoms_[i]) + ":" + fmt(weights_[i]);
      }
      return out;
    }
  }
  return {};
}

namespace {

double parse_number(std::string_view text, std::string_view spec) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw std::invalid_argument("prior '" + std::string(spec) + "': bad number '" +
                                std::string(text) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

}  // namespace

ScalarPrior parse_prior(std::string_view spec) {
  const std::size_t colon = spec.find(':');
  if (colon == std::string_view::npos)
    throw std::invalid_argument("prior '" + std::string(spec) + "': expected kind:parameters");
  const std::string_view kind = spec.substr(0, colon);
  const auto parts = split(spec.substr(colon + 1), ',');
  std::vector<double> nums;
  if (kind == "gaussian" || kind == "bg") {
    for (auto p : parts) nums.push_back(parse_number(p, spec));
    if (kind == "gaussian") {
      if (nums.size() != 2) throw std::invalid_argument("prior 'gaussian' takes mu,sigma2");
      return ScalarPrior::gaussian(nums[0], nums[1]);
    }
    if (nums.size() != 3) throw std::invalid_argument("prior 'bg' takes mu,sigma2,gamma");
    return ScalarPrior::bernoulli_gaussian(nums[0], nums[1], nums[2]);
  }
  if (kind == "atoms") {
    std::vector<double> atoms, weights;
    for (auto p : parts) {
      const auto aw = split(p, ':');
      if (aw.size() != 2)
        throw std::invalid_argument("prior 'atoms' takes value:weight pairs separated by commas");
      atoms.push_back(parse_number(aw[0], spec));
      weights.push_back(parse_number(aw[1], spec));
    }
    return ScalarPrior::finite_atoms(std::move(atoms), std::move(weights));
  }
  throw std::invalid_argument("prior '" + std::string(spec) + "': unknown kind '" +
                              std::string(kind) + "' (gaussian, bg, atoms)");
}

PriorMoments prior_moments(const ScalarPrior& prior) {
  double mean = 0.0;
  for (const auto& c : prior.components()) mean += c.weight * c.mean;
  double var = 0.0;
  double m4 = 0.0;
  for (const auto& c : prior.components()) {
    const double d = c.mean - mean;
    var += c.weight * (c.variance + d * d);
    const double m2 = c.mean * c.mean;
    m4 += c.weight * (m2 * m2 + 6.0 * m2 * c.variance + 3.0 * c.variance * c.variance);
  }
  return {mean, var, m4};
}

double sample(const ScalarPrior& prior, RandomStream& rng) {
  switch (prior.kind()) {
    case PriorKind::Gaussian: return rng.normal(prior.mu(), std::sqrt(prior.sigma2()));
    case PriorKind::BernoulliGaussian:
      if (rng.uniform() < prior.gamma()) return rng.normal(prior.mu(), std::sqrt(prior.sigma2()));
      return 0.0;
    case PriorKind::FiniteAtoms: {
      const double u = rng.uniform();
      double acc = 0.0;
      const auto& comps = prior.components();
      for (const auto& c : comps) {
        acc += c.weight;
        if (u < acc) return c.mean;
      }
      return comps.back().mean;
    }
  }
  return 0.0;
}

BGPosteriorParams bg_posterior_update(const ScalarPrior& prior, double s, double y) {
  if (prior.kind() != PriorKind::BernoulliGaussian)
    throw std::invalid_argument("bg_posterior_update: prior is not Bernoulli-Gaussian");
  require_snr(s, "bg_posterior_update");
  const double mu = prior.mu();
  const double sig2 = prior.sigma2();
  const double g = prior.gamma();
  if (s == 0.0) return {mu, sig2, g};

  const double rs = std::sqrt(s);
  const double denom = 1.0 + s * sig2;
  const double mu_n = (mu + rs * sig2 * y) / denom;
  const double sigma2_n = sig2 / denom;
  // log-odds of spike versus slab
  const double log_odds = std::log((1.0 - g) / g) + 0.5 * std::log(denom) +
                          (s * mu * mu - 2.0 * rs * mu * y - s * sig2 * y * y) / (2.0 * denom);
  return {mu_n, sigma2_n, logistic(-log_odds)};
}

// ---------------------------------------------------------------------------
// ScalarChannel

ScalarChannel::ScalarChannel(const ScalarPrior& prior, double snr) : snr_(snr) {
  require_snr(snr, "ScalarChannel");
  const double rs = std::sqrt(snr);
  terms_.reserve(prior.components().size());
  for (const auto& c : prior.components()) {
    const double var_y = 1.0 + snr * c.variance;
    Term t{};
    t.log_weight_norm = std::log(c.weight) - 0.5 * (kLog2Pi + std::log(var_y));
    t.center = rs * c.mean;
    t.half_inv_var = 0.5 / var_y;
    t.var_y = var_y;
    t.mean_prior = c.mean;
    t.gain = rs * c.variance / var_y;
    t.post_var = c.variance / var_y;
    terms_.push_back(t);
  }
}

void ScalarChannel::responsibilities(double y, std::span<double> out) const {
  if (out.size() != terms_.size())
    throw std::invalid_argument("responsibilities: output size mismatch");
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < terms_.size(); ++c) {
    out[c] = log_term(terms_[c], y);
    mx = std::max(mx, out[c]);
  }
  double z = 0.0;
  for (double& v : out) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : out) v /= z;
}

PosteriorMoments ScalarChannel::posterior(double y) const {
  const std::size_t k = terms_.size();
  if (k == 1) {
    const Term& t = terms_[0];
    return {t.mean_prior + t.gain * (y - t.center), t.post_var};
  }
  std::array<double, 16> small{};
  std::vector<double> large;
  double* r = small.data();
  if (k > small.size()) {
    large.resize(k);
    r = large.data();
  }
  responsibilities(y, std::span<double>(r, k));

  double mean = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const Term& t = terms_[c];
    mean += r[c] * (t.mean_prior + t.gain * (y - t.center));
  }
  double var = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const Term& t = terms_[c];
    const double d = t.mean_prior + t.gain * (y - t.center) - mean;
    var += r[c] * (t.post_var + d * d);
  }
  return {mean, var};
}

double ScalarChannel::log_marginal_density(double y) const {
  double mx = -std::numeric_limits<double>::infinity();
  for (const Term& t : terms_) mx = std::max(mx, log_term(t, y));
  double z = 0.0;
  for (const Term& t : terms_) z += std::exp(log_term(t, y) - mx);
  return mx + std::log(z);
}

std::vector<double> ScalarChannel::integration_breakpoints() const {
  std::vector<double> bp;
  bp.reserve(terms_.size() * kBreakOffsets.size());
  for (const Term& t : terms_) {
    const double sd = std::sqrt(t.var_y);
    for (double j : kBreakOffsets) bp.push_back(t.center + j * sd);
  }
  std::sort(bp.begin(), bp.end());
  std::vector<double> out;
  out.reserve(bp.size());
  for (double b : bp)
    if (out.empty() || b - out.back() > 1e-12 * std::max(1.0, std::abs(b))) out.push_back(b);
  return out;
}

// ---------------------------------------------------------------------------
// Functionals

double scalar_mmse(const ScalarPrior& prior, double s) {
  require_snr(s, "scalar_mmse");
  const PriorMoments mom = prior_moments(prior);
  if (s == 0.0 || mom.variance == 0.0) return mom.variance;
  if (prior.kind() == PriorKind::Gaussian) return prior.sigma2() / (1.0 + s * prior.sigma2());

  const ScalarChannel ch(prior, s);
  const double m = integrate_over_y(ch, [&](double y) {
    const double lp = ch.log_marginal_density(y);
    if (lp < -745.0) return 0.0;
    return std::exp(lp) * ch.posterior(y).variance;
  });
  if (!std::isfinite(m)) throw NumericalError("scalar_mmse: non-finite result at s=" + fmt(s));
  return std::clamp(m, 0.0, mom.variance);
}

double scalar_mi(const ScalarPrior& prior, double s) {
  require_snr(s, "scalar_mi");
  if (s == 0.0) return 0.0;
  if (prior.kind() == PriorKind::Gaussian) return 0.5 * std::log1p(s * prior.sigma2());

  const ScalarChannel ch(prior, s);
  // h(Y) - h(W)
  const double hy = integrate_over_y(ch, [&](double y) {
    const double lp = ch.log_marginal_density(y);
    if (lp < -745.0) return 0.0;
    return -std::exp(lp) * lp;
  });
  const double mi = hy - 0.5 * (kLog2Pi + 1.0);
  if (!std::isfinite(mi)) throw NumericalError("scalar_mi: non-finite result at s=" + fmt(s));
  return std::max(mi, 0.0);
}

ScalarFunctionals scalar_functionals(const ScalarPrior& prior, double s) {
  return {scalar_mi(prior, s), scalar_mmse(prior, s)};
}

double k_transform(const ScalarPrior& prior, double s) {
  if (!(s > 0.0) || !std::isfinite(s))
    throw std::invalid_argument("k_transform: snr must be finite and > 0");
  if (prior_moments(prior).variance == 0.0)
    throw std::invalid_argument("k_transform: prior is almost surely constant");
  const double m = scalar_mmse(prior, s);
  if (!(m > 0.0)) throw NumericalError("k_transform: mmse underflowed to 0 at s=" + fmt(s));
  return 1.0 / m - s;
}

double check_immse(const ScalarPrior& prior, std::span<const double> s_grid, double step) {
  if (s_grid.size() < 3) throw std::invalid_argument("check_immse: need at least 3 grid points");
  if (!(step > 0.0)) throw std::invalid_argument("check_immse: step must be > 0");
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    require_snr(s_grid[i], "check_immse");
    if (i && !(s_grid[i] > s_grid[i - 1]))
      throw std::invalid_argument("check_immse: grid must be strictly ascending");
  }
  double worst = 0.0;
  for (double s : s_grid) {
    double deriv;
    if (s >= step) {
      deriv = (scalar_mi(prior, s + step) - scalar_mi(prior, s - step)) / (2.0 * step);
    } else {
      deriv = (-3.0 * scalar_mi(prior, s) + 4.0 * scalar_mi(prior, s + step) -
               scalar_mi(prior, s + 2.0 * step)) /
              (2.0 * step);
    }
    worst = std::max(worst, std::abs(deriv - 0.5 * scalar_mmse(prior, s)));
  }
  return worst;
}

ScalarCurve scalar_curve(const ScalarPrior& prior, std::span<const double> s_grid) {
  ScalarCurve out;
  out.s.assign(s_grid.begin(), s_grid.end());
  out.I.reserve(s_grid.size());
  out.M.reserve(s_grid.size());
  for (double s : s_grid) {
    out.I.push_back(scalar_mi(prior, s));
    out.M.push_back(scalar_mmse(prior, s));
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo) || n == 0)
    throw std::invalid_argument("log_grid: need 0 < lo <= hi and n > 0");
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  if (!(hi >= lo) || n == 0) throw std::invalid_argument("linear_grid: need lo <= hi and n > 0");
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  for (std::size_t i = 0; i < n; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  g.back() = hi;
  return g;
}

}  // namespace slm
