#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "slm/amp.hpp"
#include "slm/exact_inference.hpp"
#include "slm/info_sequences.hpp"
#include "slm/linear_model.hpp"
#include "slm/parallel.hpp"
#include "slm/replica.hpp"
#include "slm/rng.hpp"
#include "slm/scalar_channel.hpp"
#include "slm/subset_response.hpp"

namespace slmtk {

using slm::CsvWriter;

void RunContext::write(const std::string& name, const std::string& content) {
  slm::write_file_atomic(out_dir / name, content);
  artifacts.push_back(name);
}

namespace {

constexpr std::size_t kFullSizeN = 10000;

std::size_t count(const Config& c, const std::string& key, std::int64_t min) {
  const std::int64_t v = c.get_int(key);
  if (v < min) throw ConfigError(key + " must be >= " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

double real_in(const Config& c, const std::string& key, double lo, double hi, bool open_lo = false) {
  const double v = c.get_real(key);
  const bool ok = std::isfinite(v) && (open_lo ? v > lo : v >= lo) && v <= hi;
  if (!ok)
    throw ConfigError(key + " must lie in " + std::string(open_lo ? "(" : "[") +
                      slm::format_double(lo) + ", " + slm::format_double(hi) + "]");
  return v;
}

std::size_t dimension(const Config& c) {
  if (c.get_bool("full_size") && !c.is_set("N")) return kFullSizeN;
  return count(c, "N", 1);
}

slm::AMPOptions amp_options(const Config& c) {
  slm::AMPOptions o;
  o.damping = c.get_real("damping");
  if (!(o.damping >= 0.0 && o.damping < 1.0)) throw ConfigError("damping must lie in [0, 1)");
  o.max_iter = count(c, "max_iter", 1);
  o.tol = real_in(c, "tol", 0.0, 1.0, true);
  return o;
}

std::vector<KeySpec> amp_keys() {
  return {{"damping", KeyType::Real, "0", "AMP damping in [0, 1)"},
          {"max_iter", KeyType::Int, "200", "AMP iteration cap"},
          {"tol", KeyType::Real, "1e-8", "AMP relative-change stopping tolerance"}};
}

std::string bg_default() { return "bg:0,1e6,0.2"; }
std::string binary_default() { return "atoms:-1:0.5,1:0.5"; }

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------

void cmd_scalar_curve(const Config& c, RunContext& ctx) {
  const auto prior = c.get_prior("prior");
  const std::size_t N = dimension(c);
  const double lo = real_in(c, "s_lo", 0.0, 1e12, true);
  const double hi = real_in(c, "s_hi", lo, 1e12);
  const std::size_t points = count(c, "s_points", 2);
  const std::uint64_t seed = c.get_u64("seed");

  const auto grid = slm::log_grid(lo, hi, points);
  slm::RandomStream rng(seed, 0);
  std::vector<double> x(N), w(N);
  for (double& v : x) v = slm::sample(prior, rng);
  rng.fill_normal(w);

  std::vector<std::vector<double>> rows(points);
  slm::parallel_for(points, [&](std::size_t i) {
    const double s = grid[i];
    const slm::ScalarChannel ch(prior, s);
    const double rs = std::sqrt(s);
    double err = 0.0, var = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      const auto pm = ch.posterior(rs * x[n] + w[n]);
      err += (x[n] - pm.mean) * (x[n] - pm.mean);
      var += pm.variance;
    }
    const auto f = slm::scalar_functionals(prior, s);
    rows[i] = {s, err / static_cast<double>(N), var / static_cast<double>(N), f.mmse, f.mi};
  });

  CsvWriter curve({"s", "avg_sq_err", "avg_post_var", "avg_mmse"});
  CsvWriter funcs({"s", "I", "M"});
  for (const auto& r : rows) {
    curve.row({r[0], r[1], r[2], r[3]});
    funcs.row({r[0], r[4], r[3]});
  }
  ctx.write_csv("scalar_curve.csv", curve);
  ctx.write_csv("scalar_functions.csv", funcs);
  ctx.results["N"] = N;
  ctx.results["prior_variance"] = slm::prior_moments(prior).variance;
}

void cmd_slm_sweep(const Config& c, RunContext& ctx) {
  const auto prior = c.get_prior("prior");
  const std::size_t N = dimension(c);
  const double dlo = real_in(c, "delta_lo", 0.0, 100.0);
  const double dhi = real_in(c, "delta_hi", dlo, 100.0, true);
  const std::size_t points = count(c, "delta_points", 2);
  const auto opts = amp_options(c);
  const std::uint64_t seed = c.get_u64("seed");

  const auto deltas = slm::linear_grid(dlo, dhi, points);
  std::vector<std::size_t> m_obs(points);
  for (std::size_t i = 0; i < points; ++i)
    m_obs[i] = static_cast<std::size_t>(std::llround(deltas[i] * static_cast<double>(N)));
  const std::size_t m_max = *std::max_element(m_obs.begin(), m_obs.end());
  const auto inst = slm::generate_instance(prior, N, m_max, seed, 0);
  const auto mom = slm::prior_moments(prior);

  double min_pos = dhi;
  for (auto m : m_obs)
    if (m > 0) min_pos = std::min(min_pos, static_cast<double>(m) / static_cast<double>(N));
  const slm::ReplicaSolver solver(prior, min_pos, std::max(min_pos, dhi));

  struct Row {
    double err, var, replica;
    bool converged, diverged;
  };
  std::vector<Row> rows(points);
  slm::parallel_for(points, [&](std::size_t i) {
    const std::size_t M = m_obs[i];
    if (M == 0) {
      double err = 0.0;
      for (double xn : inst.x) err += (xn - mom.mean) * (xn - mom.mean);
      rows[i] = {err / static_cast<double>(N), mom.variance, mom.variance, true, false};
      return;
    }
    const auto sub = slm::first_rows(inst, M);
    const auto out = slm::amp_run(sub, prior, opts);
    const auto d = slm::amp_diagnostics(out, sub.x);
    const double delta = static_cast<double>(M) / static_cast<double>(N);
    rows[i] = {d.avg_sq_error, d.avg_post_var, solver.solve(delta).M_delta, out.converged,
               out.diverged};
  });

  CsvWriter csv({"M_obs", "amp_sq_err", "amp_post_var", "replica_mmse"});
  Json flags = Json::array();
  for (std::size_t i = 0; i < points; ++i) {
    csv.row({m_obs[i], rows[i].err, rows[i].var, rows[i].replica});
    flags.push_back({{"M_obs", m_obs[i]}, {"converged", rows[i].converged}, {"diverged", rows[i].diverged}});
  }
  ctx.write_csv("slm_sweep.csv", csv);
  ctx.results["N"] = N;
  ctx.results["rows"] = flags;
  if (auto pt = slm::locate_phase_transition(prior, std::max(min_pos, 1e-3), std::max(dhi, 1e-2))) {
    ctx.results["delta_star"] = pt->delta_star;
    ctx.results["delta_alg"] = pt->delta_alg;
  }
}

void cmd_roc(const Config& c, RunContext& ctx) {
  const auto prior = c.get_prior("prior");
  if (prior.kind() != slm::PriorKind::BernoulliGaussian)
    throw ConfigError("roc needs a Bernoulli-Gaussian prior");
  const std::size_t N = dimension(c);
  const double da = real_in(c, "delta_a", 0.0, 100.0, true);
  const double db = real_in(c, "delta_b", 0.0, 100.0, true);
  const std::size_t nthr = count(c, "thresholds", 2);
  const auto opts = amp_options(c);
  const std::uint64_t seed = c.get_u64("seed");
  const auto thresholds = slm::linear_grid(0.0, 1.0, nthr);
  const slm::ReplicaSolver solver(prior, std::min(da, db), std::max(da, db));

  const std::vector<std::pair<std::string, double>> labels{{"A", da}, {"B", db}};
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const auto& [label, delta] = labels[k];
    const auto sol = solver.solve(delta);

    slm::RandomStream rng(seed, 2 + k);
    std::vector<double> gam(N);
    std::vector<bool> truth(N);
    const double rs = std::sqrt(sol.s_star);
    for (std::size_t n = 0; n < N; ++n) {
      const double x = slm::sample(prior, rng);
      truth[n] = x != 0.0;
      gam[n] = slm::bg_posterior_update(prior, sol.s_star, rs * x + rng.normal()).gamma_n;
    }
    const auto g_curve = slm::detection_roc(gam, truth, thresholds);

    const std::size_t M = static_cast<std::size_t>(std::llround(delta * static_cast<double>(N)));
    const auto inst = slm::generate_instance(prior, N, std::max<std::size_t>(M, 1), seed, k);
    const auto out = slm::amp_run(inst, prior, opts);
    std::vector<double> ag(N);
    std::vector<bool> at(N);
    for (std::size_t n = 0; n < N; ++n) {
      ag[n] = out.marginals[n].gamma_n;
      at[n] = inst.x[n] != 0.0;
    }
    const auto a_curve = slm::detection_roc(ag, at, thresholds);

    for (const auto& [family, curve] :
         {std::pair{std::string("gaussian"), &g_curve}, std::pair{std::string("slm"), &a_curve}}) {
      CsvWriter csv({"lambda", "fpr", "tpr"});
      for (const auto& p : *curve) csv.row({p.lambda, p.fpr, p.tpr});
      ctx.write_csv("roc_" + family + "_" + label + ".csv", csv);
      ctx.results["auc_" + family + "_" + label] = slm::roc_auc(*curve);
    }
    ctx.results["delta_" + label] = delta;
    ctx.results["snr_" + label] = sol.s_star;
    ctx.results["replica_mmse_" + label] = sol.M_delta;
    ctx.results["amp_sq_err_" + label] = slm::amp_diagnostics(out, inst.x).avg_sq_error;
  }
}

void cmd_replica(const Config& c, RunContext& ctx) {
  const auto prior = c.get_prior("prior");
  const double lo = real_in(c, "delta_lo", 0.0, 1e6, true);
  const double hi = real_in(c, "delta_hi", lo, 1e6);
  const std::size_t points = count(c, "delta_points", 2);
  const auto grid = slm::linear_grid(lo, hi, points);
  const slm::ReplicaSolver solver(prior, lo, hi);
  std::vector<slm::ReplicaSolution> sols(points);
  slm::parallel_for(points, [&](std::size_t i) { sols[i] = solver.solve(grid[i]); });
  CsvWriter csv({"delta", "I", "M", "s_star", "unique"});
  std::size_t non_unique = 0;
  for (const auto& s : sols) {
    csv.row({s.delta, s.I_delta, s.M_delta, s.s_star, s.unique ? 1 : 0});
    non_unique += s.unique ? 0 : 1;
  }
  ctx.write_csv("replica.csv", csv);
  ctx.results["non_unique_rows"] = non_unique;
  ctx.results["branch_switches"] = slm::single_crossing_diagnostic(prior, grid);
}

void cmd_fixed_point_curve(const Config& c, RunContext& ctx) {
  const auto prior = c.get_prior("prior");
  const double var = slm::prior_moments(prior).variance;
  const double lo_rel = real_in(c, "M_lo_rel", 0.0, 1.0, true);
  const std::size_t points = count(c, "points", 2);
  const auto grid = slm::log_grid(lo_rel * var, var * (1.0 - 1e-9), points);
  const auto curve = slm::fixed_point_curve(prior, grid);
  CsvWriter csv({"delta", "M", "I_prime"});
  for (const auto& p : curve.points) csv.row({p.delta, p.M, p.I_prime});
  ctx.write_csv("fixed_point_curve.csv", csv);
  ctx.results["rejected"] = curve.rejected;
  Json tps = Json::array();
  const double s_hi = slm::inverse_mmse(prior, lo_rel * var);
  const double s_lo = slm::inverse_mmse(prior, var * (1.0 - 1e-9));
  for (const auto& t : slm::fixed_point_turning_points(prior, s_lo, s_hi))
    tps.push_back({{"s", t.s}, {"delta", t.delta}, {"M", t.M}, {"local_max", t.is_local_max}});
  ctx.results["turning_points"] = tps;
}

void cmd_phase(const Config& c, RunContext& ctx) {
  const auto prior = c.get_prior("prior");
  const double lo = real_in(c, "delta_lo", 0.0, 1e6, true);
  const double hi = real_in(c, "delta_hi", lo, 1e6);
  const auto pt = slm::locate_phase_transition(prior, lo, hi);
  CsvWriter csv({"delta_star", "delta_alg", "delta_alg_curve", "delta_low", "M_minus", "M_plus", "M_split"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (pt) {
    csv.row({pt->delta_star, pt->delta_alg, pt->delta_alg_curve, pt->delta_low, pt->M_minus,
             pt->M_plus, pt->M_split});
    ctx.results["transition"] = true;
    ctx.results["delta_star"] = pt->delta_star;
    ctx.results["delta_alg"] = pt->delta_alg;
    ctx.results["delta_alg_curve"] = pt->delta_alg_curve;
    ctx.results["delta_low"] = pt->delta_low;
  } else {
    csv.row({nan, nan, nan, nan, nan, nan, nan});
    ctx.results["transition"] = false;
  }
  ctx.write_csv("phase.csv", csv);
}

void cmd_amp_run(const Config& c, RunContext& ctx) {
  const auto prior = c.get_prior("prior");
  const std::size_t N = dimension(c);
  const double delta = real_in(c, "delta", 0.0, 1e3, true);
  const std::size_t trials = count(c, "trials", 1);
  const auto opts = amp_options(c);
  const std::uint64_t seed = c.get_u64("seed");
  const std::size_t M = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(delta * static_cast<double>(N))));
  const double cN = static_cast<double>(N) / static_cast<double>(M);

  std::vector<slm::AMPOutput> outs(trials);
  std::vector<slm::AMPDiagnostics> diags(trials);
  std::vector<std::vector<double>> x_true(trials);
  slm::parallel_for(trials, [&](std::size_t t) {
    const auto inst = slm::generate_instance(prior, N, M, seed, t);
    outs[t] = slm::amp_run(inst, prior, opts);
    diags[t] = slm::amp_diagnostics(outs[t], inst.x);
    if (t == 0) x_true[t] = inst.x;
  });

  CsvWriter trace({"iter", "tau2", "avg_sq_error", "avg_post_var"});
  for (const auto& it : outs[0].trace) trace.row({it.iter, it.tau2, it.avg_sq_error, it.avg_post_var});
  ctx.write_csv("amp_trace.csv", trace);

  CsvWriter marg({"n", "mu", "sigma2", "gamma", "x_true"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t n = 0; n < N; ++n) {
    if (!outs[0].marginals.empty()) {
      const auto& m = outs[0].marginals[n];
      marg.row({n, m.mu_n, m.sigma2_n, m.gamma_n, x_true[0][n]});
    } else {
      marg.row({n, outs[0].x_hat[n], outs[0].post_var[n], nan, x_true[0][n]});
    }
  }
  ctx.write_csv("amp_marginals.csv", marg);

  CsvWriter tr({"trial", "avg_sq_error", "avg_post_var", "iterations", "converged", "diverged"});
  std::vector<double> errs;
  for (std::size_t t = 0; t < trials; ++t) {
    tr.row({t, diags[t].avg_sq_error, diags[t].avg_post_var, outs[t].iterations,
            outs[t].converged ? 1 : 0, outs[t].diverged ? 1 : 0});
    errs.push_back(diags[t].avg_sq_error);
  }
  ctx.write_csv("amp_trials.csv", tr);

  const double var = slm::prior_moments(prior).variance;
  const auto se = slm::state_evolution(prior, delta, var);
  CsvWriter tse({"iter", "tau2_mean", "tau2_se"});
  std::size_t len = 0;
  for (const auto& o : outs) len = std::max(len, o.trace.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    double acc = 0.0;
    std::size_t k = 0;
    for (const auto& o : outs) {
      const auto& t = o.trace;
      acc += t[std::min(i, t.size() - 1)].tau2;
      ++k;
    }
    const double mean_tau = acc / static_cast<double>(k);
    const double se_tau = cN * (1.0 + se.M[std::min(i, se.M.size() - 1)]);
    worst = std::max(worst, std::abs(mean_tau - se_tau) / se_tau);
    tse.row({i, mean_tau, se_tau});
  }
  ctx.write_csv("amp_tau_se.csv", tse);

  const double limit = se.limit();
  ctx.results["N"] = N;
  ctx.results["M"] = M;
  ctx.results["se_limit"] = limit;
  ctx.results["mean_sq_error"] = mean(errs);
  ctx.results["relative_gap"] = (mean(errs) - limit) / limit;
  ctx.results["tau2_worst_relative_gap"] = worst;
}

void cmd_oracle_compare(const Config& c, RunContext& ctx) {
  const auto prior = c.get_prior("prior");
  if (prior.kind() != slm::PriorKind::BernoulliGaussian)
    throw ConfigError("oracle-compare needs a Bernoulli-Gaussian prior");
  const std::size_t N = count(c, "N", 1);
  const std::size_t M = count(c, "M", 1);
  const std::size_t trials = count(c, "trials", 1);
  const auto opts = amp_options(c);
  const std::uint64_t seed = c.get_u64("seed");
  if (N > 20) throw ConfigError("N must be <= 20 for exact enumeration");

  struct Res {
    std::vector<double> ge, ga, me, ma;
    double max_dg, wsum;
    bool converged;
  };
  std::vector<Res> res(trials);
  slm::parallel_for(trials, [&](std::size_t t) {
    const auto inst = slm::generate_instance(prior, N, M, seed, t);
    const slm::SupportPosterior post(inst.A, inst.y, prior);
    const auto em = slm::exact_marginals(post);
    const auto out = slm::amp_run(inst, prior, opts);
    Res& r = res[t];
    r.max_dg = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      r.ge.push_back(em.gamma[n]);
      r.ga.push_back(out.marginals[n].gamma_n);
      r.me.push_back(em.mean[static_cast<Eigen::Index>(n)]);
      r.ma.push_back(out.x_hat[n]);
      r.max_dg = std::max(r.max_dg, std::abs(r.ge[n] - r.ga[n]));
    }
    r.wsum = post.weight_sum();
    r.converged = out.converged;
  });

  CsvWriter csv({"n", "gamma_exact", "gamma_amp", "mean_exact", "mean_amp"});
  for (std::size_t n = 0; n < N; ++n) csv.row({n, res[0].ge[n], res[0].ga[n], res[0].me[n], res[0].ma[n]});
  ctx.write_csv("oracle_compare.csv", csv);
  CsvWriter tr({"trial", "max_abs_dgamma", "weight_sum", "amp_converged"});
  double acc = 0.0, wdev = 0.0;
  std::size_t conv = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    tr.row({t, res[t].max_dg, res[t].wsum, res[t].converged ? 1 : 0});
    acc += res[t].max_dg;
    wdev = std::max(wdev, std::abs(res[t].wsum - 1.0));
    conv += res[t].converged ? 1 : 0;
  }
  ctx.write_csv("oracle_trials.csv", tr);
  ctx.results["mean_max_abs_dgamma"] = acc / static_cast<double>(trials);
  ctx.results["max_weight_sum_deviation"] = wdev;
  ctx.results["amp_converged"] = conv;
}

void cmd_infoseq(const Config& c, RunContext& ctx) {
  auto prior = c.get_prior("prior");
  const std::size_t N = count(c, "N", 1);
  const std::size_t M = count(c, "M", 1);
  const std::size_t trials = count(c, "trials", 2);
  const double T = real_in(c, "card_T", 0.0, 1e6, true);
  const std::uint64_t seed = c.get_u64("seed");
  if (prior.kind() == slm::PriorKind::BernoulliGaussian) {
    prior = slm::discretize_bernoulli_gaussian(prior);
    ctx.results["discretized_prior"] = prior.to_string();
  }
  const auto est = slm::estimate_sequences(prior, N, M, trials, seed);
  const auto& I = est.info;
  const auto& Ms = est.mmse;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CsvWriter csv({"m", "I", "I_se", "Iprime", "Idprime", "M", "M_se", "msc"});
  for (std::size_t m = 0; m <= M; ++m)
    csv.row({m, I.I[m], I.std_err[m], m < I.I_prime.size() ? I.I_prime[m] : nan,
             m < I.I_dprime.size() ? I.I_dprime[m] : nan, Ms.M[m], Ms.std_err[m],
             est.covariance[m].msc.value});
  ctx.write_csv("infoseq.csv", csv);

  const auto t3 = slm::check_theorem_monotone(I);
  const auto t4 = slm::check_theorem_ip_ub(I, Ms);
  std::size_t lb_pairs = 0, lb_fail = 0;
  for (std::size_t m = 1; m <= M; ++m)
    for (std::size_t k = 0; k < m; ++k) {
      ++lb_pairs;
      lb_fail += slm::check_theorem_mmse_lb(I, Ms, k, m).pass ? 0 : 1;
    }
  ctx.results["monotone"] = {{"pass", t3.pass}, {"worst", t3.worst}, {"violations", t3.violations}};
  ctx.results["ip_upper_bound"] = {{"pass", t4.pass}, {"worst", t4.worst}, {"violations", t4.violations}};
  ctx.results["mmse_lower_bound"] = {{"pass", lb_fail == 0}, {"pairs", lb_pairs}, {"violations", lb_fail}};
  if (M >= 1) {
    const auto t7 = slm::check_card_bound(I, T);
    ctx.results["cardinality"] = {{"pass", t7.pass}, {"T", T}, {"count", t7.count},
                                  {"significant_count", t7.significant_count}, {"bound", t7.bound}};
  }
  Json decomp = Json::array();
  for (const auto& cs : est.covariance)
    decomp.push_back({{"m", cs.m}, {"msc", cs.msc.value}, {"mean_term", cs.mean_term},
                      {"trace_var_term", cs.trace_var_term}, {"spread_term", cs.spread_term},
                      {"frobenius", cs.frobenius}});
  ctx.results["covariance"] = decomp;
}

void cmd_subset(const Config& c, RunContext& ctx) {
  const auto prior = c.get_prior("prior");
  const std::size_t N = count(c, "N", 1);
  const std::size_t M = count(c, "M", 1);
  const std::size_t K = count(c, "K", 1);
  const std::size_t trials = count(c, "trials", 1);
  const std::uint64_t seed = c.get_u64("seed");
  if (K > std::min(M, N)) throw ConfigError("K must be <= min(M, N)");
  if (N - K > slm::kMaxInterferenceDim) throw ConfigError("N - K must be <= 20");

  const auto ex = slm::subset_experiment(prior, N, M, K, trials, seed);
  std::vector<std::string> header{"trial"};
  for (std::size_t k = 1; k <= K; ++k) header.push_back("z_" + std::to_string(k));
  for (std::size_t k = 1; k <= K; ++k) header.push_back("v_" + std::to_string(k));
  CsvWriter csv(header);
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<slm::CsvField> row{t};
    for (double z : ex.trials[t].z) row.emplace_back(z);
    for (double v : ex.trials[t].v) row.emplace_back(v);
    csv.row(row);
  }
  ctx.write_csv("subset.csv", csv);

  Json s;
  s["max_identity_residual"] = ex.max_identity_residual;
  s["max_orthogonality_residual"] = ex.max_orthogonality_residual;
  s["max_factorization_residual"] = ex.max_factorization_residual;
  const auto [wmin, wmax] = std::minmax_element(ex.w_tilde_variance.begin(), ex.w_tilde_variance.end());
  s["w_tilde_variance_min"] = *wmin;
  s["w_tilde_variance_max"] = *wmax;
  Json vd = Json::array();
  for (const auto& g : ex.v_diag)
    vd.push_back({{"variance", g.variance}, {"skewness", g.skewness},
                  {"excess_kurtosis", g.excess_kurtosis}, {"ks_distance", g.ks_distance},
                  {"consistent_with_normal", g.consistent_with_normal}});
  s["v"] = vd;
  if (trials >= 500) {
    s["independence"] = {{"max_abs_corr", ex.independence.max_abs_corr},
                         {"threshold", ex.independence.threshold}, {"pass", ex.independence.pass}};
    s["positive_control"] = {{"max_abs_corr", ex.positive_control.max_abs_corr},
                             {"exceeds_threshold", !ex.positive_control.pass}};
  }
  ctx.write("subset_summary.json", s.dump(2) + "\n");
  ctx.results = s;
}

}  // namespace

std::vector<KeySpec> common_keys() {
  return {{"seed", KeyType::Int, "1", "RNG seed"},
          {"threads", KeyType::Int, "1", "worker threads (0 = all cores)"},
          {"out_dir", KeyType::Text, "out", "output directory"},
          {"full_size", KeyType::Bool, "false", "use N = 10000 where N is not given"}};
}

const std::vector<Command>& commands() {
  static const std::vector<Command> cmds = [] {
    std::vector<Command> v;
    auto with_amp = [](std::vector<KeySpec> k) {
      for (auto& a : amp_keys()) k.push_back(a);
      return k;
    };
    v.push_back({"scalar-curve", "Gaussian-channel error, posterior variance and MMSE versus snr",
                 {{"prior", KeyType::Prior, bg_default(), "prior"},
                  {"trials", KeyType::Int, "1", "unused"},
                  {"N", KeyType::Int, "2000", "variables"},
                  {"s_lo", KeyType::Real, "1e-7", "smallest snr"},
                  {"s_hi", KeyType::Real, "10", "largest snr"},
                  {"s_points", KeyType::Int, "57", "log-spaced snr points"}},
                 cmd_scalar_curve});
    v.push_back({"slm-sweep", "AMP error and replica MMSE versus number of observations",
                 with_amp({{"prior", KeyType::Prior, bg_default(), "prior"},
                           {"trials", KeyType::Int, "1", "unused"},
                           {"N", KeyType::Int, "2000", "variables"},
                           {"delta_lo", KeyType::Real, "0", "smallest M/N"},
                           {"delta_hi", KeyType::Real, "0.6", "largest M/N"},
                           {"delta_points", KeyType::Int, "31", "sweep points"}}),
                 cmd_slm_sweep});
    v.push_back({"roc", "ROC curves at operating points A and B",
                 with_amp({{"prior", KeyType::Prior, bg_default(), "prior"},
                           {"trials", KeyType::Int, "1", "unused"},
                           {"N", KeyType::Int, "2000", "variables"},
                           {"delta_a", KeyType::Real, "0.30", "M/N at point A"},
                           {"delta_b", KeyType::Real, "0.40", "M/N at point B"},
                           {"thresholds", KeyType::Int, "512", "thresholds on [0, 1]"}}),
                 cmd_roc});
    v.push_back({"replica", "Replica mutual information and MMSE versus delta",
                 {{"prior", KeyType::Prior, bg_default(), "prior"},
                  {"trials", KeyType::Int, "1", "unused"},
                  {"delta_lo", KeyType::Real, "0.05", "smallest delta"},
                  {"delta_hi", KeyType::Real, "1", "largest delta"},
                  {"delta_points", KeyType::Int, "96", "grid points"}},
                 cmd_replica});
    v.push_back({"fixed-point-curve", "All solutions of M = M_X(delta / (1 + M))",
                 {{"prior", KeyType::Prior, bg_default(), "prior"},
                  {"trials", KeyType::Int, "1", "unused"},
                  {"M_lo_rel", KeyType::Real, "1e-7", "smallest M as a fraction of Var(X)"},
                  {"points", KeyType::Int, "400", "log-spaced M points"}},
                 cmd_fixed_point_curve});
    v.push_back({"phase", "Information-theoretic and algorithmic thresholds",
                 {{"prior", KeyType::Prior, bg_default(), "prior"},
                  {"trials", KeyType::Int, "1", "unused"},
                  {"delta_lo", KeyType::Real, "0.05", "search range start"},
                  {"delta_hi", KeyType::Real, "1", "search range end"}},
                 cmd_phase});
    v.push_back({"amp-run", "AMP runs with state-evolution comparison",
                 with_amp({{"prior", KeyType::Prior, bg_default(), "prior"},
                           {"trials", KeyType::Int, "1", "independent instances"},
                           {"N", KeyType::Int, "2000", "variables"},
                           {"delta", KeyType::Real, "2", "M/N"}}),
                 cmd_amp_run});
    v.push_back({"oracle-compare", "AMP inclusion probabilities against exact enumeration",
                 with_amp({{"prior", KeyType::Prior, bg_default(), "prior"},
                           {"trials", KeyType::Int, "50", "instances"},
                           {"N", KeyType::Int, "12", "variables (<= 20)"},
                           {"M", KeyType::Int, "18", "observations"}}),
                 cmd_oracle_compare});
    for (auto& k : v.back().keys) {
      if (k.name == "damping") k.default_value = "0.5";
      if (k.name == "max_iter") k.default_value = "500";
    }
    v.push_back({"infoseq", "Information and MMSE sequences with inequality checks",
                 {{"prior", KeyType::Prior, binary_default(), "prior (bg is discretized)"},
                  {"trials", KeyType::Int, "2000", "instances"},
                  {"N", KeyType::Int, "4", "variables"},
                  {"M", KeyType::Int, "12", "observations"},
                  {"card_T", KeyType::Real, "0.05", "threshold for the |I''| count"}},
                 cmd_infoseq});
    v.push_back({"subset", "Subset response with interference subtraction",
                 {{"prior", KeyType::Prior, binary_default(), "prior"},
                  {"trials", KeyType::Int, "2000", "instances"},
                  {"N", KeyType::Int, "12", "variables"},
                  {"M", KeyType::Int, "18", "observations"},
                  {"K", KeyType::Int, "1", "subset size"}},
                 cmd_subset});
    return v;
  }();
  return cmds;
}

}  // namespace slmtk
