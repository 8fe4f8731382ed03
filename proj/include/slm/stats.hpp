#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace slm {

/// A Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double std_err = 0.0;
};

/// Sample mean with the delete-one jackknife standard error. For a plain mean
/// the jackknife error equals s / sqrt(n); it is kept general so that callers
/// estimating smooth functions of means get the same treatment.
Estimate jackknife_mean(std::span<const double> samples);

/// Jackknife for a smooth function of the per-column means of `samples`
/// (row = trial). `f` receives the vector of column means.
template <class F>
Estimate jackknife(const std::vector<std::vector<double>>& samples, F&& f);

/// Running mean/variance accumulator (Welford).
class RunningStats {
 public:
  void add(double x) noexcept;
  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  /// Unbiased sample variance (0 for fewer than two samples).
  double variance() const noexcept;
  double std_err() const noexcept;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// ---------------------------------------------------------------------------

template <class F>
Estimate jackknife(const std::vector<std::vector<double>>& samples, F&& f) {
  const std::size_t n = samples.size();
  if (n == 0) return {};
  const std::size_t d = samples.front().size();
  std::vector<double> total(d, 0.0);
  for (const auto& row : samples)
    for (std::size_t j = 0; j < d; ++j) total[j] += row[j];
  std::vector<double> mean(d);
  for (std::size_t j = 0; j < d; ++j) mean[j] = total[j] / static_cast<double>(n);
  const double full = f(mean);
  if (n < 2) return {full, 0.0};

  std::vector<double> loo(d);
  double acc = 0.0, acc2 = 0.0;
  for (const auto& row : samples) {
    for (std::size_t j = 0; j < d; ++j) loo[j] = (total[j] - row[j]) / static_cast<double>(n - 1);
    const double v = f(loo);
    acc += v;
    acc2 += v * v;
  }
  const double nn = static_cast<double>(n);
  const double mean_loo = acc / nn;
  const double var = (nn - 1.0) / nn * (acc2 - nn * mean_loo * mean_loo);
  return {full, var > 0.0 ? std::sqrt(var) : 0.0};
}

}  // namespace slm
