#include "slm/stats.hpp"

namespace slm {

Estimate jackknife_mean(std::span<const double> samples) {
  RunningStats st;
  for (double x : samples) st.add(x);
  return {st.mean(), st.std_err()};
}

void RunningStats::add(double x) noexcept {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

double RunningStats::variance() const noexcept {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningStats::std_err() const noexcept {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

}  // namespace slm
