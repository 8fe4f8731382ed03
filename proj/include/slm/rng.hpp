#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace slm {

/// Philox4x64-10 block function (Salmon, Moraes, Dror, Shaw, SC'11).
/// Stateless: maps (counter, key) to four 64-bit words.
struct Philox4x64 {
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static Counter block(Counter ctr, Key key) noexcept;
};

/// A reproducible stream of variates identified by (seed, stream id).
///
/// The key is {seed, stream}; the counter is {block, 0, 0, 0}. Two streams
/// with different ids never share blocks, so per-trial or per-worker streams
/// give schedule-independent results.
///
/// Normals use the Box-Muller transform on pairs of 53-bit uniforms; both
/// outputs of a pair are consumed in order.
class RandomStream {
 public:
  static constexpr std::string_view kAlgorithm = "philox4x64-10+box-muller";

  RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;

  double normal() noexcept;
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

  void fill_normal(std::span<double> out, double stddev = 1.0) noexcept;

  std::uint64_t seed() const noexcept { return key_[0]; }
  std::uint64_t stream() const noexcept { return key_[1]; }

 private:
  Philox4x64::Key key_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 4> buffer_{};
  unsigned pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace slm
