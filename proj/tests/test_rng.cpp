#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "slm/rng.hpp"
#include "slm/stats.hpp"

using slm::Philox4x64;
using slm::RandomStream;

TEST_SUITE("rng") {

// Known-answer vectors from the Random123 distribution (kat_vectors).
TEST_CASE("philox4x64-10 known answers") {
  const auto zero = Philox4x64::block({0, 0, 0, 0}, {0, 0});
  CHECK(zero == Philox4x64::Counter{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL,
                                    0xd7e772cee186176bULL, 0x7e68b68aec7ba23bULL});

  const std::uint64_t ones = ~std::uint64_t{0};
  const auto all = Philox4x64::block({ones, ones, ones, ones}, {ones, ones});
  CHECK(all == Philox4x64::Counter{0x87b092c3013fe90bULL, 0x438c3c67be8d0224ULL,
                                   0x9cc7d7c69cd777b6ULL, 0xa09caebf594f0ba0ULL});

  const auto pi = Philox4x64::block({0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL,
                                     0xa4093822299f31d0ULL, 0x082efa98ec4e6c89ULL},
                                    {0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL});
  CHECK(pi == Philox4x64::Counter{0xa528f45403e61d95ULL, 0x38c72dbd566e9788ULL,
                                  0xa5a1610e72fd18b5ULL, 0x57bd43b5e52b7fe6ULL});
}

TEST_CASE("stream words are counter blocks in order") {
  RandomStream rng(7, 3);
  for (std::uint64_t b = 0; b < 3; ++b) {
    const auto blk = Philox4x64::block({b, 0, 0, 0}, {7, 3});
    for (int j = 0; j < 4; ++j) CHECK(rng.next_u64() == blk[j]);
  }
}

TEST_CASE("same seed and stream reproduce, different streams differ") {
  RandomStream a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    seen.insert(x);
    seen.insert(c.next_u64());
    seen.insert(d.next_u64());
  }
  CHECK(seen.size() == 300);
}

TEST_CASE("uniforms lie in the open unit interval") {
  RandomStream rng(1, 0);
  slm::RunningStats st;
  for (int i = 0; i < 200000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    st.add(u);
  }
  CHECK(st.mean() == doctest::Approx(0.5).epsilon(0.005));
  CHECK(st.variance() == doctest::Approx(1.0 / 12.0).epsilon(0.01));
}

TEST_CASE("normal moments") {
  RandomStream rng(9, 2);
  const int n = 400000;
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    m1 += z;
    m2 += z * z;
    m3 += z * z * z;
    m4 += z * z * z * z;
  }
  m1 /= n, m2 /= n, m3 /= n, m4 /= n;
  CHECK(std::abs(m1) < 5.0 / std::sqrt(n));
  CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m3) < 5.0 * std::sqrt(15.0 / n));
  CHECK(std::abs(m4 - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("fill_normal matches repeated normal calls") {
  RandomStream a(5, 5), b(5, 5);
  std::vector<double> v(11);
  a.fill_normal(v, 2.0);
  for (double x : v) CHECK(x == 2.0 * b.normal());
}

}  // TEST_SUITE
