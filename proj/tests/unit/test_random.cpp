#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "vecgee/random.hpp"

using namespace vecgee;

TEST_SUITE("sim-harness") {
  TEST_CASE("splitmix64 reference outputs") {
    SplitMix64 rng(0);
    CHECK(rng() == 0xe220a8397b1dcdafULL);
    CHECK(rng() == 0x6e789e6aa1b965f4ULL);
    CHECK(rng() == 0x06c45d188009454fULL);
  }

  TEST_CASE("streams are deterministic and substreams are distinct") {
    auto a = SplitMix64::substream(7, 3);
    auto b = SplitMix64::substream(7, 3);
    for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
    std::set<std::uint64_t> firsts;
    for (std::uint64_t seed = 0; seed < 4; ++seed)
      for (std::uint64_t r = 0; r < 64; ++r) firsts.insert(SplitMix64::substream(seed, r)());
    CHECK(firsts.size() == 256);
  }

  TEST_CASE("uniform draws lie in the unit interval with the right moments") {
    SplitMix64 rng(11);
    std::vector<double> u(200000);
    for (auto& v : u) {
      v = rng.uniform();
      REQUIRE(v >= 0.0);
      REQUIRE(v < 1.0);
    }
    CHECK(oracle::mean(u) == doctest::Approx(0.5).epsilon(0.01));
    CHECK(oracle::variance(u) == doctest::Approx(1.0 / 12.0).epsilon(0.01));
  }

  TEST_CASE("normal draws have unit variance and light tails") {
    SplitMix64 rng(12);
    std::vector<double> z(200000);
    std::size_t beyond = 0;
    for (auto& v : z) {
      v = rng.normal();
      beyond += std::abs(v) > 1.959964 ? 1 : 0;
    }
    CHECK(std::abs(oracle::mean(z)) < 0.01);
    CHECK(oracle::variance(z) == doctest::Approx(1.0).epsilon(0.015));
    CHECK(static_cast<double>(beyond) / 200000.0 == doctest::Approx(0.05).epsilon(0.05));
    SplitMix64 shifted(12);
    CHECK(shifted.normal(3.0, 2.0) == doctest::Approx(3.0 + 2.0 * z[0]));
  }

  TEST_CASE("binomial and index draws") {
    SplitMix64 rng(13);
    std::vector<double> b(50000);
    for (auto& v : b) {
      const int k = rng.binomial(8, 0.3);
      REQUIRE(k >= 0);
      REQUIRE(k <= 8);
      v = k;
    }
    CHECK(oracle::mean(b) == doctest::Approx(2.4).epsilon(0.02));
    CHECK(oracle::variance(b) == doctest::Approx(1.68).epsilon(0.04));
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) {
      const auto k = rng.index(7);
      REQUIRE(k < 7);
      ++counts[k];
    }
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
    CHECK(rng.index(1) == 0);
  }
}
