#include <cmath>
#include <set>

#include "doctest.h"

#include "covert/rng.hpp"

TEST_SUITE("rng") {
  TEST_CASE("same seed, same stream") {
    covert::Rng a(42);
    covert::Rng b(42);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
  }

  TEST_CASE("stream seeds are distinct and order-free") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t r = 0; r < 100; ++r) {
      for (std::uint64_t s = 0; s < 10; ++s) seen.insert(covert::stream_seed(7, r, s));
    }
    CHECK(seen.size() == 1000);
    CHECK(covert::stream_seed(7, 3, 4) == covert::stream_seed(covert::stream_seed(7, 3), 4));
    CHECK(covert::stream_seed(7, 3) != covert::stream_seed(8, 3));
  }

  TEST_CASE("uniform draws stay in range") {
    covert::Rng rng(1);
    for (int i = 0; i < 100000; ++i) {
      const double u = rng.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      const double v = rng.uniform_open0();
      REQUIRE(v > 0.0);
      REQUIRE(v <= 1.0);
    }
  }

  TEST_CASE("moments of the exponential and normal draws") {
    constexpr int n = 200000;
    covert::Rng rng(5);
    double se = 0.0;
    double sn = 0.0;
    double sn2 = 0.0;
    for (int i = 0; i < n; ++i) {
      se += rng.exponential();
      const double z = rng.normal();
      sn += z;
      sn2 += z * z;
    }
    // Five standard errors.
    const double band = 5.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(se / n - 1.0) < band);
    CHECK(std::abs(sn / n) < band);
    CHECK(std::abs(sn2 / n - 1.0) < band * std::sqrt(2.0));
  }
}
