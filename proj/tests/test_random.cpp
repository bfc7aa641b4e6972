#include "tbm/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace tbm;

TEST_SUITE("random") {
  TEST_CASE("splitmix64 reference stream") {
    Random a(1234567);
    CHECK(a.next_u64() == 6457827717110365317ULL);
    CHECK(a.next_u64() == 3203168211198807973ULL);
    CHECK(a.next_u64() == 9817491932198370423ULL);
    Random b(0);
    CHECK(b.next_u64() == 16294208416658607535ULL);
    CHECK(b.next_u64() == 7960286522194355700ULL);
  }

  TEST_CASE("frozen derived values") {
    Random u(42);
    CHECK(u.uniform() == 0.7415648787718233);
    CHECK(u.uniform() == 0.1599103928769201);
    Random idx(7);
    const std::vector<std::size_t> expect{3, 0, 9, 5, 4, 2, 4, 3};
    for (std::size_t e : expect) CHECK(idx.index(10) == e);
    Random n(99);
    CHECK(n.normal() == doctest::Approx(0.7633314164679424).epsilon(1e-15));
    CHECK(n.normal() == doctest::Approx(0.15387016353412888).epsilon(1e-15));
    CHECK(derive_seed(0, {}) == 16294208416658607535ULL);
    CHECK(derive_seed(7, {1, 2}) == 6002570767936538342ULL);
    CHECK(derive_seed(7, {2, 1}) == 7345770851365294972ULL);
  }

  TEST_CASE("ranges and moments") {
    Random rng(5);
    double sum = 0.0, sum_sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const double u = rng.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      REQUIRE(rng.index(7) < 7);
      const double z = rng.normal();
      sum += z;
      sum_sq += z * z;
    }
    CHECK(std::abs(sum / n) <= 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(sum_sq / n - 1.0) <= 0.05);
    CHECK_THROWS(rng.index(0));
  }

  TEST_CASE("sampling without replacement") {
    Random rng(6);
    const auto s = rng.sample_without_replacement(20, 8);
    CHECK(s.size() == 8);
    CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 8);
    CHECK(std::all_of(s.begin(), s.end(), [](std::size_t v) { return v < 20; }));
    CHECK(rng.sample_without_replacement(5, 0).empty());
    CHECK_THROWS(rng.sample_without_replacement(3, 4));
  }

  TEST_CASE("distinct coordinates give distinct seeds") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t a = 0; a < 30; ++a) {
      for (std::uint64_t b = 0; b < 30; ++b) seen.insert(derive_seed(1, {a, b}));
    }
    CHECK(seen.size() == 900);
  }
}
