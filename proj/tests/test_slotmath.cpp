#include <numeric>
#include <vector>

#include "doctest.h"
#include "ridsim/error.hpp"
#include "ridsim/rng.hpp"
#include "ridsim/slotmath.hpp"

using namespace ridsim;

namespace {

std::uint64_t inverse_by_scan(std::uint64_t a, std::uint64_t m) {
  for (std::uint64_t x = 1; x < m; ++x) {
    if ((a % m) * x % m == 1) {
      return x;
    }
  }
  return 0;
}

std::vector<Slot> congruence_scan(PeriodicEvent a, PeriodicEvent b, Slot horizon) {
  std::vector<Slot> out;
  for (Slot t = 0; t < horizon; ++t) {
    if (t % a.period_slots == a.start_slot % a.period_slots &&
        t % b.period_slots == b.start_slot % b.period_slots) {
      out.push_back(t);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("mod_inverse") {
  CHECK(mod_inverse(1, 7) == 1);
  CHECK(mod_inverse(3, 5) == inverse_by_scan(3, 5));
  CHECK(mod_inverse(3, 5) == 2);
  const auto x = mod_inverse(889, 192);
  CHECK(x == inverse_by_scan(889, 192));
  CHECK(889 * x % 192 == 1);
  CHECK_THROWS_AS(mod_inverse(2, 4), NotCoprime);
  CHECK_THROWS_AS(mod_inverse(3, 1), InvalidModulus);
  CHECK_THROWS_AS(mod_inverse(3, 0), InvalidModulus);
}

TEST_CASE("crt_match small cases") {
  CHECK(crt_match({0, 3}, {0, 5}, 15).matches == std::vector<Slot>{0});
  CHECK(crt_match({1, 3}, {2, 5}, 30).matches == congruence_scan({1, 3}, {2, 5}, 30));
  CHECK(crt_match({1, 3}, {2, 5}, 30).matches == std::vector<Slot>{7, 22});
  CHECK_THROWS_AS(crt_match({0, 2}, {0, 4}, 100), NotCoprime);
  CHECK(crt_match({5, 7}, {1, 11}, 0).matches.empty());
}

TEST_CASE("crt_match equals exhaustive scan on random coprime periods") {
  Rng rng(42);
  std::uniform_int_distribution<Slot> period(1, 200);
  int checked = 0;
  while (checked < 60) {
    const Slot s1 = period(rng);
    const Slot s2 = period(rng);
    if (std::gcd(s1, s2) != 1) {
      continue;
    }
    const PeriodicEvent a{std::uniform_int_distribution<Slot>(0, 3 * s1)(rng), s1};
    const PeriodicEvent b{std::uniform_int_distribution<Slot>(0, 3 * s2)(rng), s2};
    const Slot horizon = 2 * s1 * s2 + 7;
    const auto got = crt_match(a, b, horizon);
    CHECK(got.matches == congruence_scan(a, b, horizon));
    CHECK(got.common_period == s1 * s2);
    ++checked;
  }
}

TEST_CASE("coprime_approx") {
  CHECK(std::gcd(889, 192) == 1);
  CHECK(coprime_approx(889, 192) == 889);
  CHECK(coprime_approx(800, 168) == 799);
  CHECK(coprime_approx(6, 6) == 5);
  CHECK(coprime_approx(1000, 168) == 997);
  CHECK(coprime_approx(1, 192) == 1);
  CHECK_THROWS_AS(coprime_approx(0, 192), InvalidArgument);

  // Nearest coprime by brute force, smaller on ties.
  for (std::uint64_t target = 1; target < 400; target += 7) {
    for (std::uint64_t m : {2ULL, 6ULL, 30ULL, 168ULL, 192ULL}) {
      std::uint64_t expect = 0;
      for (std::uint64_t d = 0; expect == 0; ++d) {
        if (target > d && std::gcd(target - d, m) == 1) {
          expect = target - d;
        } else if (std::gcd(target + d, m) == 1) {
          expect = target + d;
        }
      }
      CHECK(coprime_approx(target, m) == expect);
    }
  }
}
