#include <cmath>

#include "doctest.h"
#include "ridsim/error.hpp"
#include "ridsim/oracle.hpp"

using namespace ridsim;

TEST_CASE("walker edge cases") {
  SlotParams p;
  p.ble_sw = 0;
  for (const auto& s : oracle::walk_ble_timeline(0, 9, p)) {
    CHECK(s.slots.empty());
  }
  SlotParams q;
  q.ble_rd = 0;
  Rng rng(1);
  const auto det = oracle::walk_ble_timeline(5, 7, q);
  const auto rnd = oracle::walk_ble_timeline(5, 7, q, true, &rng);
  for (int c = 0; c < 3; ++c) {
    CHECK(det[c].slots == rnd[c].slots);
  }
  CHECK_THROWS_AS(oracle::walk_ble_timeline(0, 9, q, true, nullptr), InvalidArgument);
}

TEST_CASE("timeline events are chronological and the wifi rotation has period 3(T_S+C_T)") {
  const SlotParams p;
  const auto events = oracle::wifi_timeline(0, 10, 6, p);
  for (std::size_t i = 1; i < events.size(); ++i) {
    CHECK(events[i - 1].start_slot <= events[i].start_slot);
  }
  Slot last_ch1 = 0;
  bool seen = false;
  for (const auto& e : events) {
    if (e.kind == oracle::TimelineEvent::Kind::RxWindow && e.channel == 1) {
      if (seen) {
        CHECK(e.start_slot - last_ch1 == 3 * (p.wifi_ts + p.wifi_ct));
      }
      last_ch1 = e.start_slot;
      seen = true;
    }
  }
}

TEST_CASE("beacon straddling a dwell boundary is not heard") {
  SlotParams p;
  p.t_gnss = 8000;
  // A beacon starting at 44 on channel 1 ends at 49 > T_S = 48.
  const auto set = oracle::walk_wifi_timeline(44, 8000, 1, p);
  for (Slot s : set.slots) {
    CHECK(s != 44);
  }
  const auto fits = oracle::walk_wifi_timeline(43, 8000, 1, p);
  REQUIRE(!fits.slots.empty());
  CHECK(fits.slots.front() == 43);
}

TEST_CASE("monte-carlo helpers are seed deterministic") {
  const std::vector<double> d{5.0, 9.0};
  Rng a(4);
  Rng b(4);
  CHECK(oracle::mc_expected_delay(d, 0.6, 8000.0, 500, a) ==
        oracle::mc_expected_delay(d, 0.6, 8000.0, 500, b));
  Rng c(2);
  CHECK(oracle::mc_expected_delay(d, 1.0, 8000.0, 10, c) == 5.0);
  const std::vector<int> rates{9};
  Rng e(8);
  Rng f(8);
  CHECK(oracle::mc_noncollision(rates, 3, 8000, 1000, e).probability ==
        oracle::mc_noncollision(rates, 3, 8000, 1000, f).probability);
}

TEST_CASE("exhaustive optimizer") {
  const DelayModel model{SlotParams{}};
  Scenario one;
  one.fleet.resize(1);
  one.fleet[0].position = {1, 1, 50};
  const auto r1 = oracle::exhaustive_optimize(one, model, RadioConfig{}, ReportOptions{}, 10);
  CHECK(r1.objective_ms == 0.0);
  CHECK(r1.evaluated == 20);
  // All 20 actions tie at 0; the first in index order is kept.
  CHECK(r1.best[0].protocol() == Protocol::Ble4);
  CHECK(r1.best[0].active_rate() == 1);

  Scenario two;
  two.fleet.resize(2);
  two.fleet[1].id = 1;
  two.fleet[0].position = {25, 50, 60};
  two.fleet[1].position = {75, 50, 60};
  const auto r2 = oracle::exhaustive_optimize(two, model, RadioConfig{}, ReportOptions{}, 10);
  CHECK(r2.evaluated == 400);
  CHECK(r2.best[0].protocol() == r2.best[1].protocol());
  CHECK(r2.best[0].active_rate() == r2.best[1].active_rate());

  Scenario four;
  four.fleet.resize(4);
  CHECK_THROWS_AS(oracle::exhaustive_optimize(four, model, RadioConfig{}, ReportOptions{}, 10),
                  TooLarge);
}
