#include <cmath>
#include <numeric>

#include "doctest.h"
#include "ridsim/delay.hpp"
#include "ridsim/error.hpp"
#include "ridsim/oracle.hpp"

using namespace ridsim;

namespace {

// Direct evaluation of the double sum: cycle k, opportunity n.
double truncated_sum(const std::vector<double>& d, double p, double t_gnss, int cycles) {
  const double q = 1.0 - p;
  const auto n = static_cast<int>(d.size());
  double total = 0.0;
  for (int k = 0; k < cycles; ++k) {
    for (int i = 0; i < n; ++i) {
      total += std::pow(q, k * n + i) * p * (d[i] + k * t_gnss);
    }
  }
  return total;
}

Uav uav(int id, double x, Protocol p, int rate) {
  Uav u;
  u.id = id;
  u.position = {x, 0.0, 60.0};
  u.protocol = p;
  u.rate = rate;
  return u;
}

// Mean first-match delay over every scanner phase, from the walker alone.
double walker_phase_mean_ble(int psi, const SlotParams& params) {
  double total = 0.0;
  const Slot cycle = params.ble_scan_cycle();
  for (Slot t0 = 0; t0 < cycle; ++t0) {
    const auto sets = oracle::walk_ble_timeline(t0, psi, params);
    Slot first = ~Slot{0};
    for (const auto& s : sets) {
      if (!s.slots.empty()) {
        first = std::min(first, s.slots.front());
      }
    }
    if (first == ~Slot{0}) {
      return kUnreachable;
    }
    total += static_cast<double>(first - t0 + params.ble_ap);
  }
  return total / static_cast<double>(cycle);
}

double walker_phase_mean_wifi(int psi, int channel, const SlotParams& params) {
  double total = 0.0;
  const Slot cycle = params.wifi_scan_cycle();
  for (Slot t0 = 0; t0 < cycle; ++t0) {
    const auto set = oracle::walk_wifi_timeline(t0, psi, channel, params);
    if (set.slots.empty()) {
      return kUnreachable;
    }
    total += static_cast<double>(set.slots.front() - t0 + params.wifi_bd);
  }
  return total / static_cast<double>(cycle);
}

}  // namespace

TEST_CASE("expected delay closed form") {
  const std::vector<double> d{10.0, 20.0};
  CHECK(expected_delay(d, 1.0, 8000.0) == 10.0);
  const std::vector<double> one{42.0};
  for (double p : {0.1, 0.5, 0.9}) {
    CHECK(expected_delay(one, p, 8000.0) == doctest::Approx(42.0 + 8000.0 * (1.0 - p) / p));
  }
  const double closed = expected_delay(d, 0.5, 8000.0);
  CHECK(std::abs(closed - truncated_sum(d, 0.5, 8000.0, 200)) / closed < 1e-9);
  CHECK(std::isinf(expected_delay({}, 0.5, 8000.0)));
  CHECK(std::isinf(expected_delay(d, 0.0, 8000.0)));
  CHECK_THROWS_AS(expected_delay(d, 1.5, 8000.0), InvalidArgument);
}

TEST_CASE("expected delay agrees with the truncated sum on a grid") {
  Rng rng(3);
  for (double p : {0.05, 0.2, 0.5, 0.8, 0.99, 0.999999}) {
    for (int n : {1, 2, 5, 17}) {
      std::vector<double> d(n);
      double acc = 0.0;
      for (auto& v : d) {
        acc += 1.0 + 100.0 * uniform01(rng);
        v = acc;
      }
      // Enough cycles that (1-p)^(N K) < 1e-14.
      const int cycles =
          static_cast<int>(std::ceil(std::log(1e-14) / (n * std::log1p(-p)))) + 2;
      const double closed = expected_delay(d, p, 8000.0);
      CHECK(std::abs(closed - truncated_sum(d, p, 8000.0, cycles)) / closed < 1e-9);
    }
  }
}

TEST_CASE("expected delay agrees with Monte-Carlo within three standard errors") {
  Rng rng(9);
  // A real opportunity list: BLE at 9 msgs/s, scanner phase 0.
  const std::vector<double> d = ble_phase_table(9, SlotParams{}).delays[0];
  REQUIRE(d.size() >= 3);
  const int trials = 10000;
  for (double p : {0.5, 0.75, 0.95}) {
    double sum = 0.0;
    double sq = 0.0;
    for (int t = 0; t < trials; ++t) {
      const double v = oracle::mc_expected_delay(d, p, 8000.0, 1, rng);
      sum += v;
      sq += v * v;
    }
    const double mean = sum / trials;
    const double se = std::sqrt((sq / trials - mean * mean) / trials);
    CHECK(std::abs(mean - expected_delay(d, p, 8000.0)) < 3.0 * se);
  }
}

TEST_CASE("phase averages at p = 1 match the walker over every phase") {
  const SlotParams params;
  const DelayModel model(params);
  CHECK(model.average(Protocol::Ble4, 9, 6, 1.0) ==
        doctest::Approx(walker_phase_mean_ble(9, params)));
  CHECK(model.average(Protocol::Wifi, 10, 6, 1.0) ==
        doctest::Approx(walker_phase_mean_wifi(10, 6, params)));
  CHECK(std::isinf(model.average(Protocol::Ble4, 10, 6, 1.0)));
  CHECK(std::isinf(walker_phase_mean_ble(10, params)));
  CHECK(ble_phase_table(9, params).delays.size() == 192);
  CHECK(wifi_phase_table(10, 6, params).delays.size() == 168);
}

TEST_CASE("link delays") {
  const SlotParams params;
  const DelayModel model(params);
  const RadioConfig radio;
  std::vector<Uav> pair{uav(0, 0, Protocol::Ble4, 9), uav(1, 30, Protocol::Ble4, 9)};
  const auto g2 = build_link_graph(pair, radio);
  const LinkDelay solo = avg_link_delay_ble(model, pair, g2, 0, 1);
  CHECK(solo.reachable);
  CHECK(solo.sender == 0);
  CHECK(solo.receiver == 1);
  CHECK(solo.expected_delay_slots == doctest::Approx(walker_phase_mean_ble(9, params)));

  std::vector<Uav> trio = pair;
  trio.push_back(uav(2, 60, Protocol::Ble4, 9));
  const auto g3 = build_link_graph(trio, radio);
  CHECK(avg_link_delay_ble(model, trio, g3, 0, 1).expected_delay_slots >
        solo.expected_delay_slots);

  std::vector<Uav> wifi{uav(0, 0, Protocol::Wifi, 10), uav(1, 30, Protocol::Wifi, 10)};
  const auto gw = build_link_graph(wifi, radio);
  const LinkDelay w = avg_link_delay_wifi(model, wifi, gw, 0, 1);
  CHECK(w.reachable);
  CHECK(std::isfinite(w.expected_delay_slots));
  CHECK_THROWS_AS(avg_link_delay_ble(model, wifi, gw, 0, 1), SenderUnreachable);
}
