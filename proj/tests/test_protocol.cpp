#include <algorithm>

#include "doctest.h"
#include "ridsim/error.hpp"
#include "ridsim/oracle.hpp"
#include "ridsim/protocol.hpp"

using namespace ridsim;

namespace {

std::vector<Slot> delays_of(const std::array<ChannelMatchSet, 3>& sets, Slot t0) {
  std::vector<Slot> out;
  for (const auto& s : sets) {
    for (Slot v : s.slots) {
      out.push_back(v - t0);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("quantization of the physical defaults") {
  const SlotParams p = quantize(PhysicalTiming{});
  CHECK(p.ble_ap == 3);
  CHECK(p.ble_pi == 1);
  CHECK(p.ble_rd == 40);
  CHECK(p.ble_sw == 16);
  CHECK(p.ble_si == 64);
  CHECK(p.wifi_bd == 5);
  CHECK(p.wifi_ts == 48);
  CHECK(p.wifi_ct == 8);
  CHECK(p.t_gnss == 8000);
  CHECK(p.ble_scan_cycle() == 192);
  CHECK(p.wifi_scan_cycle() == 168);
}

TEST_CASE("broadcast intervals") {
  const SlotParams p;
  CHECK(ble_interval(9, p) == 889);
  CHECK(ble_interval(1, p) == 7999);
  CHECK(wifi_interval(10, p) == 799);
  CHECK(wifi_interval(8, p) == 997);
  SlotParams q;
  q.t_gnss = 8000;
  CHECK(ble_interval(8000, q) == 1);
  CHECK(wifi_interval(8000, q) == 1);
  CHECK_THROWS_AS(ble_interval(0, p), InvalidArgument);
  CHECK_THROWS_AS(wifi_interval(0, p), InvalidArgument);
}

TEST_CASE("rx delay formulas") {
  const SlotParams p;
  CHECK(ble_rx_delay(500, 500, p) == 3);
  CHECK(ble_rx_delay(600, 500, p) == 103);
  CHECK(wifi_rx_delay(500, 500, p) == 5);
  CHECK(wifi_rx_delay(700, 500, p) == 205);
}

TEST_CASE("ble match sets against the timeline walker, default parameters") {
  const SlotParams p;
  const auto all = ble_match_all(0, 9, p);
  REQUIRE(all.size() == 3);
  CHECK(all[0].channel == 37);
  CHECK(all[1].channel == 38);
  CHECK(all[2].channel == 39);
  const auto walked = oracle::walk_ble_timeline(0, 9, p);
  for (int c = 0; c < 3; ++c) {
    CHECK(all[c].slots == walked[c].slots);
  }
  for (Slot t0 : {Slot{1}, Slot{77}, Slot{191}, Slot{5000}}) {
    for (int psi = 1; psi <= 10; ++psi) {
      const auto a = ble_match_all(t0, psi, p);
      const auto w = oracle::walk_ble_timeline(t0, psi, p);
      for (int c = 0; c < 3; ++c) {
        CHECK(a[c].slots == w[c].slots);
      }
    }
  }
}

TEST_CASE("ble channel 37 with the window equal to the PDU has one offset") {
  SlotParams p;
  p.ble_sw = p.ble_ap;
  const Slot a_hat = ble_interval(9, p);
  const auto got = ble_match_channel(0, 37, a_hat, p);
  for (Slot s : got.slots) {
    CHECK(s % p.ble_scan_cycle() == 0);
  }
  p.ble_sw = p.ble_ap - 1;
  CHECK_THROWS_AS(ble_match_channel(0, 37, a_hat, p), EmptyWindow);
}

TEST_CASE("ble delay multiset is periodic in t0") {
  SlotParams p;
  p.t_gnss = 3000;
  const Slot a_hat = ble_interval(9, p);
  const Slot shift = p.ble_scan_cycle() * a_hat;
  for (Slot t0 : {Slot{0}, Slot{13}}) {
    CHECK(delays_of(ble_match_all(t0, 9, p), t0) ==
          delays_of(ble_match_all(t0 + shift, 9, p), t0 + shift));
  }
}

TEST_CASE("wifi match sets against the timeline walker") {
  const SlotParams p;
  for (int ch : kWifiChannels) {
    for (Slot t0 : {Slot{0}, Slot{55}, Slot{167}}) {
      for (int psi : {7, 8, 9, 10}) {
        const auto a = wifi_match_channel(t0, ch, wifi_interval(psi, p), p);
        const auto w = oracle::walk_wifi_timeline(t0, psi, ch, p);
        CHECK(a.slots == w.slots);
      }
    }
  }
  CHECK_THROWS_AS(wifi_match_channel(0, 5, 799, p), InvalidArgument);
}

TEST_CASE("wifi offset ranges and collapsed dwell") {
  const SlotParams p;
  CHECK(wifi_offset_range(1, p).first == 0);
  CHECK(wifi_offset_range(1, p).last == 43);
  CHECK(wifi_offset_range(6, p).first == 56);
  CHECK(wifi_offset_range(6, p).last == 99);
  CHECK(wifi_offset_range(11, p).first == 112);
  CHECK(wifi_offset_range(11, p).last == 155);
  SlotParams q;
  q.wifi_ts = q.wifi_bd;
  CHECK(wifi_offset_range(6, q).first == wifi_offset_range(6, q).last);
  q.wifi_ts = q.wifi_bd - 1;
  CHECK_THROWS_AS(wifi_match_channel(0, 6, 799, q), EmptyWindow);
}

TEST_CASE("slot parameter validation") {
  SlotParams p;
  CHECK_NOTHROW(p.validate());
  p.ble_sw = 65;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
