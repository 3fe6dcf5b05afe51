#include "ridsim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ridsim/error.hpp"

namespace ridsim {

namespace {

Slot to_slots(double ms, double delta_ms, Slot minimum) {
  if (!(ms >= 0.0) || !std::isfinite(ms)) {
    throw ConfigError("durations must be finite and non-negative, got " + std::to_string(ms));
  }
  const auto slots = static_cast<Slot>(std::llround(ms / delta_ms));
  return std::max(slots, minimum);
}

void check_psi(int psi) {
  if (psi < 1) {
    throw InvalidArgument("transmission rate must be a positive integer, got " +
                          std::to_string(psi));
  }
}

Slot rounded_interval(int psi, Slot t_gnss) {
  check_psi(psi);
  const double raw = static_cast<double>(t_gnss) / psi;
  return std::max<Slot>(1, static_cast<Slot>(std::llround(raw)));
}

// Union over every admissible offset in [first, last] of the CRT coincidences
// with the transmit train, restricted to [t0, t0 + t_gnss].
std::vector<Slot> union_of_matches(Slot tx_start, Slot tx_period, Slot first, Slot last,
                                   Slot rx_period, Slot t0, Slot t_gnss) {
  std::vector<Slot> out;
  const Slot horizon = t0 + t_gnss + 1;
  for (Slot i = first; i <= last; ++i) {
    const MatchSet m = crt_match({tx_start, tx_period}, {i, rx_period}, horizon);
    for (Slot t : m.matches) {
      if (t >= t0) {
        out.push_back(t);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

void SlotParams::validate() const {
  if (!(delta_us > 0.0)) {
    throw ConfigError("slot duration must be positive");
  }
  const auto positive = [](Slot v, const char* name) {
    if (v < 1) {
      throw ConfigError(std::string(name) + " must be at least one slot");
    }
  };
  positive(t_gnss, "t_gnss");
  positive(ble_ap, "ble_ap");
  positive(ble_pi, "ble_pi");
  positive(ble_sw, "ble_sw");
  positive(ble_si, "ble_si");
  positive(wifi_bd, "wifi_bd");
  positive(wifi_ts, "wifi_ts");
  positive(wifi_ct, "wifi_ct");
  if (ble_sw > ble_si) {
    throw ConfigError("BLE scan window exceeds scan interval");
  }
  if (ble_ap + ble_pi > ble_si) {
    throw ConfigError("BLE PDU plus gap exceeds scan interval");
  }
  if (ble_ap > ble_sw) {
    throw ConfigError("BLE PDU does not fit in a scan window");
  }
  if (wifi_bd > wifi_ts) {
    throw ConfigError("Wi-Fi beacon does not fit in a channel dwell");
  }
}

SlotParams quantize(const PhysicalTiming& timing) {
  if (!(timing.delta_ms > 0.0)) {
    throw ConfigError("slot duration must be positive");
  }
  const double d = timing.delta_ms;
  SlotParams p;
  p.delta_us = d * 1000.0;
  p.t_gnss = to_slots(timing.t_gnss_ms, d, 1);
  p.ble_ap = to_slots(timing.ble_ap_ms, d, 1);
  p.ble_pi = to_slots(timing.ble_pi_ms, d, 1);
  p.ble_rd = to_slots(timing.ble_rd_ms, d, 0);
  p.ble_sw = to_slots(timing.ble_sw_ms, d, 1);
  p.ble_si = to_slots(timing.ble_si_ms, d, 1);
  p.wifi_bd = to_slots(timing.wifi_bd_ms, d, 1);
  p.wifi_ts = to_slots(timing.wifi_ts_ms, d, 1);
  p.wifi_ct = to_slots(timing.wifi_ct_ms, d, 1);
  return p;
}

int wifi_channel_index(int channel) {
  for (int k = 0; k < 3; ++k) {
    if (kWifiChannels[k] == channel) {
      return k;
    }
  }
  throw InvalidArgument("Wi-Fi channel must be 1, 6 or 11, got " + std::to_string(channel));
}

int ble_channel_index(int channel) {
  if (channel < 37 || channel > 39) {
    throw InvalidArgument("BLE advertising channel must be 37, 38 or 39, got " +
                          std::to_string(channel));
  }
  return channel - 37;
}

Slot ble_interval(int psi, const SlotParams& params) {
  return coprime_approx(rounded_interval(psi, params.t_gnss), params.ble_scan_cycle());
}

ChannelMatchSet ble_match_channel(Slot t0, int channel, Slot a_hat, const SlotParams& params) {
  const Slot c = static_cast<Slot>(ble_channel_index(channel));
  if (params.ble_sw < params.ble_ap) {
    throw EmptyWindow("BLE scan window (" + std::to_string(params.ble_sw) +
                      " slots) shorter than a PDU (" + std::to_string(params.ble_ap) + ")");
  }
  const Slot tx_start = t0 + c * (params.ble_ap + params.ble_pi);
  const Slot first = c * params.ble_si;
  const Slot last = first + params.ble_sw - params.ble_ap;
  ChannelMatchSet out;
  out.channel = channel;
  out.slots = union_of_matches(tx_start, a_hat, first, last, params.ble_scan_cycle(), t0,
                               params.t_gnss);
  return out;
}

std::array<ChannelMatchSet, 3> ble_match_all(Slot t0, int psi, const SlotParams& params) {
  const Slot a_hat = ble_interval(psi, params);
  return {ble_match_channel(t0, 37, a_hat, params), ble_match_channel(t0, 38, a_hat, params),
          ble_match_channel(t0, 39, a_hat, params)};
}

Slot wifi_interval(int psi, const SlotParams& params) {
  return coprime_approx(rounded_interval(psi, params.t_gnss), params.wifi_scan_cycle());
}

OffsetRange wifi_offset_range(int channel, const SlotParams& params) {
  const Slot k = static_cast<Slot>(wifi_channel_index(channel));
  if (params.wifi_ts < params.wifi_bd) {
    throw EmptyWindow("Wi-Fi dwell (" + std::to_string(params.wifi_ts) +
                      " slots) shorter than a beacon (" + std::to_string(params.wifi_bd) + ")");
  }
  const Slot first = k * (params.wifi_ts + params.wifi_ct);
  return {first, first + params.wifi_ts - params.wifi_bd};
}

ChannelMatchSet wifi_match_channel(Slot t0, int channel, Slot b_hat, const SlotParams& params) {
  const OffsetRange range = wifi_offset_range(channel, params);
  ChannelMatchSet out;
  out.channel = channel;
  out.slots = union_of_matches(t0, b_hat, range.first, range.last, params.wifi_scan_cycle(), t0,
                               params.t_gnss);
  return out;
}

}  // namespace ridsim
