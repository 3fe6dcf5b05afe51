#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ridsim/slotmath.hpp"

namespace ridsim {

/// Protocol timing in physical units, as written in config files.
struct PhysicalTiming {
  double delta_ms = 0.125;
  double t_gnss_ms = 1000.0;
  // BLE 4 advertiser / scanner
  double ble_ap_ms = 0.376;
  double ble_pi_ms = 0.125;
  double ble_rd_ms = 5.0;
  double ble_sw_ms = 2.0;
  double ble_si_ms = 8.0;
  // Wi-Fi beacon / passive scan
  double wifi_bd_ms = 0.632;
  double wifi_ts_ms = 6.0;
  double wifi_ct_ms = 1.0;
};

/// Every timing constant quantized to slots.
struct SlotParams {
  double delta_us = 125.0;
  Slot t_gnss = 8000;
  Slot ble_ap = 3;
  Slot ble_pi = 1;
  Slot ble_rd = 40;
  Slot ble_sw = 16;
  Slot ble_si = 64;
  Slot wifi_bd = 5;
  Slot wifi_ts = 48;
  Slot wifi_ct = 8;

  /// Period of the BLE scanner's three-channel rotation (3 S_I).
  Slot ble_scan_cycle() const { return 3 * ble_si; }
  /// Period of the Wi-Fi passive-scan rotation (3 (T_S + C_T)).
  Slot wifi_scan_cycle() const { return 3 * (wifi_ts + wifi_ct); }
  double slot_ms() const { return delta_us / 1000.0; }

  /// Throws ConfigError on any broken invariant.
  void validate() const;
};

/// Rounds each duration to the nearest slot. Every field is at least one slot
/// except the pseudo-random delay, which may be zero.
SlotParams quantize(const PhysicalTiming& timing);

inline constexpr std::array<int, 3> kBleChannels{37, 38, 39};
inline constexpr std::array<int, 3> kWifiChannels{1, 6, 11};

/// Position of a Wi-Fi channel in the scanner rotation (1 -> 0, 6 -> 1, 11 -> 2).
/// Throws InvalidArgument for any other channel.
int wifi_channel_index(int channel);
int ble_channel_index(int channel);

struct ChannelMatchSet {
  int channel = 0;
  std::vector<Slot> slots;  // ascending, within [t0, t0 + t_gnss]
};

/// Advertising interval for `psi` messages per GNSS cycle, nudged to be coprime
/// with the scanner rotation.
Slot ble_interval(int psi, const SlotParams& params);

/// Slots in [t0, t0 + t_gnss] where a PDU on `channel` lies fully inside a scan
/// window of the same channel. Throws EmptyWindow if S_W < A_P.
ChannelMatchSet ble_match_channel(Slot t0, int channel, Slot a_hat, const SlotParams& params);

/// Match sets for channels 37, 38, 39 in that order.
std::array<ChannelMatchSet, 3> ble_match_all(Slot t0, int psi, const SlotParams& params);

inline Slot ble_rx_delay(Slot delta_slot, Slot t0, const SlotParams& params) {
  return delta_slot - t0 + params.ble_ap;
}

/// Beacon interval for `psi` messages per GNSS cycle, coprime with 3 (T_S + C_T).
Slot wifi_interval(int psi, const SlotParams& params);

/// Inclusive range of admissible beacon start offsets within the scan rotation
/// for which a beacon on `channel` fits inside that channel's dwell.
struct OffsetRange {
  Slot first = 0;
  Slot last = 0;
};
OffsetRange wifi_offset_range(int channel, const SlotParams& params);

/// Slots in [t0, t0 + t_gnss] where a beacon sent on `channel` falls fully
/// inside the scanner's dwell on that channel. Throws EmptyWindow if T_S < B_D.
ChannelMatchSet wifi_match_channel(Slot t0, int channel, Slot b_hat, const SlotParams& params);

inline Slot wifi_rx_delay(Slot delta_slot, Slot t0, const SlotParams& params) {
  return delta_slot - t0 + params.wifi_bd;
}

}  // namespace ridsim
