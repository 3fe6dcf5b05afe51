#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ridsim/airspace.hpp"
#include "ridsim/protocol.hpp"
#include "ridsim/rng.hpp"

// Brute-force counterparts of the analytical models. Nothing in here calls the
// CRT machinery; they walk explicit schedules slot by slot or sample.
namespace ridsim::oracle {

struct TimelineEvent {
  enum class Kind : std::uint8_t { TxPacket, RxWindow };
  Kind kind = Kind::TxPacket;
  int channel = 0;
  Slot start_slot = 0;
  Slot duration_slots = 0;
};

/// Advertiser PDUs (three per event) starting in [t0, t0 + t_gnss] and scanner
/// windows covering them, in chronological order. With `randomized_rd`, every
/// advertising interval is stretched by a uniform integer in [0, R_D].
std::vector<TimelineEvent> ble_timeline(Slot t0, int psi, const SlotParams& params,
                                        bool randomized_rd, Rng* rng);

/// Matching slots per BLE channel (37, 38, 39) found by walking the timeline:
/// a PDU matches iff every one of its slots is inside a scan window on its channel.
std::array<ChannelMatchSet, 3> walk_ble_timeline(Slot t0, int psi, const SlotParams& params,
                                                 bool randomized_rd = false, Rng* rng = nullptr);

/// Beacons on `channel` and the rotating passive-scan dwells, chronological.
std::vector<TimelineEvent> wifi_timeline(Slot t0, int psi, int channel, const SlotParams& params);

ChannelMatchSet walk_wifi_timeline(Slot t0, int psi, int channel, const SlotParams& params);

/// Sample mean of the delay to the first surviving packet, cycling through
/// `match_delays` with +t_gnss per exhausted cycle.
double mc_expected_delay(std::span<const double> match_delays, double p, double t_gnss,
                         int trials, Rng& rng);

/// Fraction of trials where a target packet of `duration` slots is not
/// overlapped by any interferer. Interferer k sends rates[k] packets per cycle,
/// evenly spaced, at a uniformly random continuous phase.
struct CollisionEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
};
CollisionEstimate mc_noncollision(std::span<const int> interferer_rates, Slot duration,
                                  Slot t_gnss, int trials, Rng& rng);

struct ExhaustiveResult {
  std::vector<Assignment> best;
  double objective_ms = 0.0;
  std::uint64_t evaluated = 0;
};

/// Enumerates every joint (protocol, rate) assignment of a fleet of at most
/// three UAVs at the scenario's initial positions. Ties keep the
/// lexicographically first assignment in action-index order. Throws TooLarge.
ExhaustiveResult exhaustive_optimize(const Scenario& scenario, const DelayModel& model,
                                     const RadioConfig& radio, const ReportOptions& options,
                                     int psi_max);

}  // namespace ridsim::oracle
