#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "ridsim/protocol.hpp"
#include "ridsim/radio.hpp"

namespace ridsim {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct LinkDelay {
  int sender = 0;    // UAV id
  int receiver = 0;  // UAV id
  Protocol protocol = Protocol::Ble4;
  double expected_delay_slots = kUnreachable;
  bool reachable = false;
};

/// Mean delivery delay when each in-cycle opportunity n (delay `match_delays[n]`)
/// succeeds independently with probability p, and a cycle without success is
/// retried one GNSS period later with the same opportunities.
///
/// Closed form of the geometric double sum: with q = (1-p)^N,
///   A = sum_n (1-p)^(n-1) p D_n,  B = sum_n (1-p)^(n-1) p,
///   E = A / (1-q) + t_gnss * B * q / (1-q)^2.
/// Returns kUnreachable when there is no opportunity or p == 0.
double expected_delay(std::span<const double> match_delays, double p, double t_gnss);

/// Per-phase sorted reception delays (slots) for one transmit configuration.
/// Index = t0 over one scanner rotation.
struct PhaseTable {
  std::vector<std::vector<double>> delays;
  bool has_empty_phase() const;
};

PhaseTable ble_phase_table(int psi, const SlotParams& params);
PhaseTable wifi_phase_table(int psi, int channel, const SlotParams& params);

/// Phase-averaged expected delay over a table; kUnreachable if any phase has
/// no reception opportunity.
double phase_average(const PhaseTable& table, double p, double t_gnss);

/// Shared, thread-safe cache of phase tables and phase averages for a fixed
/// set of slot parameters.
class DelayModel {
 public:
  explicit DelayModel(SlotParams params) : params_(params) {}

  const SlotParams& params() const { return params_; }

  std::shared_ptr<const PhaseTable> table(Protocol protocol, int psi, int wifi_channel) const;

  /// Memoized phase_average for the given transmit configuration.
  double average(Protocol protocol, int psi, int wifi_channel, double p) const;

 private:
  using TableKey = std::tuple<int, int, int>;
  struct AvgKey {
    int protocol;
    int psi;
    int channel;
    std::uint64_t p_bits;
    bool operator==(const AvgKey&) const = default;
  };
  struct AvgKeyHash {
    std::size_t operator()(const AvgKey& k) const;
  };

  SlotParams params_;
  mutable std::mutex mutex_;
  mutable std::map<TableKey, std::shared_ptr<const PhaseTable>> tables_;
  mutable std::unordered_map<AvgKey, double, AvgKeyHash> averages_;
};

/// Phase-averaged BLE delay from fleet[sender] to fleet[receiver].
/// Throws SenderUnreachable unless the receiver is in the sender's BLE delivery set.
LinkDelay avg_link_delay_ble(const DelayModel& model, std::span<const Uav> fleet,
                             const LinkGraph& graph, int sender, int receiver,
                             double collision_floor = 1e-6);

LinkDelay avg_link_delay_wifi(const DelayModel& model, std::span<const Uav> fleet,
                              const LinkGraph& graph, int sender, int receiver,
                              double collision_floor = 1e-6);

}  // namespace ridsim
