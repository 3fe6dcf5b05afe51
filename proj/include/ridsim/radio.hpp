#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ridsim/protocol.hpp"

namespace ridsim {

enum class Protocol : std::uint8_t { Ble4 = 0, Wifi = 1 };

inline constexpr std::array<Protocol, 2> kProtocols{Protocol::Ble4, Protocol::Wifi};

std::string_view protocol_name(Protocol p);
/// Accepts "ble4" / "wifi". Throws ConfigError otherwise.
Protocol parse_protocol(std::string_view name);

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

double distance(const Vec3& a, const Vec3& b);

struct Uav {
  int id = 0;
  Vec3 position;
  Protocol protocol = Protocol::Ble4;
  int rate = 1;  // messages per GNSS cycle
  double tx_power_dbm = 18.0;
  int wifi_channel = 6;
};

struct PathLossConfig {
  double exponent = 2.1;
  double sigma_db = 6.0;
  double pl0_db = 40.05;  // free space at 2.4 GHz, 1 m
  double reference_m = 1.0;
};

struct RadioConfig {
  PathLossConfig path_loss;
  double ble_sensitivity_dbm = -85.0;
  double wifi_sensitivity_dbm = -105.0;
  double tx_power_dbm = 18.0;
  double collision_floor = 1e-6;

  double sensitivity(Protocol p) const {
    return p == Protocol::Ble4 ? ble_sensitivity_dbm : wifi_sensitivity_dbm;
  }
};

/// Log-distance path loss in dB; `shadow_z` is a standard-normal draw scaled by
/// sigma_db. Throws ZeroDistance when the points coincide.
double path_loss(const Vec3& p1, const Vec3& p2, const PathLossConfig& model, double shadow_z);

/// Deterministic standard-normal shadowing draws, one per ordered UAV pair per
/// epoch. Keyed on UAV ids so the draw does not depend on fleet order.
class Shadowing {
 public:
  Shadowing() = default;
  Shadowing(std::uint64_t seed, std::uint64_t epoch) : seed_(seed), epoch_(epoch), enabled_(true) {}

  double draw(int sender_id, int receiver_id) const;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t epoch_ = 0;
  bool enabled_ = false;
};

/// Reachability between fleet members, indexed by position in the fleet span.
struct LinkGraph {
  int size = 0;
  std::vector<double> path_loss_db;  // row = sender, col = receiver

  // recv_ble[i]: senders using BLE whose signal reaches i.
  std::vector<std::vector<int>> recv_ble;
  // recv_wifi[i][k]: Wi-Fi senders on channel kWifiChannels[k] reaching i.
  std::vector<std::array<std::vector<int>, 3>> recv_wifi;
  // deliver[j]: receivers reached by j over j's active protocol.
  std::vector<std::vector<int>> deliver_ble;
  std::vector<std::vector<int>> deliver_wifi;

  double loss(int sender, int receiver) const {
    return path_loss_db[static_cast<std::size_t>(sender) * size + receiver];
  }
  /// Senders i can hear over `p` (all Wi-Fi channels merged), ascending.
  std::vector<int> recv_from(int receiver, Protocol p) const;
  const std::vector<int>& deliver_to(int sender, Protocol p) const {
    return p == Protocol::Ble4 ? deliver_ble[sender] : deliver_wifi[sender];
  }
  bool can_hear(int receiver, int sender, Protocol p) const;
};

LinkGraph build_link_graph(std::span<const Uav> fleet, const RadioConfig& radio,
                           const Shadowing& shadowing = {});

/// Probability that a BLE PDU from `sender` reaches `receiver` without
/// overlapping another BLE transmitter audible at the receiver.
double ble_noncollision_prob(int receiver, int sender, const LinkGraph& graph,
                             std::span<const Uav> fleet, const SlotParams& params,
                             double floor = 1e-6);

/// Same for Wi-Fi; only transmitters on the sender's channel interfere.
double wifi_noncollision_prob(int receiver, int sender, const LinkGraph& graph,
                              std::span<const Uav> fleet, const SlotParams& params,
                              double floor = 1e-6);

}  // namespace ridsim
