#include "ridsim/radio.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <random>
#include <string>

#include "ridsim/error.hpp"
#include "ridsim/rng.hpp"

namespace ridsim {

namespace {

void warn_floor_clamp(double factor) {
  static std::once_flag once;
  std::call_once(once, [factor] {
    std::cerr << "[warn] collision factor " << factor
              << " below floor; clamping (rate too high for the packet duration)\n";
  });
}

double interference_product(std::span<const int> interferers, int sender,
                            std::span<const Uav> fleet, Slot duration, Slot t_gnss,
                            double floor) {
  double p = 1.0;
  for (int k : interferers) {
    if (k == sender) {
      continue;
    }
    double factor = 1.0 - static_cast<double>(fleet[k].rate) * 2.0 * static_cast<double>(duration) /
                              static_cast<double>(t_gnss);
    if (factor < floor) {
      warn_floor_clamp(factor);
      factor = floor;
    }
    p *= factor;
  }
  return p;
}

}  // namespace

std::string_view protocol_name(Protocol p) { return p == Protocol::Ble4 ? "ble4" : "wifi"; }

Protocol parse_protocol(std::string_view name) {
  if (name == "ble4") {
    return Protocol::Ble4;
  }
  if (name == "wifi") {
    return Protocol::Wifi;
  }
  throw ConfigError("unknown protocol '" + std::string(name) + "' (expected ble4 or wifi)");
}

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double path_loss(const Vec3& p1, const Vec3& p2, const PathLossConfig& model, double shadow_z) {
  const double d = distance(p1, p2);
  if (d <= 0.0) {
    throw ZeroDistance("path loss undefined for coincident positions");
  }
  return model.pl0_db + 10.0 * model.exponent * std::log10(d / model.reference_m) +
         model.sigma_db * shadow_z;
}

double Shadowing::draw(int sender_id, int receiver_id) const {
  if (!enabled_) {
    return 0.0;
  }
  const std::uint64_t key =
      mix_seed(seed_, epoch_, static_cast<std::uint64_t>(static_cast<std::uint32_t>(sender_id)),
               static_cast<std::uint64_t>(static_cast<std::uint32_t>(receiver_id)));
  std::mt19937_64 gen(key);
  std::normal_distribution<double> normal(0.0, 1.0);
  return normal(gen);
}

std::vector<int> LinkGraph::recv_from(int receiver, Protocol p) const {
  if (p == Protocol::Ble4) {
    return recv_ble[receiver];
  }
  std::vector<int> out;
  for (const auto& ch : recv_wifi[receiver]) {
    out.insert(out.end(), ch.begin(), ch.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool LinkGraph::can_hear(int receiver, int sender, Protocol p) const {
  if (p == Protocol::Ble4) {
    const auto& r = recv_ble[receiver];
    return std::binary_search(r.begin(), r.end(), sender);
  }
  for (const auto& ch : recv_wifi[receiver]) {
    if (std::binary_search(ch.begin(), ch.end(), sender)) {
      return true;
    }
  }
  return false;
}

LinkGraph build_link_graph(std::span<const Uav> fleet, const RadioConfig& radio,
                           const Shadowing& shadowing) {
  const int m = static_cast<int>(fleet.size());
  LinkGraph g;
  g.size = m;
  g.path_loss_db.assign(static_cast<std::size_t>(m) * m, 0.0);
  g.recv_ble.resize(m);
  g.recv_wifi.resize(m);
  g.deliver_ble.resize(m);
  g.deliver_wifi.resize(m);

  for (int j = 0; j < m; ++j) {  // sender
    const Uav& tx = fleet[j];
    const int wifi_k = wifi_channel_index(tx.wifi_channel);
    for (int i = 0; i < m; ++i) {  // receiver
      if (i == j) {
        continue;
      }
      const double pl = path_loss(tx.position, fleet[i].position, radio.path_loss,
                                  shadowing.draw(tx.id, fleet[i].id));
      g.path_loss_db[static_cast<std::size_t>(j) * m + i] = pl;
      if (tx.tx_power_dbm - pl < radio.sensitivity(tx.protocol)) {
        continue;
      }
      if (tx.protocol == Protocol::Ble4) {
        g.recv_ble[i].push_back(j);
        g.deliver_ble[j].push_back(i);
      } else {
        g.recv_wifi[i][wifi_k].push_back(j);
        g.deliver_wifi[j].push_back(i);
      }
    }
  }
  return g;
}

double ble_noncollision_prob(int receiver, int sender, const LinkGraph& graph,
                             std::span<const Uav> fleet, const SlotParams& params, double floor) {
  if (!graph.can_hear(receiver, sender, Protocol::Ble4)) {
    throw SenderUnreachable("UAV " + std::to_string(fleet[sender].id) +
                            " is not BLE-audible at UAV " + std::to_string(fleet[receiver].id));
  }
  return interference_product(graph.recv_ble[receiver], sender, fleet, params.ble_ap,
                              params.t_gnss, floor);
}

double wifi_noncollision_prob(int receiver, int sender, const LinkGraph& graph,
                              std::span<const Uav> fleet, const SlotParams& params, double floor) {
  const int k = wifi_channel_index(fleet[sender].wifi_channel);
  const auto& same_channel = graph.recv_wifi[receiver][k];
  if (!std::binary_search(same_channel.begin(), same_channel.end(), sender)) {
    throw SenderUnreachable("UAV " + std::to_string(fleet[sender].id) +
                            " is not Wi-Fi-audible at UAV " + std::to_string(fleet[receiver].id));
  }
  return interference_product(same_channel, sender, fleet, params.wifi_bd, params.t_gnss, floor);
}

}  // namespace ridsim
