#include "ridsim/delay.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "ridsim/error.hpp"

namespace ridsim {

double expected_delay(std::span<const double> match_delays, double p, double t_gnss) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidArgument("non-collision probability must lie in [0, 1], got " +
                          std::to_string(p));
  }
  const std::size_t n = match_delays.size();
  if (n == 0 || p == 0.0) {
    return kUnreachable;
  }
  double a = 0.0;
  double b = 0.0;
  double miss = 1.0;  // (1-p)^(n-1)
  for (double d : match_delays) {
    a += miss * p * d;
    b += miss * p;
    miss *= 1.0 - p;
  }
  // 1 - q without cancellation for small p.
  const double one_minus_q =
      p == 1.0 ? 1.0 : -std::expm1(static_cast<double>(n) * std::log1p(-p));
  const double q = 1.0 - one_minus_q;
  return a / one_minus_q + t_gnss * b * q / (one_minus_q * one_minus_q);
}

bool PhaseTable::has_empty_phase() const {
  return std::any_of(delays.begin(), delays.end(), [](const auto& d) { return d.empty(); });
}

PhaseTable ble_phase_table(int psi, const SlotParams& params) {
  PhaseTable table;
  const Slot cycle = params.ble_scan_cycle();
  table.delays.resize(cycle);
  for (Slot t0 = 0; t0 < cycle; ++t0) {
    auto& out = table.delays[t0];
    for (const auto& ch : ble_match_all(t0, psi, params)) {
      for (Slot s : ch.slots) {
        out.push_back(static_cast<double>(ble_rx_delay(s, t0, params)));
      }
    }
    std::sort(out.begin(), out.end());
  }
  return table;
}

PhaseTable wifi_phase_table(int psi, int channel, const SlotParams& params) {
  PhaseTable table;
  const Slot cycle = params.wifi_scan_cycle();
  const Slot b_hat = wifi_interval(psi, params);
  table.delays.resize(cycle);
  for (Slot t0 = 0; t0 < cycle; ++t0) {
    auto& out = table.delays[t0];
    for (Slot s : wifi_match_channel(t0, channel, b_hat, params).slots) {
      out.push_back(static_cast<double>(wifi_rx_delay(s, t0, params)));
    }
  }
  return table;
}

double phase_average(const PhaseTable& table, double p, double t_gnss) {
  if (table.delays.empty()) {
    return kUnreachable;
  }
  double sum = 0.0;
  for (const auto& d : table.delays) {
    const double e = expected_delay(d, p, t_gnss);
    if (!std::isfinite(e)) {
      return kUnreachable;
    }
    sum += e;
  }
  return sum / static_cast<double>(table.delays.size());
}

std::size_t DelayModel::AvgKeyHash::operator()(const AvgKey& k) const {
  std::uint64_t h = k.p_bits;
  h ^= (static_cast<std::uint64_t>(k.protocol) << 56) ^ (static_cast<std::uint64_t>(k.psi) << 40) ^
       (static_cast<std::uint64_t>(k.channel) << 32);
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return static_cast<std::size_t>(h);
}

std::shared_ptr<const PhaseTable> DelayModel::table(Protocol protocol, int psi,
                                                    int wifi_channel) const {
  const int channel = protocol == Protocol::Ble4 ? 0 : wifi_channel;
  const TableKey key{static_cast<int>(protocol), psi, channel};
  {
    std::lock_guard lock(mutex_);
    if (auto it = tables_.find(key); it != tables_.end()) {
      return it->second;
    }
  }
  auto built = std::make_shared<const PhaseTable>(protocol == Protocol::Ble4
                                                      ? ble_phase_table(psi, params_)
                                                      : wifi_phase_table(psi, channel, params_));
  std::lock_guard lock(mutex_);
  return tables_.emplace(key, std::move(built)).first->second;
}

double DelayModel::average(Protocol protocol, int psi, int wifi_channel, double p) const {
  const int channel = protocol == Protocol::Ble4 ? 0 : wifi_channel;
  const AvgKey key{static_cast<int>(protocol), psi, channel, std::bit_cast<std::uint64_t>(p)};
  {
    std::lock_guard lock(mutex_);
    if (auto it = averages_.find(key); it != averages_.end()) {
      return it->second;
    }
  }
  const double value = phase_average(*table(protocol, psi, channel), p,
                                     static_cast<double>(params_.t_gnss));
  std::lock_guard lock(mutex_);
  averages_.emplace(key, value);
  return value;
}

namespace {

LinkDelay link_delay(const DelayModel& model, std::span<const Uav> fleet, int sender,
                     int receiver, Protocol protocol, double p) {
  const Uav& tx = fleet[sender];
  LinkDelay out;
  out.sender = tx.id;
  out.receiver = fleet[receiver].id;
  out.protocol = protocol;
  out.expected_delay_slots = model.average(protocol, tx.rate, tx.wifi_channel, p);
  out.reachable = std::isfinite(out.expected_delay_slots);
  return out;
}

void require_delivery(const LinkGraph& graph, std::span<const Uav> fleet, int sender,
                      int receiver, Protocol protocol) {
  const auto& s = graph.deliver_to(sender, protocol);
  if (!std::binary_search(s.begin(), s.end(), receiver)) {
    throw SenderUnreachable("UAV " + std::to_string(fleet[receiver].id) +
                            " is not in the " + std::string(protocol_name(protocol)) +
                            " delivery set of UAV " + std::to_string(fleet[sender].id));
  }
}

}  // namespace

LinkDelay avg_link_delay_ble(const DelayModel& model, std::span<const Uav> fleet,
                             const LinkGraph& graph, int sender, int receiver,
                             double collision_floor) {
  require_delivery(graph, fleet, sender, receiver, Protocol::Ble4);
  const double p =
      ble_noncollision_prob(receiver, sender, graph, fleet, model.params(), collision_floor);
  return link_delay(model, fleet, sender, receiver, Protocol::Ble4, p);
}

LinkDelay avg_link_delay_wifi(const DelayModel& model, std::span<const Uav> fleet,
                              const LinkGraph& graph, int sender, int receiver,
                              double collision_floor) {
  require_delivery(graph, fleet, sender, receiver, Protocol::Wifi);
  const double p =
      wifi_noncollision_prob(receiver, sender, graph, fleet, model.params(), collision_floor);
  return link_delay(model, fleet, sender, receiver, Protocol::Wifi, p);
}

}  // namespace ridsim
