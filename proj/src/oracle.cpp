#include "ridsim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ridsim/error.hpp"

namespace ridsim::oracle {

namespace {

using Kind = TimelineEvent::Kind;

void sort_chronologically(std::vector<TimelineEvent>& events) {
  std::stable_sort(events.begin(), events.end(),
                   [](const TimelineEvent& a, const TimelineEvent& b) {
                     return a.start_slot < b.start_slot;
                   });
}

// Channel the receiver listens on at each slot of [base, base + span), -1 if idle.
std::vector<int> listening_map(std::span<const TimelineEvent> events, Slot base, Slot span) {
  std::vector<int> listen(span, -1);
  for (const auto& e : events) {
    if (e.kind != Kind::RxWindow) {
      continue;
    }
    for (Slot s = e.start_slot; s < e.start_slot + e.duration_slots; ++s) {
      if (s >= base && s < base + span) {
        listen[s - base] = e.channel;
      }
    }
  }
  return listen;
}

bool fully_heard(const std::vector<int>& listen, Slot base, const TimelineEvent& pkt) {
  for (Slot s = pkt.start_slot; s < pkt.start_slot + pkt.duration_slots; ++s) {
    if (s < base || s - base >= listen.size() || listen[s - base] != pkt.channel) {
      return false;
    }
  }
  return true;
}

// Scanner windows: channel `channels[k]` is heard during
// [m * cycle + k * stride, m * cycle + k * stride + width) for every m >= 0.
void add_scan_windows(std::vector<TimelineEvent>& out, const std::array<int, 3>& channels,
                      Slot cycle, Slot stride, Slot width, Slot until) {
  for (Slot m = 0; m * cycle <= until; ++m) {
    for (Slot k = 0; k < 3; ++k) {
      out.push_back({Kind::RxWindow, channels[k], m * cycle + k * stride, width});
    }
  }
}

}  // namespace

std::vector<TimelineEvent> ble_timeline(Slot t0, int psi, const SlotParams& params,
                                        bool randomized_rd, Rng* rng) {
  if (randomized_rd && rng == nullptr) {
    throw InvalidArgument("randomized advertising delay needs a random source");
  }
  const Slot interval = ble_interval(psi, params);
  const Slot end = t0 + params.t_gnss;
  std::vector<TimelineEvent> events;
  std::uniform_int_distribution<Slot> jitter(0, params.ble_rd);
  for (Slot event_start = t0; event_start <= end;) {
    for (Slot c = 0; c < 3; ++c) {
      const Slot pdu = event_start + c * (params.ble_ap + params.ble_pi);
      if (pdu <= end) {
        events.push_back({Kind::TxPacket, kBleChannels[c], pdu, params.ble_ap});
      }
    }
    event_start += interval;
    if (randomized_rd) {
      event_start += jitter(*rng);
    }
  }
  add_scan_windows(events, kBleChannels, params.ble_scan_cycle(), params.ble_si, params.ble_sw,
                   end + params.ble_ap);
  sort_chronologically(events);
  return events;
}

std::array<ChannelMatchSet, 3> walk_ble_timeline(Slot t0, int psi, const SlotParams& params,
                                                 bool randomized_rd, Rng* rng) {
  const auto events = ble_timeline(t0, psi, params, randomized_rd, rng);
  const Slot span = params.t_gnss + params.ble_ap + 1;
  const auto listen = listening_map(events, t0, span);
  std::array<ChannelMatchSet, 3> out;
  for (int c = 0; c < 3; ++c) {
    out[c].channel = kBleChannels[c];
  }
  for (const auto& e : events) {
    if (e.kind == Kind::TxPacket && fully_heard(listen, t0, e)) {
      out[e.channel - 37].slots.push_back(e.start_slot);
    }
  }
  return out;
}

std::vector<TimelineEvent> wifi_timeline(Slot t0, int psi, int channel, const SlotParams& params) {
  wifi_channel_index(channel);
  const Slot interval = wifi_interval(psi, params);
  const Slot end = t0 + params.t_gnss;
  std::vector<TimelineEvent> events;
  for (Slot s = t0; s <= end; s += interval) {
    events.push_back({Kind::TxPacket, channel, s, params.wifi_bd});
  }
  add_scan_windows(events, kWifiChannels, params.wifi_scan_cycle(),
                   params.wifi_ts + params.wifi_ct, params.wifi_ts, end + params.wifi_bd);
  sort_chronologically(events);
  return events;
}

ChannelMatchSet walk_wifi_timeline(Slot t0, int psi, int channel, const SlotParams& params) {
  const auto events = wifi_timeline(t0, psi, channel, params);
  const Slot span = params.t_gnss + params.wifi_bd + 1;
  const auto listen = listening_map(events, t0, span);
  ChannelMatchSet out;
  out.channel = channel;
  for (const auto& e : events) {
    if (e.kind == Kind::TxPacket && fully_heard(listen, t0, e)) {
      out.slots.push_back(e.start_slot);
    }
  }
  return out;
}

double mc_expected_delay(std::span<const double> match_delays, double p, double t_gnss,
                         int trials, Rng& rng) {
  if (trials < 1) {
    throw InvalidArgument("trials must be >= 1");
  }
  if (match_delays.empty() || p <= 0.0) {
    return kUnreachable;
  }
  std::bernoulli_distribution survives(p);
  double total = 0.0;
  for (int t = 0; t < trials; ++t) {
    double shift = 0.0;
    for (;;) {
      bool done = false;
      for (double d : match_delays) {
        if (survives(rng)) {
          total += d + shift;
          done = true;
          break;
        }
      }
      if (done) {
        break;
      }
      shift += t_gnss;
    }
  }
  return total / trials;
}

CollisionEstimate mc_noncollision(std::span<const int> interferer_rates, Slot duration,
                                  Slot t_gnss, int trials, Rng& rng) {
  if (trials < 1) {
    throw InvalidArgument("trials must be >= 1");
  }
  const double cycle = static_cast<double>(t_gnss);
  const double len = static_cast<double>(duration);
  std::uniform_real_distribution<double> phase(0.0, cycle);
  int clean = 0;
  for (int t = 0; t < trials; ++t) {
    // Target packet starts at 0; interferer packets overlap it when their start
    // lies within `len` of 0 on the circular cycle.
    bool hit = false;
    for (int rate : interferer_rates) {
      const double first = phase(rng);
      const double spacing = cycle / rate;
      for (int m = 0; m < rate && !hit; ++m) {
        const double start = std::fmod(first + m * spacing, cycle);
        const double gap = std::min(start, cycle - start);
        hit = gap < len;
      }
    }
    clean += hit ? 0 : 1;
  }
  CollisionEstimate est;
  est.probability = static_cast<double>(clean) / trials;
  est.standard_error = std::sqrt(est.probability * (1.0 - est.probability) / trials);
  return est;
}

ExhaustiveResult exhaustive_optimize(const Scenario& scenario, const DelayModel& model,
                                     const RadioConfig& radio, const ReportOptions& options,
                                     int psi_max) {
  const int m = static_cast<int>(scenario.fleet.size());
  const auto actions = static_cast<std::uint64_t>(2 * psi_max);
  std::uint64_t total = 1;
  for (int j = 0; j < m; ++j) {
    total *= actions;
    if (total > 1'000'000 || m > 3) {
      throw TooLarge("exhaustive search over " + std::to_string(m) + " UAVs with " +
                     std::to_string(actions) + " actions each is too large");
    }
  }
  const auto decode = [psi_max](std::uint64_t a) {
    const auto proto = a / static_cast<std::uint64_t>(psi_max) == 0 ? Protocol::Ble4 : Protocol::Wifi;
    return Assignment::of(proto, 1 + static_cast<int>(a % static_cast<std::uint64_t>(psi_max)));
  };

  FleetEnv env(model, radio, options);
  env.reset(scenario);
  ExhaustiveResult out;
  out.objective_ms = std::numeric_limits<double>::infinity();
  std::vector<Assignment> joint(m);
  for (std::uint64_t code = 0; code < total; ++code) {
    // First UAV is the most significant digit so `code` order is lexicographic.
    std::uint64_t rest = code;
    for (int j = m - 1; j >= 0; --j) {
      joint[j] = decode(rest % actions);
      rest /= actions;
    }
    env.assign(joint);
    const double value = env.report().system_mean_ms;
    ++out.evaluated;
    if (value < out.objective_ms) {
      out.objective_ms = value;
      out.best = joint;
    }
  }
  if (m == 0) {
    out.objective_ms = 0.0;
  }
  return out;
}

}  // namespace ridsim::oracle
