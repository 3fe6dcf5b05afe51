#include "ridsim/airspace.hpp"

#include <cmath>
#include <numbers>

#include "ridsim/error.hpp"

namespace ridsim {

namespace {

constexpr std::uint64_t kMobilityStream = 0x6d6f62;  // "mob"

double reflect(double v, double lo, double hi) {
  const double span = hi - lo;
  if (span <= 0.0) {
    return lo;
  }
  while (v < lo || v > hi) {
    if (v < lo) {
      v = 2.0 * lo - v;
    }
    if (v > hi) {
      v = 2.0 * hi - v;
    }
  }
  return v;
}

}  // namespace

double Scenario::diagonal_m() const {
  const double h = altitude_max_m - altitude_min_m;
  return std::sqrt(2.0 * side_m * side_m + h * h);
}

bool Scenario::contains(const Vec3& p) const {
  return p.x >= 0.0 && p.x <= side_m && p.y >= 0.0 && p.y <= side_m && p.z >= altitude_min_m &&
         p.z <= altitude_max_m;
}

void populate_fleet(Scenario& scenario, int count, Rng& rng, double tx_power_dbm,
                    int wifi_channel) {
  wifi_channel_index(wifi_channel);
  std::uniform_real_distribution<double> horiz(0.0, scenario.side_m);
  std::uniform_real_distribution<double> alt(scenario.altitude_min_m, scenario.altitude_max_m);
  scenario.fleet.clear();
  for (int k = 0; k < count; ++k) {
    Uav u;
    u.id = k;
    u.position.x = horiz(rng);
    u.position.y = horiz(rng);
    u.position.z = alt(rng);
    u.tx_power_dbm = tx_power_dbm;
    u.wifi_channel = wifi_channel;
    scenario.fleet.push_back(u);
  }
}

void step_mobility(Scenario& scenario, Rng& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> speed(0.0, scenario.max_speed_mps);
  for (Uav& u : scenario.fleet) {
    // Uniform direction on the sphere.
    const double cz = unit(rng);
    const double phi = angle(rng);
    const double r = std::sqrt(std::max(0.0, 1.0 - cz * cz));
    const double dist = speed(rng) * scenario.step_seconds;
    u.position.x = reflect(u.position.x + dist * r * std::cos(phi), 0.0, scenario.side_m);
    u.position.y = reflect(u.position.y + dist * r * std::sin(phi), 0.0, scenario.side_m);
    u.position.z = reflect(u.position.z + dist * cz, scenario.altitude_min_m,
                           scenario.altitude_max_m);
  }
}

Assignment Assignment::of(Protocol protocol, int rate) {
  Assignment a;
  a.indicator = protocol == Protocol::Ble4 ? std::array<int, 2>{1, 0} : std::array<int, 2>{0, 1};
  a.rate = {rate, rate};
  return a;
}

void check_assignment(const Assignment& a, int uav_id, int psi_max) {
  for (int v : a.indicator) {
    if (v != 0 && v != 1) {
      throw ConstraintViolation("binary-indicator", uav_id);
    }
  }
  if (a.indicator[0] + a.indicator[1] != 1) {
    throw ConstraintViolation("single-protocol", uav_id);
  }
  const int rate = a.active_rate();
  if (rate < 1) {
    throw ConstraintViolation("positive-integer-rate", uav_id);
  }
  if (rate > psi_max) {
    throw ConstraintViolation("rate-bound", uav_id);
  }
}

void apply_assignment(Uav& uav, const Assignment& a) {
  uav.protocol = a.protocol();
  uav.rate = a.active_rate();
}

DelayReport compute_delay_report(const DelayModel& model, std::span<const Uav> fleet,
                                 const LinkGraph& graph, const ReportOptions& options) {
  const int m = static_cast<int>(fleet.size());
  const double slot_ms = model.params().slot_ms();
  DelayReport rep;
  rep.per_uav_mean_ms.assign(m, 0.0);
  rep.neighbor_count.assign(m, 0);
  for (int j = 0; j < m; ++j) {
    const Protocol proto = fleet[j].protocol;
    const auto& targets = graph.deliver_to(j, proto);
    rep.neighbor_count[j] = static_cast<int>(targets.size());
    if (targets.empty()) {
      ++rep.no_neighbor_count;
      continue;
    }
    double sum = 0.0;
    for (int i : targets) {
      LinkDelay ld = proto == Protocol::Ble4
                         ? avg_link_delay_ble(model, fleet, graph, j, i, options.collision_floor)
                         : avg_link_delay_wifi(model, fleet, graph, j, i, options.collision_floor);
      if (ld.reachable) {
        sum += ld.expected_delay_slots * slot_ms;
      } else {
        ++rep.unreachable_count;
        sum += options.undeliverable_delay_ms;
      }
      rep.per_link.push_back(ld);
    }
    rep.per_uav_mean_ms[j] = sum / static_cast<double>(targets.size());
  }
  double total = 0.0;
  for (double v : rep.per_uav_mean_ms) {
    total += v;
  }
  rep.system_mean_ms = m > 0 ? total / m : 0.0;
  return rep;
}

ObjectiveResult evaluate_objective(Scenario scenario,
                                   std::span<const std::vector<Assignment>> schedule,
                                   const DelayModel& model, const RadioConfig& radio,
                                   const ReportOptions& options, int psi_max) {
  for (const auto& step : schedule) {
    if (step.size() != scenario.fleet.size()) {
      throw InvalidArgument("schedule step does not cover every UAV");
    }
    for (std::size_t j = 0; j < step.size(); ++j) {
      check_assignment(step[j], scenario.fleet[j].id, psi_max);
    }
  }
  ObjectiveResult out;
  if (schedule.empty()) {
    return out;
  }
  FleetEnv env(model, radio, options);
  env.reset(std::move(scenario));
  double total = 0.0;
  for (std::size_t t = 0; t < schedule.size(); ++t) {
    env.assign(schedule[t]);
    const DelayReport rep = env.report();
    total += rep.system_mean_ms;
    out.no_neighbor_events += rep.no_neighbor_count;
    out.unreachable_links += rep.unreachable_count;
    for (std::size_t j = 0; j < rep.neighbor_count.size(); ++j) {
      if (rep.neighbor_count[j] == 0) {
        out.diagnostics.push_back("step " + std::to_string(t) + ": UAV " +
                                  std::to_string(env.fleet()[j].id) + " has no neighbors");
      }
    }
    if (t + 1 < schedule.size()) {
      env.advance();
    }
  }
  out.value_ms = total / static_cast<double>(schedule.size());
  return out;
}

FleetEnv::FleetEnv(const DelayModel& model, RadioConfig radio, ReportOptions options)
    : model_(&model), radio_(radio), options_(options) {}

void FleetEnv::reset(Scenario scenario) {
  scenario_ = std::move(scenario);
  mobility_rng_.seed(mix_seed(scenario_.seed, kMobilityStream));
  step_ = 0;
  rebuild();
}

void FleetEnv::assign(std::span<const Assignment> assignments) {
  if (assignments.size() != scenario_.fleet.size()) {
    throw InvalidArgument("assignment count does not match fleet size");
  }
  for (std::size_t j = 0; j < assignments.size(); ++j) {
    apply_assignment(scenario_.fleet[j], assignments[j]);
  }
  rebuild();
}

DelayReport FleetEnv::report() const {
  return compute_delay_report(*model_, scenario_.fleet, graph_, options_);
}

void FleetEnv::advance() {
  step_mobility(scenario_, mobility_rng_);
  ++step_;
  rebuild();
}

void FleetEnv::rebuild() {
  graph_ = build_link_graph(scenario_.fleet, radio_,
                            Shadowing(scenario_.seed, static_cast<std::uint64_t>(step_)));
}

}  // namespace ridsim
