#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ridsim/delay.hpp"
#include "ridsim/radio.hpp"
#include "ridsim/rng.hpp"

namespace ridsim {

struct Scenario {
  std::vector<Uav> fleet;
  double side_m = 1000.0;  // horizontal square side length
  double altitude_min_m = 30.0;
  double altitude_max_m = 120.0;
  double max_speed_mps = 20.0;
  double step_seconds = 1.0;
  int t_max = 100;
  std::uint64_t seed = 1;

  /// Diagonal of the flight volume.
  double diagonal_m() const;
  bool contains(const Vec3& p) const;
};

/// Places `count` UAVs uniformly inside the scenario volume, ids 0..count-1.
void populate_fleet(Scenario& scenario, int count, Rng& rng, double tx_power_dbm = 18.0,
                    int wifi_channel = 6);

/// Moves every UAV in a uniformly random 3-D direction at a uniform speed in
/// [0, max_speed], reflecting off the box faces.
void step_mobility(Scenario& scenario, Rng& rng);

/// Protocol indicators and rates for one UAV at one step.
struct Assignment {
  std::array<int, 2> indicator{1, 0};  // [ble4, wifi]
  std::array<int, 2> rate{1, 1};

  static Assignment of(Protocol protocol, int rate);
  Protocol protocol() const { return indicator[0] == 1 ? Protocol::Ble4 : Protocol::Wifi; }
  int active_rate() const { return rate[static_cast<int>(protocol())]; }
};

/// Throws ConstraintViolation ("binary-indicator", "single-protocol",
/// "positive-integer-rate", "rate-bound") if the assignment is infeasible.
void check_assignment(const Assignment& a, int uav_id, int psi_max);
void apply_assignment(Uav& uav, const Assignment& a);

struct ReportOptions {
  double collision_floor = 1e-6;
  // Charged for a link inside the delivery set whose match pattern leaves some
  // phase with no reception opportunity.
  double undeliverable_delay_ms = 10000.0;
};

struct DelayReport {
  std::vector<LinkDelay> per_link;
  std::vector<double> per_uav_mean_ms;  // indexed like the fleet
  std::vector<int> neighbor_count;      // |S_u| per UAV
  double system_mean_ms = 0.0;          // mean of per_uav_mean_ms
  int unreachable_count = 0;
  int no_neighbor_count = 0;
};

/// Delays of every sender to every receiver in its delivery set over its
/// active protocol, with per-UAV and fleet means in milliseconds.
DelayReport compute_delay_report(const DelayModel& model, std::span<const Uav> fleet,
                                 const LinkGraph& graph, const ReportOptions& options);

struct ObjectiveResult {
  double value_ms = 0.0;  // time average of the fleet-mean delay
  int no_neighbor_events = 0;
  int unreachable_links = 0;
  std::vector<std::string> diagnostics;
};

/// Time-averaged fleet delay for a schedule of assignments. `schedule[t][j]`
/// applies to fleet[j] at step t; the schedule length sets the horizon.
ObjectiveResult evaluate_objective(Scenario scenario,
                                   std::span<const std::vector<Assignment>> schedule,
                                   const DelayModel& model, const RadioConfig& radio,
                                   const ReportOptions& options, int psi_max);

/// Stepping environment shared by experiments and training: positions evolve
/// with seeded mobility and shadowing is redrawn per step.
class FleetEnv {
 public:
  FleetEnv(const DelayModel& model, RadioConfig radio, ReportOptions options);

  void reset(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  std::span<const Uav> fleet() const { return scenario_.fleet; }
  const LinkGraph& graph() const { return graph_; }
  const RadioConfig& radio() const { return radio_; }
  int step_index() const { return step_; }

  /// Sets every UAV's protocol and rate; the link graph is rebuilt.
  void assign(std::span<const Assignment> assignments);
  DelayReport report() const;
  /// Mobility update, new shadowing epoch.
  void advance();

 private:
  void rebuild();

  const DelayModel* model_;
  RadioConfig radio_;
  ReportOptions options_;
  Scenario scenario_;
  Rng mobility_rng_;
  int step_ = 0;
  LinkGraph graph_;
};

}  // namespace ridsim
