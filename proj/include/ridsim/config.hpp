#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "ridsim/airspace.hpp"
#include "ridsim/madqn.hpp"
#include "ridsim/protocol.hpp"
#include "ridsim/radio.hpp"

namespace ridsim {

struct ScenarioBlock {
  int num_uavs = 10;
  double side_m = 1000.0;
  double altitude_min_m = 30.0;
  double altitude_max_m = 120.0;
  double max_speed_mps = 20.0;
  double step_seconds = 1.0;
  int steps = 100;
  int wifi_channel = 6;
  std::uint64_t seed = 1;
};

struct ExperimentBlock {
  int psi_max = 10;
  std::vector<double> sweep_sides_m{1000.0};
  std::vector<double> compare_sides_m{100.0, 500.0, 1000.0, 1500.0, 2000.0, 3000.0, 5000.0, 10000.0};
  int replicates = 20;
  int ble_rate = 9;
  int wifi_rate = 10;
  // eval
  int eval_seeds = 5;
  int eval_steps = 100;
  std::vector<double> high_density_sides_m{100.0, 500.0, 1000.0};
  std::vector<double> low_density_sides_m{3000.0, 5000.0, 10000.0};
  // Training draws one of these per episode; the dynamic eval regime covers all of them.
  std::vector<double> dynamic_sides_m{100.0, 500.0, 1000.0, 3000.0, 5000.0, 10000.0};
  // verify
  int verify_configs = 100;
  int verify_randomized_trials = 20;
};

struct RunConfig {
  ScenarioBlock scenario;
  PhysicalTiming protocol;
  RadioConfig radio;
  ReportOptions report;
  madqn::TrainConfig training;
  ExperimentBlock experiment;

  SlotParams slots() const { return quantize(protocol); }
  madqn::EpisodeConfig episodes(const std::vector<double>& sides) const;
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw
/// ConfigError. Missing keys keep their defaults.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// Fully resolved config, every key present.
nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const SlotParams& slots);

/// Stable hash of the parts of the config a trained policy depends on.
std::uint64_t policy_hash(const RunConfig& config);

}  // namespace ridsim
