#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ridsim/config.hpp"

namespace ridsim {

inline constexpr int kCsvSchemaVersion = 1;

/// Runs task(i) for i in [0, count) on `workers` threads. Each task writes only
/// its own result slot, so output order never depends on scheduling. The first
/// exception (lowest index) is rethrown after all workers stop.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task);

/// Seed for replicate `r` of a sweep. Shared by every sweep point so that
/// protocols and rates are compared on the same fleets.
std::uint64_t replicate_seed(std::uint64_t base, int replicate);
/// Held-out seeds for policy evaluation (disjoint stream from training).
std::uint64_t eval_seed(std::uint64_t base, int k);

struct SweepRow {
  Protocol protocol = Protocol::Ble4;
  int psi = 1;
  double side_m = 0.0;
  int replicate = 0;
  double delay_ms = 0.0;
};

struct SweepSummary {
  Protocol protocol = Protocol::Ble4;
  int psi = 1;
  double side_m = 0.0;
  int count = 0;
  double mean_ms = 0.0;
  double std_ms = 0.0;
};

std::vector<SweepRow> rate_sweep(const RunConfig& config, int workers);
std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows);
/// Rate with the lowest mean delay for a protocol and side (lowest rate on ties).
int best_rate(const std::vector<SweepSummary>& summary, Protocol protocol, double side_m);

struct DensityRow {
  double side_m = 0.0;
  int replicate = 0;
  double ble_ms = 0.0;
  double wifi_ms = 0.0;
};

std::vector<DensityRow> density_compare(const RunConfig& config, int workers);

struct EvalRow {
  std::string regime;
  int seed_index = 0;
  double side_m = 0.0;
  double policy_ms = 0.0;
  double ble_ms = 0.0;
  double wifi_ms = 0.0;
};

/// Greedy-policy rollouts next to the fixed baselines in the high, low and
/// dynamic density regimes.
std::vector<EvalRow> evaluate_policy(const RunConfig& config, const madqn::Policy& policy,
                                     int workers);

struct VerifyReport {
  bool passed = true;
  std::vector<std::string> lines;
  double randomized_rd_mad_ms = 0.0;
};

/// Random valid slot parameters with scanner rotations of at most 128 slots.
SlotParams random_small_params(Rng& rng);

/// Analytical-versus-oracle checks on random small configurations and on the
/// active configuration.
VerifyReport verify(const RunConfig& config, int workers);

/// Output writers. Every writer creates `out_dir` if needed.
void write_sweep(const std::string& out_dir, const std::vector<SweepRow>& rows);
void write_density(const std::string& out_dir, const std::vector<DensityRow>& rows);
void write_curve(const std::string& out_dir, const std::vector<madqn::CurveRow>& rows);
void write_eval(const std::string& out_dir, const std::vector<EvalRow>& rows);
void write_manifest(const std::string& out_dir, const std::string& command,
                    const RunConfig& config, int workers,
                    const nlohmann::json& extra = nlohmann::json::object());

/// Shortest round-trippable decimal form used for every CSV number.
std::string format_number(double v);

}  // namespace ridsim
