#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ridsim/config.hpp"
#include "ridsim/error.hpp"
#include "ridsim/experiments.hpp"

using namespace ridsim;

namespace {

enum Exit : int { kOk = 0, kConfig = 1, kVerify = 2, kNumeric = 3 };

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<int> replicates;
  int workers = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON run configuration (defaults if omitted)");
  cmd->add_option("--seed", c.seed, "Base seed, overrides scenario.seed");
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  cmd->add_option("--replicates", c.replicates, "Replicate count, overrides experiment.replicates")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber)
      ->capture_default_str();
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? parse_config(nlohmann::json::object())
                                        : load_config(c.config_path);
  if (c.seed) {
    cfg.scenario.seed = *c.seed;
    cfg.training.seed = *c.seed;
  }
  if (c.replicates) {
    cfg.experiment.replicates = *c.replicates;
  }
  return cfg;
}

void print_summary_file(const std::string& dir, const std::string& name) {
  std::ifstream in(std::filesystem::path(dir) / name);
  std::cout << in.rdbuf();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Remote ID broadcast delay simulator and protocol/rate learner"};
  app.require_subcommand(1);

  Common common;
  std::string checkpoint;

  auto* sweep = app.add_subcommand("rate-sweep", "Mean system delay over rates, protocols and extents");
  add_common(sweep, common);
  auto* density = app.add_subcommand("density-compare", "Fixed BLE 4 vs Wi-Fi across airspace sizes");
  add_common(density, common);
  auto* train = app.add_subcommand("train", "Train per-UAV Q-networks");
  add_common(train, common);
  auto* eval = app.add_subcommand("eval", "Evaluate a trained policy against fixed baselines");
  add_common(eval, common);
  eval->add_option("--checkpoint", checkpoint, "Policy checkpoint from `train`")->required();
  auto* ver = app.add_subcommand("verify", "Check analytical models against the oracles");
  add_common(ver, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    const RunConfig cfg = resolve(common);
    const int workers = common.workers;

    if (sweep->parsed()) {
      const auto rows = rate_sweep(cfg, workers);
      write_sweep(common.out, rows);
      write_manifest(common.out, "rate-sweep", cfg, workers);
      const auto summary = summarize(rows);
      for (double side : cfg.experiment.sweep_sides_m) {
        std::cout << "side " << format_number(side)
                  << " m: best BLE 4 rate = " << best_rate(summary, Protocol::Ble4, side)
                  << ", best Wi-Fi rate = " << best_rate(summary, Protocol::Wifi, side) << '\n';
      }
    } else if (density->parsed()) {
      write_density(common.out, density_compare(cfg, workers));
      write_manifest(common.out, "density-compare", cfg, workers);
      print_summary_file(common.out, "density_compare_summary.csv");
    } else if (train->parsed()) {
      const DelayModel model(cfg.slots());
      const auto episodes = cfg.episodes(cfg.experiment.dynamic_sides_m);
      const auto result = madqn::train(
          model, cfg.radio, cfg.report, episodes, cfg.training, [](const madqn::CurveRow& r) {
            if (r.episode % 10 == 0) {
              std::fprintf(stderr, "episode %d  reward %.4f  delay %.1f ms  eps %.3f  loss %g\n",
                           r.episode, r.mean_reward, r.system_delay_ms, r.epsilon, r.loss);
            }
          });
      write_curve(common.out, result.curve);
      const auto ckpt = (std::filesystem::path(common.out) / "policy.bin").string();
      madqn::save_policy(ckpt, result.policy, policy_hash(cfg));
      write_manifest(common.out, "train", cfg, workers,
                     {{"checkpoint", "policy.bin"}, {"gradient_updates", result.updates}});
    } else if (eval->parsed()) {
      const auto policy = madqn::load_policy(checkpoint, policy_hash(cfg));
      write_eval(common.out, evaluate_policy(cfg, policy, workers));
      write_manifest(common.out, "eval", cfg, workers, {{"checkpoint", checkpoint}});
      print_summary_file(common.out, "eval_summary.csv");
    } else if (ver->parsed()) {
      const auto report = verify(cfg, workers);
      for (const auto& line : report.lines) {
        std::cout << line << '\n';
      }
      std::cout << (report.passed ? "verify: PASS" : "verify: FAIL") << '\n';
      return report.passed ? kOk : kVerify;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ConstraintViolation& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const NonFiniteLoss& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return kNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kVerify;
  }
  return kOk;
}
