#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ridsim/config.hpp"
#include "ridsim/error.hpp"
#include "ridsim/experiments.hpp"

using namespace ridsim;
using nlohmann::json;

TEST_CASE("defaults echo the reference parameters") {
  const RunConfig c = parse_config(json::object());
  CHECK(c.scenario.num_uavs == 10);
  CHECK(c.training.episodes == 1000);
  CHECK(c.training.steps_per_episode == 100);
  CHECK(c.training.gamma == 0.95);
  CHECK(c.training.adam.learning_rate == 1e-4);
  CHECK(c.training.batch_size == 256);
  CHECK(c.training.buffer_capacity == 25000);
  CHECK(c.training.min_fill == 25000);
  CHECK(c.training.tau == 0.999);
  CHECK(c.training.hidden == std::vector<int>{256, 128});
  CHECK(c.radio.ble_sensitivity_dbm == -85.0);
  CHECK(c.radio.wifi_sensitivity_dbm == -105.0);
  CHECK(c.slots().ble_si == 64);
  const json echoed = to_json(c);
  CHECK(echoed["training"]["soft_update_tau"].is_null());
  CHECK(echoed["training"]["tau"] == 0.999);
  CHECK(parse_config(echoed).training.batch_size == 256);
}

TEST_CASE("strict schema") {
  CHECK_THROWS_AS(parse_config(json::parse(R"({"scenario": {"uavs": 3}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"extra": {}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"scenario": {"num_uavs": "ten"}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"scenario": {"num_uavs": 2.5}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"protocol": {"wifi_dwell_ms": -1}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"scenario": {"wifi_channel": 3}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"training": {"min_fill": 10}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"scenario": {"seed": -4}})")), ConfigError);
  const auto c = parse_config(json::parse(R"({"scenario": {"seed": 18446744073709551615}})"));
  CHECK(c.scenario.seed == 18446744073709551615ULL);
}

TEST_CASE("config file loading") {
  const auto path = std::filesystem::temp_directory_path() / "ridsim_cfg_test.json";
  {
    std::ofstream out(path);
    out << "{\n  // comments are allowed\n  \"experiment\": {\"replicates\": 3}\n}\n";
  }
  CHECK(load_config(path.string()).experiment.replicates == 3);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config("/nonexistent/ridsim.json"), ConfigError);
}

TEST_CASE("number formatting and seeds") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(10000) == "10000");
  CHECK(replicate_seed(1, 0) != replicate_seed(1, 1));
  CHECK(replicate_seed(1, 0) != eval_seed(1, 0));
}

TEST_CASE("parallel_for fills every slot regardless of worker count") {
  for (int workers : {1, 3}) {
    std::vector<int> out(50, -1);
    parallel_for(out.size(), workers, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out[i] == static_cast<int>(i * i));
    }
  }
  CHECK_THROWS_AS(parallel_for(4, 2,
                               [](std::size_t i) {
                                 if (i == 2) {
                                   throw InvalidArgument("boom");
                                 }
                               }),
                  InvalidArgument);
}

TEST_CASE("sweep output is independent of worker count") {
  RunConfig c = parse_config(json::parse(
      R"({"scenario": {"steps": 3}, "experiment": {"replicates": 2, "psi_max": 10}})"));
  const auto a = rate_sweep(c, 1);
  const auto b = rate_sweep(c, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].delay_ms == b[i].delay_ms);
  }
}

TEST_CASE("verify passes on the default configuration") {
  RunConfig c = parse_config(json::parse(R"({"experiment": {"verify_configs": 20}})"));
  const auto rep = verify(c, 1);
  CHECK(rep.passed);
}
