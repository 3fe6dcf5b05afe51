#include "ridsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "ridsim/error.hpp"

namespace ridsim {

using nlohmann::json;

namespace {

// Reads keys from one JSON object and remembers which were consumed so the
// leftovers can be reported as unknown.
class Block {
 public:
  Block(const json& doc, std::string name) : name_(std::move(name)) {
    if (doc.is_null()) {
      obj_ = json::object();
    } else if (!doc.is_object()) {
      throw ConfigError("'" + name_ + "' must be an object");
    } else {
      obj_ = doc;
    }
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) {
      return;
    }
    try {
      if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) {
          throw ConfigError("");
        }
        if constexpr (std::is_unsigned_v<T>) {
          if (it->is_number_unsigned()) {
            out = it->template get<T>();
          } else if (it->template get<std::int64_t>() >= 0) {
            out = static_cast<T>(it->template get<std::int64_t>());
          } else {
            throw ConfigError("");
          }
        } else {
          out = it->template get<T>();
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) {
          throw ConfigError("");
        }
        out = it->template get<T>();
      } else {
        out = it->template get<T>();
      }
    } catch (const std::exception&) {
      throw ConfigError("'" + name_ + "." + key + "' has the wrong type: " + it->dump());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ConfigError("unknown key '" + name_ + "." + it.key() + "'");
      }
    }
  }

 private:
  std::string name_;
  json obj_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw ConfigError(what);
  }
}

void require_sides(const std::vector<double>& sides, const std::string& what) {
  require(!sides.empty(), what + " must not be empty");
  for (double s : sides) {
    require(s > 0.0, what + " entries must be positive");
  }
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

madqn::EpisodeConfig RunConfig::episodes(const std::vector<double>& sides) const {
  madqn::EpisodeConfig e;
  e.num_uavs = scenario.num_uavs;
  e.sides_m = sides;
  e.altitude_min_m = scenario.altitude_min_m;
  e.altitude_max_m = scenario.altitude_max_m;
  e.max_speed_mps = scenario.max_speed_mps;
  e.step_seconds = scenario.step_seconds;
  e.tx_power_dbm = radio.tx_power_dbm;
  e.wifi_channel = scenario.wifi_channel;
  return e;
}

RunConfig parse_config(const json& doc) {
  RunConfig c;
  Block root(doc, "config");

  const json empty;
  const json* s = root.child("scenario");
  Block sc(s ? *s : empty, "scenario");
  sc.read("num_uavs", c.scenario.num_uavs);
  sc.read("side_m", c.scenario.side_m);
  sc.read("altitude_min_m", c.scenario.altitude_min_m);
  sc.read("altitude_max_m", c.scenario.altitude_max_m);
  sc.read("max_speed_mps", c.scenario.max_speed_mps);
  sc.read("step_seconds", c.scenario.step_seconds);
  sc.read("steps", c.scenario.steps);
  sc.read("wifi_channel", c.scenario.wifi_channel);
  sc.read("seed", c.scenario.seed);
  sc.finish();

  const json* p = root.child("protocol");
  Block pr(p ? *p : empty, "protocol");
  auto& t = c.protocol;
  pr.read("delta_ms", t.delta_ms);
  pr.read("t_gnss_ms", t.t_gnss_ms);
  pr.read("ble_adv_pdu_ms", t.ble_ap_ms);
  pr.read("ble_pdu_interval_ms", t.ble_pi_ms);
  pr.read("ble_random_delay_ms", t.ble_rd_ms);
  pr.read("ble_scan_window_ms", t.ble_sw_ms);
  pr.read("ble_scan_interval_ms", t.ble_si_ms);
  pr.read("wifi_beacon_ms", t.wifi_bd_ms);
  pr.read("wifi_dwell_ms", t.wifi_ts_ms);
  pr.read("wifi_switch_ms", t.wifi_ct_ms);
  pr.finish();

  const json* r = root.child("radio");
  Block ra(r ? *r : empty, "radio");
  ra.read("path_loss_exponent", c.radio.path_loss.exponent);
  ra.read("shadow_sigma_db", c.radio.path_loss.sigma_db);
  ra.read("pl0_db", c.radio.path_loss.pl0_db);
  ra.read("reference_m", c.radio.path_loss.reference_m);
  ra.read("ble_sensitivity_dbm", c.radio.ble_sensitivity_dbm);
  ra.read("wifi_sensitivity_dbm", c.radio.wifi_sensitivity_dbm);
  ra.read("tx_power_dbm", c.radio.tx_power_dbm);
  ra.read("collision_floor", c.radio.collision_floor);
  ra.read("undeliverable_delay_ms", c.report.undeliverable_delay_ms);
  ra.finish();
  c.report.collision_floor = c.radio.collision_floor;

  const json* tr = root.child("training");
  Block tb(tr ? *tr : empty, "training");
  auto& k = c.training;
  tb.read("episodes", k.episodes);
  tb.read("steps_per_episode", k.steps_per_episode);
  tb.read("gamma", k.gamma);
  tb.read("learning_rate", k.adam.learning_rate);
  tb.read("adam_beta1", k.adam.beta1);
  tb.read("adam_beta2", k.adam.beta2);
  tb.read("adam_epsilon", k.adam.epsilon);
  tb.read("batch_size", k.batch_size);
  tb.read("buffer_capacity", k.buffer_capacity);
  tb.read("min_fill", k.min_fill);
  tb.read("tau", k.tau);
  tb.read("epsilon_init", k.epsilon_init);
  tb.read("epsilon_final", k.epsilon_final);
  tb.read("epsilon_decay_episodes", k.epsilon_decay_episodes);
  tb.read("hidden", k.hidden);
  tb.read("reward_alpha", k.reward_alpha);
  tb.read("reward_beta", k.reward_beta);
  tb.read("n_max", k.observation.n_max);
  tb.read("distance_scale_m", k.observation.distance_scale_m);
  tb.finish();

  const json* e = root.child("experiment");
  Block ex(e ? *e : empty, "experiment");
  auto& x = c.experiment;
  ex.read("psi_max", x.psi_max);
  ex.read("sweep_sides_m", x.sweep_sides_m);
  ex.read("compare_sides_m", x.compare_sides_m);
  ex.read("replicates", x.replicates);
  ex.read("ble_rate", x.ble_rate);
  ex.read("wifi_rate", x.wifi_rate);
  ex.read("eval_seeds", x.eval_seeds);
  ex.read("eval_steps", x.eval_steps);
  ex.read("high_density_sides_m", x.high_density_sides_m);
  ex.read("low_density_sides_m", x.low_density_sides_m);
  ex.read("dynamic_sides_m", x.dynamic_sides_m);
  ex.read("verify_configs", x.verify_configs);
  ex.read("verify_randomized_trials", x.verify_randomized_trials);
  ex.finish();
  root.finish();

  k.observation.psi_max = x.psi_max;
  k.seed = c.scenario.seed;

  // Validation
  const auto& S = c.scenario;
  require(S.num_uavs >= 1, "scenario.num_uavs must be >= 1");
  require(S.side_m > 0.0, "scenario.side_m must be positive");
  require(S.altitude_min_m <= S.altitude_max_m, "scenario altitude band is inverted");
  require(S.max_speed_mps >= 0.0, "scenario.max_speed_mps must be >= 0");
  require(S.step_seconds > 0.0, "scenario.step_seconds must be positive");
  require(S.steps >= 1, "scenario.steps must be >= 1");
  for (double v : {t.delta_ms, t.t_gnss_ms, t.ble_ap_ms, t.ble_pi_ms, t.ble_sw_ms, t.ble_si_ms,
                   t.wifi_bd_ms, t.wifi_ts_ms, t.wifi_ct_ms}) {
    require(v > 0.0, "protocol durations must be positive");
  }
  require(t.ble_rd_ms >= 0.0, "protocol.ble_random_delay_ms must be >= 0");
  try {
    wifi_channel_index(S.wifi_channel);
    c.slots().validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& err) {
    throw ConfigError(err.what());
  }
  require(c.radio.path_loss.reference_m > 0.0, "radio.reference_m must be positive");
  require(c.radio.path_loss.sigma_db >= 0.0, "radio.shadow_sigma_db must be >= 0");
  require(c.radio.collision_floor > 0.0 && c.radio.collision_floor < 1.0,
          "radio.collision_floor must lie in (0, 1)");
  require(c.report.undeliverable_delay_ms >= 0.0, "radio.undeliverable_delay_ms must be >= 0");
  require(k.episodes >= 0 && k.steps_per_episode >= 1, "training episode counts out of range");
  require(k.gamma >= 0.0 && k.gamma <= 1.0, "training.gamma must lie in [0, 1]");
  require(k.adam.learning_rate > 0.0, "training.learning_rate must be positive");
  require(k.batch_size >= 1, "training.batch_size must be >= 1");
  require(k.buffer_capacity >= 1, "training.buffer_capacity must be >= 1");
  require(k.min_fill >= static_cast<std::size_t>(k.batch_size) && k.min_fill <= k.buffer_capacity,
          "training.min_fill must lie in [batch_size, buffer_capacity]");
  require(k.tau >= 0.0 && k.tau <= 1.0, "training.tau must lie in [0, 1]");
  require(k.epsilon_final >= 0.0 && k.epsilon_init <= 1.0 && k.epsilon_final <= k.epsilon_init,
          "training epsilon range must satisfy 0 <= final <= init <= 1");
  require(k.epsilon_decay_episodes >= 0, "training.epsilon_decay_episodes must be >= 0");
  require(!k.hidden.empty(), "training.hidden must list at least one layer");
  for (int h : k.hidden) {
    require(h >= 1, "training.hidden sizes must be positive");
  }
  require(k.observation.n_max >= 1, "training.n_max must be >= 1");
  require(x.psi_max >= 1, "experiment.psi_max must be >= 1");
  require(x.replicates >= 1, "experiment.replicates must be >= 1");
  require(x.ble_rate >= 1 && x.ble_rate <= x.psi_max, "experiment.ble_rate out of range");
  require(x.wifi_rate >= 1 && x.wifi_rate <= x.psi_max, "experiment.wifi_rate out of range");
  require(x.eval_seeds >= 1 && x.eval_steps >= 1, "experiment eval counts must be >= 1");
  require_sides(x.high_density_sides_m, "experiment.high_density_sides_m");
  require_sides(x.low_density_sides_m, "experiment.low_density_sides_m");
  require_sides(x.sweep_sides_m, "experiment.sweep_sides_m");
  require_sides(x.compare_sides_m, "experiment.compare_sides_m");
  require_sides(x.dynamic_sides_m, "experiment.dynamic_sides_m");
  require(x.verify_configs >= 1 && x.verify_randomized_trials >= 0,
          "experiment verify counts out of range");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path);
  }
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const SlotParams& s) {
  return {{"delta_us", s.delta_us}, {"t_gnss", s.t_gnss},   {"ble_ap", s.ble_ap},
          {"ble_pi", s.ble_pi},     {"ble_rd", s.ble_rd},   {"ble_sw", s.ble_sw},
          {"ble_si", s.ble_si},     {"wifi_bd", s.wifi_bd}, {"wifi_ts", s.wifi_ts},
          {"wifi_ct", s.wifi_ct}};
}

json to_json(const RunConfig& c) {
  const auto& S = c.scenario;
  const auto& t = c.protocol;
  const auto& k = c.training;
  const auto& x = c.experiment;
  json j;
  j["scenario"] = {{"num_uavs", S.num_uavs},
                   {"side_m", S.side_m},
                   {"altitude_min_m", S.altitude_min_m},
                   {"altitude_max_m", S.altitude_max_m},
                   {"max_speed_mps", S.max_speed_mps},
                   {"step_seconds", S.step_seconds},
                   {"steps", S.steps},
                   {"wifi_channel", S.wifi_channel},
                   {"seed", S.seed}};
  j["protocol"] = {{"delta_ms", t.delta_ms},
                   {"t_gnss_ms", t.t_gnss_ms},
                   {"ble_adv_pdu_ms", t.ble_ap_ms},
                   {"ble_pdu_interval_ms", t.ble_pi_ms},
                   {"ble_random_delay_ms", t.ble_rd_ms},
                   {"ble_scan_window_ms", t.ble_sw_ms},
                   {"ble_scan_interval_ms", t.ble_si_ms},
                   {"wifi_beacon_ms", t.wifi_bd_ms},
                   {"wifi_dwell_ms", t.wifi_ts_ms},
                   {"wifi_switch_ms", t.wifi_ct_ms}};
  j["radio"] = {{"path_loss_exponent", c.radio.path_loss.exponent},
                {"shadow_sigma_db", c.radio.path_loss.sigma_db},
                {"pl0_db", c.radio.path_loss.pl0_db},
                {"reference_m", c.radio.path_loss.reference_m},
                {"ble_sensitivity_dbm", c.radio.ble_sensitivity_dbm},
                {"wifi_sensitivity_dbm", c.radio.wifi_sensitivity_dbm},
                {"tx_power_dbm", c.radio.tx_power_dbm},
                {"collision_floor", c.radio.collision_floor},
                {"undeliverable_delay_ms", c.report.undeliverable_delay_ms}};
  j["training"] = {{"episodes", k.episodes},
                   {"steps_per_episode", k.steps_per_episode},
                   {"gamma", k.gamma},
                   {"learning_rate", k.adam.learning_rate},
                   {"adam_beta1", k.adam.beta1},
                   {"adam_beta2", k.adam.beta2},
                   {"adam_epsilon", k.adam.epsilon},
                   {"batch_size", k.batch_size},
                   {"buffer_capacity", k.buffer_capacity},
                   {"min_fill", k.min_fill},
                   {"tau", k.tau},
                   {"epsilon_init", k.epsilon_init},
                   {"epsilon_final", k.epsilon_final},
                   {"epsilon_decay_episodes", k.epsilon_decay_episodes},
                   {"hidden", k.hidden},
                   {"reward_alpha", k.reward_alpha},
                   {"reward_beta", k.reward_beta},
                   {"n_max", k.observation.n_max},
                   {"distance_scale_m", k.observation.distance_scale_m}};
  j["experiment"] = {{"psi_max", x.psi_max},
                     {"sweep_sides_m", x.sweep_sides_m},
                     {"compare_sides_m", x.compare_sides_m},
                     {"replicates", x.replicates},
                     {"ble_rate", x.ble_rate},
                     {"wifi_rate", x.wifi_rate},
                     {"eval_seeds", x.eval_seeds},
                     {"eval_steps", x.eval_steps},
                     {"high_density_sides_m", x.high_density_sides_m},
                     {"low_density_sides_m", x.low_density_sides_m},
                     {"dynamic_sides_m", x.dynamic_sides_m},
                     {"verify_configs", x.verify_configs},
                     {"verify_randomized_trials", x.verify_randomized_trials}};
  return j;
}

std::uint64_t policy_hash(const RunConfig& c) {
  const auto& k = c.training;
  json j = {{"num_uavs", c.scenario.num_uavs},
            {"hidden", k.hidden},
            {"n_max", k.observation.n_max},
            {"psi_max", k.observation.psi_max},
            {"distance_scale_m", k.observation.distance_scale_m}};
  return fnv1a(j.dump());
}

}  // namespace ridsim
