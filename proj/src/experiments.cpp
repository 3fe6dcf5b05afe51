#include "ridsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "ridsim/error.hpp"
#include "ridsim/oracle.hpp"

#ifndef RIDSIM_VERSION
#define RIDSIM_VERSION "unknown"
#endif

namespace ridsim {

using nlohmann::json;

namespace {

constexpr std::uint64_t kReplicateStream = 0x726570;  // "rep"
constexpr std::uint64_t kEvalStream = 0x6576616c;     // "eval"
constexpr std::uint64_t kVerifyStream = 0x766572;     // "ver"

std::ofstream open_csv(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw ConfigError("cannot write " + path.string());
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) {
    s += x;
  }
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) {
    return 0.0;
  }
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) {
    s += (x - m) * (x - m);
  }
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string join_slots(const std::vector<Slot>& v, std::size_t limit = 10) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < v.size() && i < limit; ++i) {
    os << (i ? "," : "") << v[i];
  }
  if (v.size() > limit) {
    os << ",...";
  }
  os << ']';
  return os.str();
}

std::vector<Slot> symmetric_difference(const std::vector<Slot>& a, const std::vector<Slot>& b) {
  std::vector<Slot> out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task) {
  const auto n_threads =
      static_cast<std::size_t>(std::max(1, std::min<int>(workers, static_cast<int>(count))));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      task(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::size_t err_index = count;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < n_threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(err_mutex);
          if (i < err_index) {
            err_index = i;
            err = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
  if (err) {
    std::rethrow_exception(err);
  }
}

std::uint64_t replicate_seed(std::uint64_t base, int replicate) {
  return mix_seed(base, kReplicateStream, static_cast<std::uint64_t>(replicate));
}

std::uint64_t eval_seed(std::uint64_t base, int k) {
  return mix_seed(base, kEvalStream, static_cast<std::uint64_t>(k));
}

// ---------------------------------------------------------------------------

std::vector<SweepRow> rate_sweep(const RunConfig& config, int workers) {
  const DelayModel model(config.slots());
  const auto& x = config.experiment;
  std::vector<SweepRow> rows;
  for (Protocol p : kProtocols) {
    for (double side : x.sweep_sides_m) {
      for (int psi = 1; psi <= x.psi_max; ++psi) {
        for (int r = 0; r < x.replicates; ++r) {
          rows.push_back({p, psi, side, r, 0.0});
        }
      }
    }
  }
  const auto episodes = config.episodes(x.sweep_sides_m);
  parallel_for(rows.size(), workers, [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.delay_ms = madqn::rollout_fixed(row.protocol, row.psi, model, config.radio, config.report,
                                        episodes, row.side_m, config.scenario.steps,
                                        replicate_seed(config.scenario.seed, row.replicate));
  });
  return rows;
}

std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows) {
  std::map<std::tuple<int, double, int>, std::vector<double>> groups;
  for (const auto& r : rows) {
    groups[{static_cast<int>(r.protocol), r.side_m, r.psi}].push_back(r.delay_ms);
  }
  std::vector<SweepSummary> out;
  for (const auto& [key, values] : groups) {
    SweepSummary s;
    s.protocol = static_cast<Protocol>(std::get<0>(key));
    s.side_m = std::get<1>(key);
    s.psi = std::get<2>(key);
    s.count = static_cast<int>(values.size());
    s.mean_ms = mean_of(values);
    s.std_ms = sample_std(values);
    out.push_back(s);
  }
  return out;
}

int best_rate(const std::vector<SweepSummary>& summary, Protocol protocol, double side_m) {
  int best = 0;
  double best_ms = 0.0;
  for (const auto& s : summary) {
    if (s.protocol != protocol || s.side_m != side_m) {
      continue;
    }
    if (best == 0 || s.mean_ms < best_ms || (s.mean_ms == best_ms && s.psi < best)) {
      best = s.psi;
      best_ms = s.mean_ms;
    }
  }
  if (best == 0) {
    throw InvalidArgument("no sweep rows for the requested protocol and side");
  }
  return best;
}

std::vector<DensityRow> density_compare(const RunConfig& config, int workers) {
  const DelayModel model(config.slots());
  const auto& x = config.experiment;
  std::vector<DensityRow> rows;
  for (double side : x.compare_sides_m) {
    for (int r = 0; r < x.replicates; ++r) {
      rows.push_back({side, r, 0.0, 0.0});
    }
  }
  const auto episodes = config.episodes(x.compare_sides_m);
  parallel_for(rows.size(), workers, [&](std::size_t i) {
    DensityRow& row = rows[i];
    const auto seed = replicate_seed(config.scenario.seed, row.replicate);
    row.ble_ms = madqn::rollout_fixed(Protocol::Ble4, x.ble_rate, model, config.radio,
                                      config.report, episodes, row.side_m, config.scenario.steps,
                                      seed);
    row.wifi_ms = madqn::rollout_fixed(Protocol::Wifi, x.wifi_rate, model, config.radio,
                                       config.report, episodes, row.side_m,
                                       config.scenario.steps, seed);
  });
  return rows;
}

std::vector<EvalRow> evaluate_policy(const RunConfig& config, const madqn::Policy& policy,
                                     int workers) {
  const DelayModel model(config.slots());
  const auto& x = config.experiment;
  std::vector<EvalRow> rows;
  const auto add = [&](const char* regime, const std::vector<double>& sides) {
    for (double side : sides) {
      for (int k = 0; k < x.eval_seeds; ++k) {
        rows.push_back({regime, k, side});
      }
    }
  };
  add("high", x.high_density_sides_m);
  add("low", x.low_density_sides_m);
  add("dynamic", x.dynamic_sides_m);
  const auto episodes = config.episodes(x.dynamic_sides_m);
  parallel_for(rows.size(), workers, [&](std::size_t i) {
    EvalRow& row = rows[i];
    const auto seed = eval_seed(config.scenario.seed, row.seed_index);
    row.policy_ms = madqn::rollout_policy(policy, model, config.radio, config.report, episodes,
                                          row.side_m, x.eval_steps, seed);
    row.ble_ms = madqn::rollout_fixed(Protocol::Ble4, x.ble_rate, model, config.radio,
                                      config.report, episodes, row.side_m, x.eval_steps, seed);
    row.wifi_ms = madqn::rollout_fixed(Protocol::Wifi, x.wifi_rate, model, config.radio,
                                       config.report, episodes, row.side_m, x.eval_steps, seed);
  });
  return rows;
}

// ---------------------------------------------------------------------------
// verify

SlotParams random_small_params(Rng& rng) {
  const auto pick = [&rng](Slot lo, Slot hi) {
    return std::uniform_int_distribution<Slot>(lo, hi)(rng);
  };
  SlotParams p;
  p.ble_ap = pick(1, 4);
  p.ble_pi = pick(1, 3);
  p.ble_sw = pick(p.ble_ap, p.ble_ap + 16);
  p.ble_si = pick(std::max(p.ble_sw, p.ble_ap + p.ble_pi), 42);
  p.ble_rd = pick(0, 10);
  p.wifi_bd = pick(1, 6);
  p.wifi_ts = pick(p.wifi_bd, 36);
  p.wifi_ct = pick(1, std::min<Slot>(6, 42 - p.wifi_ts));
  p.t_gnss = pick(200, 2000);
  p.validate();
  return p;
}

namespace {

struct OracleCase {
  SlotParams params;
  int psi = 1;
  Slot t0 = 0;
  std::string label;
};

// Empty string on agreement, otherwise a description of the first mismatches.
std::string compare_case(const OracleCase& c) {
  std::ostringstream os;
  const auto analytic = ble_match_all(c.t0, c.psi, c.params);
  const auto walked = oracle::walk_ble_timeline(c.t0, c.psi, c.params);
  for (int k = 0; k < 3; ++k) {
    if (analytic[k].slots != walked[k].slots) {
      os << c.label << " BLE ch" << analytic[k].channel << " psi=" << c.psi << " t0=" << c.t0
         << " A_hat=" << ble_interval(c.psi, c.params)
         << " differing slots=" << join_slots(symmetric_difference(analytic[k].slots, walked[k].slots))
         << " analytic=" << join_slots(analytic[k].slots)
         << " walker=" << join_slots(walked[k].slots) << "; ";
    }
  }
  const Slot b_hat = wifi_interval(c.psi, c.params);
  for (int ch : kWifiChannels) {
    const auto a = wifi_match_channel(c.t0, ch, b_hat, c.params);
    const auto w = oracle::walk_wifi_timeline(c.t0, c.psi, ch, c.params);
    if (a.slots != w.slots) {
      os << c.label << " Wi-Fi ch" << ch << " psi=" << c.psi << " t0=" << c.t0
         << " B_hat=" << b_hat
         << " differing slots=" << join_slots(symmetric_difference(a.slots, w.slots))
         << " analytic=" << join_slots(a.slots) << " walker=" << join_slots(w.slots) << "; ";
    }
  }
  return os.str();
}

double first_ble_delay_ms(const std::array<ChannelMatchSet, 3>& sets, Slot t0,
                          const SlotParams& params) {
  Slot first = std::numeric_limits<Slot>::max();
  for (const auto& s : sets) {
    if (!s.slots.empty()) {
      first = std::min(first, s.slots.front());
    }
  }
  if (first == std::numeric_limits<Slot>::max()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return static_cast<double>(ble_rx_delay(first, t0, params)) * params.slot_ms();
}

}  // namespace

VerifyReport verify(const RunConfig& config, int workers) {
  VerifyReport report;
  const SlotParams active = config.slots();
  Rng rng(mix_seed(config.scenario.seed, kVerifyStream));

  // 1. CRT against exhaustive scan.
  {
    int failures = 0;
    std::uniform_int_distribution<Slot> period(2, 512);
    int checked = 0;
    while (checked < 200) {
      const Slot s1 = period(rng);
      const Slot s2 = period(rng);
      if (std::gcd(s1, s2) != 1) {
        continue;
      }
      const PeriodicEvent e1{std::uniform_int_distribution<Slot>(0, s1 - 1)(rng), s1};
      const PeriodicEvent e2{std::uniform_int_distribution<Slot>(0, s2 - 1)(rng), s2};
      const Slot horizon = s1 * s2;
      std::vector<Slot> scan;
      for (Slot t = 0; t < horizon; ++t) {
        if (t % s1 == e1.start_slot && t % s2 == e2.start_slot) {
          scan.push_back(t);
        }
      }
      if (crt_match(e1, e2, horizon).matches != scan && failures++ < 10) {
        report.lines.push_back("CRT mismatch for periods " + std::to_string(s1) + "," +
                               std::to_string(s2));
      }
      ++checked;
    }
    report.passed = report.passed && failures == 0;
    report.lines.push_back("crt: " + std::to_string(checked) + " pairs, " +
                           std::to_string(failures) + " mismatches");
  }

  // 2. Reception models against the timeline walker.
  std::vector<OracleCase> cases;
  for (int i = 0; i < config.experiment.verify_configs; ++i) {
    OracleCase c;
    c.params = random_small_params(rng);
    c.psi = std::uniform_int_distribution<int>(1, 10)(rng);
    c.t0 = std::uniform_int_distribution<Slot>(0, 600)(rng);
    c.label = "random#" + std::to_string(i);
    cases.push_back(c);
  }
  for (int psi = 1; psi <= config.experiment.psi_max; ++psi) {
    for (Slot t0 : {Slot{0}, Slot{17}, active.ble_si + 5, active.wifi_scan_cycle() - 1}) {
      cases.push_back({active, psi, t0, "active"});
    }
  }
  std::vector<std::string> results(cases.size());
  parallel_for(cases.size(), workers, [&](std::size_t i) {
    try {
      results[i] = compare_case(cases[i]);
    } catch (const Error& e) {
      results[i] = cases[i].label + ": " + e.what();
    }
  });
  int mismatched = 0;
  for (const auto& r : results) {
    if (!r.empty()) {
      if (mismatched < 10) {
        report.lines.push_back(r);
      }
      ++mismatched;
    }
  }
  report.passed = report.passed && mismatched == 0;
  report.lines.push_back("reception oracle: " + std::to_string(cases.size()) + " cases, " +
                         std::to_string(mismatched) + " mismatched");

  // 3. Randomized advertising delay: deviation only, not a pass/fail check.
  const int trials = config.experiment.verify_randomized_trials;
  if (trials > 0) {
    double total = 0.0;
    int counted = 0;
    Rng jitter(mix_seed(config.scenario.seed, kVerifyStream, 1));
    for (int t = 0; t < trials; ++t) {
      const int psi = 1 + t % config.experiment.psi_max;
      const Slot t0 = std::uniform_int_distribution<Slot>(0, active.ble_scan_cycle() - 1)(jitter);
      const double a = first_ble_delay_ms(ble_match_all(t0, psi, active), t0, active);
      const double w =
          first_ble_delay_ms(oracle::walk_ble_timeline(t0, psi, active, true, &jitter), t0, active);
      if (std::isfinite(a) && std::isfinite(w)) {
        total += std::abs(a - w);
        ++counted;
      }
    }
    report.randomized_rd_mad_ms = counted ? total / counted : 0.0;
    report.lines.push_back("randomized R_D: mean |analytic - randomized| first-match delay = " +
                           format_number(report.randomized_rd_mad_ms) + " ms over " +
                           std::to_string(counted) + " trials (informational)");
  }
  return report;
}

// ---------------------------------------------------------------------------
// output

std::string format_number(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_sweep(const std::string& out_dir, const std::vector<SweepRow>& rows) {
  auto raw = open_csv(out_dir, "rate_sweep.csv");
  raw << "protocol,psi,airspace_side_m,replicate,system_mean_delay_ms\n";
  for (const auto& r : rows) {
    raw << protocol_name(r.protocol) << ',' << r.psi << ',' << format_number(r.side_m) << ','
        << r.replicate << ',' << format_number(r.delay_ms) << '\n';
  }
  auto agg = open_csv(out_dir, "rate_sweep_summary.csv");
  agg << "protocol,psi,airspace_side_m,replicates,mean_delay_ms,std_delay_ms\n";
  for (const auto& s : summarize(rows)) {
    agg << protocol_name(s.protocol) << ',' << s.psi << ',' << format_number(s.side_m) << ','
        << s.count << ',' << format_number(s.mean_ms) << ',' << format_number(s.std_ms) << '\n';
  }
}

void write_density(const std::string& out_dir, const std::vector<DensityRow>& rows) {
  auto raw = open_csv(out_dir, "density_compare.csv");
  raw << "airspace_side_m,replicate,ble4_delay_ms,wifi_delay_ms\n";
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> groups;
  std::vector<double> order;
  for (const auto& r : rows) {
    raw << format_number(r.side_m) << ',' << r.replicate << ',' << format_number(r.ble_ms) << ','
        << format_number(r.wifi_ms) << '\n';
    if (!groups.count(r.side_m)) {
      order.push_back(r.side_m);
    }
    groups[r.side_m].first.push_back(r.ble_ms);
    groups[r.side_m].second.push_back(r.wifi_ms);
  }
  auto agg = open_csv(out_dir, "density_compare_summary.csv");
  agg << "airspace_side_m,replicates,ble4_mean_ms,ble4_std_ms,wifi_mean_ms,wifi_std_ms,lower\n";
  for (double side : order) {
    const auto& [b, w] = groups[side];
    const double bm = mean_of(b);
    const double wm = mean_of(w);
    agg << format_number(side) << ',' << b.size() << ',' << format_number(bm) << ','
        << format_number(sample_std(b)) << ',' << format_number(wm) << ','
        << format_number(sample_std(w)) << ',' << (wm < bm ? "wifi" : bm < wm ? "ble4" : "tie")
        << '\n';
  }
}

void write_curve(const std::string& out_dir, const std::vector<madqn::CurveRow>& rows) {
  auto out = open_csv(out_dir, "training_curve.csv");
  out << "episode,mean_reward,system_delay_ms,epsilon,loss\n";
  for (const auto& r : rows) {
    out << r.episode << ',' << format_number(r.mean_reward) << ','
        << format_number(r.system_delay_ms) << ',' << format_number(r.epsilon) << ','
        << format_number(r.loss) << '\n';
  }
}

void write_eval(const std::string& out_dir, const std::vector<EvalRow>& rows) {
  auto raw = open_csv(out_dir, "eval.csv");
  raw << "regime,seed_index,airspace_side_m,madqn_ms,fixed_ble4_ms,fixed_wifi_ms\n";
  std::vector<std::string> order;
  std::map<std::string, std::array<std::vector<double>, 3>> groups;
  for (const auto& r : rows) {
    raw << r.regime << ',' << r.seed_index << ',' << format_number(r.side_m) << ','
        << format_number(r.policy_ms) << ',' << format_number(r.ble_ms) << ','
        << format_number(r.wifi_ms) << '\n';
    if (!groups.count(r.regime)) {
      order.push_back(r.regime);
    }
    auto& g = groups[r.regime];
    g[0].push_back(r.policy_ms);
    g[1].push_back(r.ble_ms);
    g[2].push_back(r.wifi_ms);
  }
  auto agg = open_csv(out_dir, "eval_summary.csv");
  agg << "regime,seeds,madqn_mean_ms,fixed_ble4_mean_ms,fixed_wifi_mean_ms,"
         "reduction_vs_ble4,reduction_vs_wifi\n";
  for (const auto& regime : order) {
    const auto& g = groups[regime];
    const double p = mean_of(g[0]);
    const double b = mean_of(g[1]);
    const double w = mean_of(g[2]);
    agg << regime << ',' << g[0].size() << ',' << format_number(p) << ',' << format_number(b)
        << ',' << format_number(w) << ',' << format_number(b > 0 ? 1.0 - p / b : 0.0) << ','
        << format_number(w > 0 ? 1.0 - p / w : 0.0) << '\n';
  }
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const RunConfig& config, int workers, const json& extra) {
  std::filesystem::create_directories(out_dir);
  json m;
  m["command"] = command;
  m["version"] = RIDSIM_VERSION;
  m["seed"] = config.scenario.seed;
  m["workers"] = workers;
  m["csv_schema_version"] = kCsvSchemaVersion;
  m["config"] = to_json(config);
  m["quantized_slots"] = to_json(config.slots());
  m["policy_config_hash"] = policy_hash(config);
  for (auto it = extra.begin(); it != extra.end(); ++it) {
    m[it.key()] = it.value();
  }
  std::ofstream out(std::filesystem::path(out_dir) / "manifest.json", std::ios::trunc);
  out << m.dump(2) << '\n';
}

}  // namespace ridsim
