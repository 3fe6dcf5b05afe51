#include <cmath>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "ridsim/error.hpp"
#include "ridsim/madqn.hpp"

using namespace ridsim;
using namespace ridsim::madqn;

namespace {

Uav uav(int id, Vec3 p, Protocol proto = Protocol::Ble4, int rate = 9) {
  Uav u;
  u.id = id;
  u.position = p;
  u.protocol = proto;
  u.rate = rate;
  return u;
}

Transition make_transition(std::vector<float> o, int a, float r, std::vector<float> o2) {
  return {std::move(o), a, r, std::move(o2)};
}

}  // namespace

TEST_CASE("observation encoding") {
  const RadioConfig radio;
  ObservationConfig cfg;
  cfg.n_max = 3;
  CHECK(cfg.dimension() == 16);
  {
    std::vector<Uav> one{uav(0, {0, 0, 50})};
    const auto o = encode_observation(0, one, build_link_graph(one, radio), cfg, 100.0);
    CHECK(o.flatten().size() == 16);
    for (float v : o.neighbor_distances) {
      CHECK(v == 0.0f);
    }
    CHECK(o.own_protocol_onehot[0] == 1.0f);
    CHECK(o.own_rates[0] == doctest::Approx(0.9));
    CHECK(o.own_rates[1] == 0.0f);
  }
  std::vector<Uav> fleet{uav(0, {0, 0, 50}), uav(1, {50, 0, 50}, Protocol::Wifi, 5),
                         uav(2, {10, 0, 50})};
  const auto o = encode_observation(0, fleet, build_link_graph(fleet, radio), cfg, 100.0);
  CHECK(o.neighbor_distances[0] == doctest::Approx(0.1));
  CHECK(o.neighbor_distances[1] == doctest::Approx(0.5));
  CHECK(o.neighbor_distances[2] == 0.0f);
  CHECK(o.neighbor_protocols[0] == 1.0f);  // nearest is BLE
  CHECK(o.neighbor_protocols[3] == 1.0f);  // next is Wi-Fi
  CHECK(o.neighbor_rates[1] == doctest::Approx(0.5));

  std::vector<Uav> permuted{fleet[2], fleet[0], fleet[1]};
  const auto p = encode_observation(1, permuted, build_link_graph(permuted, radio), cfg, 100.0);
  CHECK(p.flatten() == o.flatten());

  cfg.distance_scale_m = 50.0;
  const auto fixed = encode_observation(0, fleet, build_link_graph(fleet, radio), cfg, 100.0);
  CHECK(fixed.neighbor_distances[1] == doctest::Approx(1.0));
}

TEST_CASE("observation drops the farthest neighbours on overflow") {
  const RadioConfig radio;
  ObservationConfig cfg;
  cfg.n_max = 2;
  std::vector<Uav> fleet{uav(0, {0, 0, 50}), uav(1, {30, 0, 50}), uav(2, {10, 0, 50}),
                         uav(3, {20, 0, 50})};
  const auto o = encode_observation(0, fleet, build_link_graph(fleet, radio), cfg, 100.0);
  CHECK(o.neighbor_distances[0] == doctest::Approx(0.1));
  CHECK(o.neighbor_distances[1] == doctest::Approx(0.2));
}

TEST_CASE("reward") {
  DelayReport rep;
  rep.per_uav_mean_ms = {200.0, 100.0, 0.0};
  rep.neighbor_count = {2, 2, 0};
  rep.system_mean_ms = 200.0;
  CHECK(reward(0, rep, 1.0, 1.0) == doctest::Approx(-0.2));
  CHECK(reward(1, rep, 1.0, 1.0) == doctest::Approx(-0.1 + 0.1));
  CHECK(reward(1, rep, 0.0, 1.0) > 0.0);
  CHECK(reward(1, rep, 2.0, 0.0) == doctest::Approx(2.0 * reward(1, rep, 1.0, 0.0)));
  CHECK(reward(2, rep, 1.0, 1.0) == 0.0);
}

TEST_CASE("action decoding") {
  for (int i = 0; i < 20; ++i) {
    const Action a{i};
    CHECK(Action::of(a.protocol(10), a.rate(10), 10).index == i);
    CHECK(a.rate(10) >= 1);
    CHECK(a.rate(10) <= 10);
  }
  CHECK(Action{0}.protocol(10) == Protocol::Ble4);
  CHECK(Action{10}.protocol(10) == Protocol::Wifi);
  CHECK(Action{19}.rate(10) == 10);
}

TEST_CASE("epsilon schedule") {
  CHECK(epsilon_schedule(0) == 1.0);
  CHECK(epsilon_schedule(250) == doctest::Approx(0.55));
  CHECK(epsilon_schedule(500) == doctest::Approx(0.1));
  CHECK(epsilon_schedule(900) == doctest::Approx(0.1));
  CHECK_THROWS_AS(epsilon_schedule(-1), InvalidArgument);
}

TEST_CASE("epsilon-greedy selection") {
  Rng rng(1);
  QNetwork<float> net({4, 8, 20}, rng);
  const std::vector<float> obs{0.1f, 0.2f, 0.3f, 0.4f};
  std::vector<int> counts(20, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    ++counts[select_action(net, obs, 1.0, rng).index];
  }
  double chi2 = 0.0;
  const double expected = draws / 20.0;
  for (int c : counts) {
    chi2 += (c - expected) * (c - expected) / expected;
  }
  CHECK(chi2 < 43.82);  // chi-square, 19 dof, p = 0.001

  for (auto& l : net.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  net.layers.back().bias(7) = 1.0f;
  for (int i = 0; i < 50; ++i) {
    CHECK(select_action(net, obs, 0.0, rng).index == 7);
  }
  net.layers.back().bias(7) = 0.0f;
  CHECK(select_action(net, obs, 0.0, rng).index == 0);
  const std::vector<float> tie{1.0f, 3.0f, 3.0f};
  CHECK(argmax_lowest(tie) == 1);
  CHECK_THROWS_AS(select_action(net, obs, 1.5, rng), InvalidArgument);
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(12);
  QNetwork<double> net({3, 4, 2}, rng);
  QNetwork<double>::Matrix obs(3, 5);
  for (Eigen::Index i = 0; i < obs.size(); ++i) {
    obs.data()[i] = 2.0 * uniform01(rng) - 1.0;
  }
  const std::vector<int> actions{0, 1, 1, 0, 1};
  const std::vector<double> targets{0.5, -0.3, 1.2, 0.0, 0.7};
  Gradients<double> grad;
  loss_and_gradient<double>(net, obs, actions, targets, &grad);
  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto check = [&](double& param, double analytic) {
      const double keep = param;
      param = keep + h;
      const double up = loss_and_gradient<double>(net, obs, actions, targets, nullptr);
      param = keep - h;
      const double down = loss_and_gradient<double>(net, obs, actions, targets, nullptr);
      param = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
      worst = std::max(worst, std::abs(numeric - analytic) / scale);
    };
    auto& W = net.layers[l].weight;
    for (Eigen::Index i = 0; i < W.size(); ++i) {
      check(W.data()[i], grad.layers[l].weight.data()[i]);
    }
    auto& b = net.layers[l].bias;
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      check(b.data()[i], grad.layers[l].bias.data()[i]);
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("train_step at a fixed point leaves weights unchanged") {
  Rng rng(3);
  QNetwork<float> net({2, 4, 3}, rng);
  const QNetwork<float> target = net;
  Adam<float> adam(net, AdamConfig{});
  const std::vector<float> o{0.3f, -0.2f};
  const auto q = net.forward_one(o);
  Transition t = make_transition(o, 1, q(1), o);
  const std::vector<const Transition*> batch{&t};
  const auto before = net.layers[0].weight;
  const float loss = train_step(net, target, batch, 0.0, adam);
  CHECK(loss == doctest::Approx(0.0).epsilon(1e-12));
  CHECK((net.layers[0].weight - before).cwiseAbs().maxCoeff() < 1e-6f);
}

TEST_CASE("repeated updates on one transition drive the loss down") {
  Rng rng(4);
  QNetwork<float> net({2, 16, 3}, rng);
  const QNetwork<float> target = net;
  AdamConfig cfg;
  cfg.learning_rate = 1e-3;
  Adam<float> adam(net, cfg);
  Transition t = make_transition({0.5f, 0.5f}, 2, 1.5f, {0.0f, 0.0f});
  const std::vector<const Transition*> batch{&t};
  float prev = train_step(net, target, batch, 0.0, adam);
  const float first = prev;
  int increases = 0;
  for (int i = 0; i < 300; ++i) {
    const float loss = train_step(net, target, batch, 0.0, adam);
    increases += loss > prev ? 1 : 0;
    prev = loss;
  }
  CHECK(increases == 0);
  CHECK(prev < 1e-3f * first);
}

TEST_CASE("non-finite loss is reported") {
  Rng rng(4);
  QNetwork<float> net({2, 4, 3}, rng);
  Adam<float> adam(net, AdamConfig{});
  Transition t = make_transition({0.5f, 0.5f}, 0, 0.0f, {0.0f, 0.0f});
  t.obs[0] = std::numeric_limits<float>::infinity();
  const std::vector<const Transition*> batch{&t};
  CHECK_THROWS_AS(train_step(net, net, batch, 0.9, adam), NonFiniteLoss);
}

TEST_CASE("soft update") {
  Rng rng(2);
  QNetwork<double> online({1, 1}, rng);
  QNetwork<double> target = online;
  online.layers[0].weight(0, 0) = 1.0;
  target.layers[0].weight(0, 0) = 0.0;
  soft_update(online, target, 0.999);
  CHECK(target.layers[0].weight(0, 0) == doctest::Approx(0.999));
  soft_update(online, target, 1.0);
  CHECK(target.layers[0].weight(0, 0) == 1.0);
  target.layers[0].weight(0, 0) = 0.25;
  soft_update(online, target, 0.0);
  CHECK(target.layers[0].weight(0, 0) == 0.25);
  QNetwork<double> other({2, 1}, rng);
  CHECK_THROWS_AS(soft_update(online, other, 0.5), ShapeMismatch);
}

TEST_CASE("replay buffer") {
  ReplayBuffer buf(5);
  for (int i = 0; i < 8; ++i) {
    buf.push(make_transition({static_cast<float>(i)}, i, 0.0f, {0.0f}));
    CHECK(buf.size() <= 5);
  }
  std::set<int> kept;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    kept.insert(buf.at(i).action);
  }
  CHECK(kept == std::set<int>{3, 4, 5, 6, 7});
  Rng rng(6);
  for (int rep = 0; rep < 50; ++rep) {
    const auto idx = buf.sample(5, rng);
    CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == 5);
  }
  CHECK_THROWS_AS(buf.sample(6, rng), InvalidArgument);
  CHECK_THROWS_AS(buf.push(make_transition({0.0f}, 0, NAN, {0.0f})), InvalidArgument);
}

TEST_CASE("training smoke run and checkpoint round trip") {
  const DelayModel model{SlotParams{}};
  EpisodeConfig ep;
  ep.num_uavs = 2;
  ep.sides_m = {100.0, 300.0};
  TrainConfig cfg;
  cfg.episodes = 20;
  cfg.steps_per_episode = 10;
  cfg.batch_size = 16;
  cfg.min_fill = 32;
  cfg.buffer_capacity = 200;
  cfg.hidden = {8};
  cfg.epsilon_decay_episodes = 10;
  const auto a = train(model, RadioConfig{}, ReportOptions{}, ep, cfg);
  REQUIRE(a.curve.size() == 20);
  for (const auto& row : a.curve) {
    CHECK(std::isfinite(row.mean_reward));
  }
  CHECK(a.updates > 0);
  const auto b = train(model, RadioConfig{}, ReportOptions{}, ep, cfg);
  CHECK(a.curve.back().loss == b.curve.back().loss);
  CHECK(a.policy.networks[1].layers[0].weight == b.policy.networks[1].layers[0].weight);

  const auto path = (std::filesystem::temp_directory_path() / "ridsim_test_policy.bin").string();
  save_policy(path, a.policy, 99);
  const Policy back = load_policy(path, 99);
  REQUIRE(back.networks.size() == 2);
  CHECK(back.networks[0].layers[1].weight == a.policy.networks[0].layers[1].weight);
  CHECK(back.networks[0].layers[1].bias == a.policy.networks[0].layers[1].bias);
  CHECK_THROWS_AS(load_policy(path, 98), ConfigError);
  std::filesystem::remove(path);

  const double ms = rollout_policy(back, model, RadioConfig{}, ReportOptions{}, ep, 100.0, 5, 3);
  CHECK(std::isfinite(ms));
}

TEST_CASE("greedy action depends only on the agent's observation and network") {
  Rng rng(10);
  Policy policy;
  policy.networks.emplace_back(std::vector<int>{4, 6, 20}, rng);
  policy.networks.emplace_back(std::vector<int>{4, 6, 20}, rng);
  const std::vector<float> obs{0.0f, 1.0f, 0.5f, 0.25f};
  const int before = policy.act(0, obs).index;
  // Changing another agent's network must not change agent 0's decision.
  for (auto& l : policy.networks[1].layers) {
    l.weight.setRandom();
  }
  CHECK(policy.act(0, obs).index == before);
}
