#include "ridsim/madqn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_set>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "ridsim/error.hpp"

namespace ridsim::madqn {

// ---------------------------------------------------------------------------
// Observation / reward

std::vector<float> Observation::flatten() const {
  std::vector<float> out;
  out.reserve(4 + neighbor_distances.size() + neighbor_protocols.size() + neighbor_rates.size());
  out.insert(out.end(), own_protocol_onehot.begin(), own_protocol_onehot.end());
  out.insert(out.end(), own_rates.begin(), own_rates.end());
  out.insert(out.end(), neighbor_distances.begin(), neighbor_distances.end());
  out.insert(out.end(), neighbor_protocols.begin(), neighbor_protocols.end());
  out.insert(out.end(), neighbor_rates.begin(), neighbor_rates.end());
  return out;
}

Observation encode_observation(int uav, std::span<const Uav> fleet, const LinkGraph& graph,
                               const ObservationConfig& config, double airspace_diagonal_m) {
  const int n_max = config.n_max;
  const auto psi_max = static_cast<float>(config.psi_max);
  const double scale = config.distance_scale_m > 0.0 ? config.distance_scale_m : airspace_diagonal_m;

  Observation o;
  o.neighbor_distances.assign(n_max, 0.0f);
  o.neighbor_protocols.assign(2 * static_cast<std::size_t>(n_max), 0.0f);
  o.neighbor_rates.assign(n_max, 0.0f);

  const Uav& self = fleet[uav];
  const int own = static_cast<int>(self.protocol);
  o.own_protocol_onehot[own] = 1.0f;
  o.own_rates[own] = static_cast<float>(self.rate) / psi_max;

  struct Heard {
    double dist;
    int id;
    int index;
  };
  std::vector<Heard> heard;
  for (Protocol p : kProtocols) {
    for (int k : graph.recv_from(uav, p)) {
      heard.push_back({distance(self.position, fleet[k].position), fleet[k].id, k});
    }
  }
  std::sort(heard.begin(), heard.end(), [](const Heard& a, const Heard& b) {
    return a.dist != b.dist ? a.dist < b.dist : a.id < b.id;
  });
  const int kept = std::min<int>(n_max, static_cast<int>(heard.size()));
  for (int s = 0; s < kept; ++s) {
    const Uav& nb = fleet[heard[s].index];
    o.neighbor_distances[s] = static_cast<float>(heard[s].dist / scale);
    o.neighbor_protocols[2 * s + static_cast<int>(nb.protocol)] = 1.0f;
    o.neighbor_rates[s] = static_cast<float>(nb.rate) / psi_max;
  }
  return o;
}

double reward(int uav, const DelayReport& report, double alpha, double beta) {
  if (report.neighbor_count[uav] == 0) {
    return 0.0;
  }
  const double local = report.per_uav_mean_ms[uav] / 1000.0;
  const double global = report.system_mean_ms / 1000.0;
  return alpha * (-local) + beta * (global - local);
}

// ---------------------------------------------------------------------------
// Network

template <typename Scalar>
QNetwork<Scalar>::QNetwork(std::vector<int> sizes, Rng& rng) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) {
    throw InvalidArgument("network needs at least an input and an output size");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> init(-bound, bound);
    Layer layer{Matrix(out, in), Vector(out)};
    // Column-major fill keeps the draw order tied to storage order.
    for (int c = 0; c < in; ++c) {
      for (int r = 0; r < out; ++r) {
        layer.weight(r, c) = static_cast<Scalar>(init(rng));
      }
    }
    for (int r = 0; r < out; ++r) {
      layer.bias(r) = static_cast<Scalar>(init(rng));
    }
    layers.push_back(std::move(layer));
  }
}

template <typename Scalar>
std::size_t QNetwork<Scalar>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) {
    n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  }
  return n;
}

template <typename Scalar>
typename QNetwork<Scalar>::Matrix QNetwork<Scalar>::forward(const Matrix& inputs) const {
  Matrix a = inputs;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix z = layers[l].weight * a;
    z.colwise() += layers[l].bias;
    if (l + 1 < layers.size()) {
      a = z.cwiseMax(Scalar(0));
    } else {
      a = std::move(z);
    }
  }
  return a;
}

template <typename Scalar>
typename QNetwork<Scalar>::Vector QNetwork<Scalar>::forward_one(std::span<const float> obs) const {
  Matrix x(static_cast<Eigen::Index>(obs.size()), 1);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    x(static_cast<Eigen::Index>(i), 0) = static_cast<Scalar>(obs[i]);
  }
  return forward(x).col(0);
}

template <typename Scalar>
Scalar loss_and_gradient(const QNetwork<Scalar>& net,
                         const typename QNetwork<Scalar>::Matrix& obs,
                         std::span<const int> actions, std::span<const Scalar> targets,
                         Gradients<Scalar>* grad) {
  using Matrix = typename QNetwork<Scalar>::Matrix;
  const auto batch = static_cast<Eigen::Index>(actions.size());
  if (obs.cols() != batch || static_cast<Eigen::Index>(targets.size()) != batch || batch == 0) {
    throw ShapeMismatch("batch columns, actions and targets must agree and be non-empty");
  }
  const std::size_t depth = net.layers.size();
  std::vector<Matrix> acts;
  acts.reserve(depth + 1);
  acts.push_back(obs);
  for (std::size_t l = 0; l < depth; ++l) {
    Matrix z = net.layers[l].weight * acts.back();
    z.colwise() += net.layers[l].bias;
    acts.push_back(l + 1 < depth ? Matrix(z.cwiseMax(Scalar(0))) : z);
  }
  const Matrix& q = acts.back();

  Matrix delta = Matrix::Zero(q.rows(), batch);
  Scalar loss = 0;
  const Scalar inv_batch = Scalar(1) / static_cast<Scalar>(batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const Scalar diff = q(actions[b], b) - targets[b];
    loss += diff * diff;
    delta(actions[b], b) = Scalar(2) * diff * inv_batch;
  }
  loss *= inv_batch;
  if (grad == nullptr) {
    return loss;
  }

  grad->layers.resize(depth);
  for (std::size_t l = depth; l-- > 0;) {
    grad->layers[l].weight.noalias() = delta * acts[l].transpose();
    grad->layers[l].bias = delta.rowwise().sum();
    if (l > 0) {
      Matrix back = net.layers[l].weight.transpose() * delta;
      delta = back.cwiseProduct(
          (acts[l].array() > Scalar(0)).template cast<Scalar>().matrix());
    }
  }
  return loss;
}

template <typename Scalar>
Adam<Scalar>::Adam(const QNetwork<Scalar>& net, AdamConfig config) : config_(config) {
  for (const auto& l : net.layers) {
    using Layer = typename QNetwork<Scalar>::Layer;
    Layer zero{decltype(l.weight)::Zero(l.weight.rows(), l.weight.cols()),
               decltype(l.bias)::Zero(l.bias.size())};
    m_.push_back(zero);
    v_.push_back(zero);
  }
}

template <typename Scalar>
void Adam<Scalar>::step(QNetwork<Scalar>& net, const Gradients<Scalar>& grad) {
  if (grad.layers.size() != net.layers.size() || m_.size() != net.layers.size()) {
    throw ShapeMismatch("optimizer state does not match the network");
  }
  ++t_;
  const auto b1 = static_cast<Scalar>(config_.beta1);
  const auto b2 = static_cast<Scalar>(config_.beta2);
  const auto eps = static_cast<Scalar>(config_.epsilon);
  const auto lr = static_cast<Scalar>(config_.learning_rate);
  const Scalar c1 = Scalar(1) - static_cast<Scalar>(std::pow(config_.beta1, static_cast<double>(t_)));
  const Scalar c2 = Scalar(1) - static_cast<Scalar>(std::pow(config_.beta2, static_cast<double>(t_)));
  const auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    update(net.layers[l].weight, m_[l].weight, v_[l].weight, grad.layers[l].weight);
    update(net.layers[l].bias, m_[l].bias, v_[l].bias, grad.layers[l].bias);
  }
}

template <typename Scalar>
void soft_update(const QNetwork<Scalar>& online, QNetwork<Scalar>& target, double tau) {
  if (online.sizes() != target.sizes() || online.layers.size() != target.layers.size()) {
    throw ShapeMismatch("online and target networks differ in shape");
  }
  const auto t = static_cast<Scalar>(tau);
  const Scalar keep = Scalar(1) - t;
  for (std::size_t l = 0; l < online.layers.size(); ++l) {
    target.layers[l].weight = t * online.layers[l].weight + keep * target.layers[l].weight;
    target.layers[l].bias = t * online.layers[l].bias + keep * target.layers[l].bias;
  }
}

template class QNetwork<float>;
template class QNetwork<double>;
template class Adam<float>;
template class Adam<double>;
template float loss_and_gradient<float>(const QNetwork<float>&, const QNetwork<float>::Matrix&,
                                        std::span<const int>, std::span<const float>,
                                        Gradients<float>*);
template double loss_and_gradient<double>(const QNetwork<double>&,
                                          const QNetwork<double>::Matrix&, std::span<const int>,
                                          std::span<const double>, Gradients<double>*);
template void soft_update<float>(const QNetwork<float>&, QNetwork<float>&, double);
template void soft_update<double>(const QNetwork<double>&, QNetwork<double>&, double);

// ---------------------------------------------------------------------------
// Replay, exploration, TD update

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) {
    throw InvalidArgument("replay buffer capacity must be positive");
  }
  items_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (!std::isfinite(t.reward)) {
    throw InvalidArgument("transition reward must be finite");
  }
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t count, Rng& rng) const {
  const std::size_t n = items_.size();
  if (count > n) {
    throw InvalidArgument("cannot sample " + std::to_string(count) + " of " + std::to_string(n) +
                          " transitions without replacement");
  }
  // Floyd's algorithm: uniform k-subset in O(k).
  std::vector<std::size_t> out;
  out.reserve(count);
  std::unordered_set<std::size_t> seen;
  seen.reserve(count * 2);
  for (std::size_t j = n - count; j < n; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    const std::size_t pick = seen.insert(t).second ? t : j;
    if (pick == j) {
      seen.insert(j);
    }
    out.push_back(pick);
  }
  return out;
}

int argmax_lowest(std::span<const float> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) {
      best = i;
    }
  }
  return best;
}

Action select_action(const QNetwork<float>& net, std::span<const float> obs, double epsilon,
                     Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw InvalidArgument("epsilon must lie in [0, 1]");
  }
  if (uniform01(rng) < epsilon) {
    return {std::uniform_int_distribution<int>(0, net.output_dim() - 1)(rng)};
  }
  const auto q = net.forward_one(obs);
  return {argmax_lowest(std::span<const float>(q.data(), static_cast<std::size_t>(q.size())))};
}

double epsilon_schedule(int episode, double e_init, double e_final, int decay_episodes) {
  if (episode < 0) {
    throw InvalidArgument("episode must be >= 0");
  }
  if (decay_episodes <= 0) {
    return e_final;
  }
  return std::max(e_final, e_init - episode * (e_init - e_final) / decay_episodes);
}

float train_step(QNetwork<float>& online, const QNetwork<float>& target,
                 std::span<const Transition* const> batch, double gamma, Adam<float>& adam) {
  using Matrix = QNetwork<float>::Matrix;
  const auto b = static_cast<Eigen::Index>(batch.size());
  const auto dim = static_cast<Eigen::Index>(online.input_dim());
  Matrix obs(dim, b);
  Matrix next(dim, b);
  std::vector<int> actions(batch.size());
  for (Eigen::Index c = 0; c < b; ++c) {
    const Transition& t = *batch[c];
    if (static_cast<Eigen::Index>(t.obs.size()) != dim ||
        static_cast<Eigen::Index>(t.next_obs.size()) != dim) {
      throw ShapeMismatch("transition observation size does not match the network input");
    }
    obs.col(c) = Eigen::Map<const Eigen::VectorXf>(t.obs.data(), dim);
    next.col(c) = Eigen::Map<const Eigen::VectorXf>(t.next_obs.data(), dim);
    actions[c] = t.action;
  }
  const Matrix next_q = target.forward(next);
  std::vector<float> y(batch.size());
  const auto g = static_cast<float>(gamma);
  for (Eigen::Index c = 0; c < b; ++c) {
    y[c] = batch[c]->reward + g * next_q.col(c).maxCoeff();
  }
  Gradients<float> grad;
  const float loss = loss_and_gradient<float>(online, obs, actions, y, &grad);
  if (!std::isfinite(loss)) {
    throw NonFiniteLoss("TD loss became non-finite after " + std::to_string(adam.steps()) +
                        " updates");
  }
  adam.step(online, grad);
  return loss;
}

// ---------------------------------------------------------------------------
// Episodes and training

namespace {

constexpr std::uint64_t kEpisodeStream = 0x657069;  // "epi"
constexpr std::uint64_t kInitStream = 0x696e69;     // "ini"
constexpr std::uint64_t kActStream = 0x616374;      // "act"

std::vector<int> network_sizes(const TrainConfig& c) {
  std::vector<int> sizes{c.observation.dimension()};
  sizes.insert(sizes.end(), c.hidden.begin(), c.hidden.end());
  sizes.push_back(2 * c.observation.psi_max);
  return sizes;
}

std::vector<std::vector<float>> observe_all(const FleetEnv& env, const ObservationConfig& config) {
  std::vector<std::vector<float>> out;
  const double diag = env.scenario().diagonal_m();
  for (int j = 0; j < static_cast<int>(env.fleet().size()); ++j) {
    out.push_back(encode_observation(j, env.fleet(), env.graph(), config, diag).flatten());
  }
  return out;
}

void validate(const TrainConfig& c, const EpisodeConfig& e) {
  if (c.episodes < 0 || c.steps_per_episode < 1 || c.batch_size < 1) {
    throw ConfigError("training needs episodes >= 0, steps_per_episode >= 1, batch_size >= 1");
  }
  if (c.min_fill < static_cast<std::size_t>(c.batch_size) || c.min_fill > c.buffer_capacity) {
    throw ConfigError("min_fill must lie in [batch_size, buffer_capacity]");
  }
  if (e.num_uavs < 1 || e.sides_m.empty()) {
    throw ConfigError("episodes need at least one UAV and one airspace side");
  }
  if (c.observation.psi_max < 1 || c.observation.n_max < 1) {
    throw ConfigError("psi_max and n_max must be positive");
  }
}

}  // namespace

Scenario make_episode(const EpisodeConfig& config, double side_m, int steps, std::uint64_t seed) {
  Scenario s;
  s.side_m = side_m;
  s.altitude_min_m = config.altitude_min_m;
  s.altitude_max_m = config.altitude_max_m;
  s.max_speed_mps = config.max_speed_mps;
  s.step_seconds = config.step_seconds;
  s.t_max = steps;
  s.seed = seed;
  Rng rng(mix_seed(seed, kEpisodeStream));
  populate_fleet(s, config.num_uavs, rng, config.tx_power_dbm, config.wifi_channel);
  if (!config.fixed_positions.empty()) {
    if (config.fixed_positions.size() != s.fleet.size()) {
      throw ConfigError("fixed_positions must list one position per UAV");
    }
    for (std::size_t k = 0; k < s.fleet.size(); ++k) {
      s.fleet[k].position = config.fixed_positions[k];
      if (!s.contains(s.fleet[k].position)) {
        throw ConfigError("fixed position of UAV " + std::to_string(k) + " is outside the airspace");
      }
    }
  }
  return s;
}

std::vector<Assignment> initial_assignments(int count, int psi_max, std::uint64_t seed) {
  Rng rng(mix_seed(seed, kInitStream));
  std::uniform_int_distribution<int> pick(0, 2 * psi_max - 1);
  std::vector<Assignment> out;
  for (int j = 0; j < count; ++j) {
    out.push_back(Action{pick(rng)}.assignment(psi_max));
  }
  return out;
}

Action Policy::act(int agent, std::span<const float> obs) const {
  const auto q = networks.at(static_cast<std::size_t>(agent)).forward_one(obs);
  return {argmax_lowest(std::span<const float>(q.data(), static_cast<std::size_t>(q.size())))};
}

TrainResult train(const DelayModel& model, const RadioConfig& radio, const ReportOptions& options,
                  const EpisodeConfig& episodes, const TrainConfig& config,
                  const std::function<void(const CurveRow&)>& progress) {
  validate(config, episodes);
#if defined(__GLIBC__)
  // Batch matrices are freed and reallocated every update; keep them off mmap.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
  const int m = episodes.num_uavs;
  const int psi_max = config.observation.psi_max;

  Rng init_rng(mix_seed(config.seed, 0x6e6574));  // "net"
  std::vector<QNetwork<float>> online;
  std::vector<QNetwork<float>> target;
  std::vector<Adam<float>> optim;
  for (int j = 0; j < m; ++j) {
    online.emplace_back(network_sizes(config), init_rng);
    target.push_back(online.back());
    optim.emplace_back(online.back(), config.adam);
  }

  ReplayBuffer buffer(config.buffer_capacity);
  Rng act_rng(mix_seed(config.seed, kActStream));
  Rng sample_rng(mix_seed(config.seed, 0x736d70));  // "smp"
  Rng side_rng(mix_seed(config.seed, 0x736964));    // "sid"
  std::uniform_int_distribution<std::size_t> side_pick(0, episodes.sides_m.size() - 1);

  FleetEnv env(model, radio, options);
  TrainResult result;
  std::vector<const Transition*> batch(static_cast<std::size_t>(config.batch_size));
  std::vector<Assignment> joint(m);

  for (int ep = 0; ep < config.episodes; ++ep) {
    const double eps = epsilon_schedule(ep, config.epsilon_init, config.epsilon_final,
                                        config.epsilon_decay_episodes);
    const double side = episodes.sides_m[side_pick(side_rng)];
    const std::uint64_t ep_seed = mix_seed(config.seed, kEpisodeStream, static_cast<std::uint64_t>(ep));
    env.reset(make_episode(episodes, side, config.steps_per_episode, ep_seed));
    env.assign(initial_assignments(m, psi_max, ep_seed));

    double reward_sum = 0.0;
    double delay_sum = 0.0;
    double loss_sum = 0.0;
    int loss_count = 0;
    auto obs = observe_all(env, config.observation);
    for (int t = 0; t < config.steps_per_episode; ++t) {
      std::vector<Action> actions(m);
      for (int j = 0; j < m; ++j) {
        actions[j] = select_action(online[j], obs[j], eps, act_rng);
        joint[j] = actions[j].assignment(psi_max);
      }
      env.assign(joint);
      const DelayReport rep = env.report();
      delay_sum += rep.system_mean_ms;
      env.advance();
      auto next = observe_all(env, config.observation);
      for (int j = 0; j < m; ++j) {
        const double r = reward(j, rep, config.reward_alpha, config.reward_beta);
        reward_sum += r;
        buffer.push({obs[j], actions[j].index, static_cast<float>(r), next[j]});
      }
      obs = std::move(next);

      if (buffer.size() >= config.min_fill) {
        for (int j = 0; j < m; ++j) {
          const auto idx = buffer.sample(static_cast<std::size_t>(config.batch_size), sample_rng);
          for (std::size_t k = 0; k < idx.size(); ++k) {
            batch[k] = &buffer.at(idx[k]);
          }
          loss_sum += train_step(online[j], target[j], batch, config.gamma, optim[j]);
          ++loss_count;
          ++result.updates;
          soft_update(online[j], target[j], config.tau);
        }
      }
    }
    CurveRow row;
    row.episode = ep;
    row.mean_reward = reward_sum / (static_cast<double>(config.steps_per_episode) * m);
    row.system_delay_ms = delay_sum / config.steps_per_episode;
    row.epsilon = eps;
    row.loss = loss_count > 0 ? loss_sum / loss_count : std::numeric_limits<double>::quiet_NaN();
    result.curve.push_back(row);
    if (progress) {
      progress(row);
    }
  }
  result.policy.observation = config.observation;
  result.policy.networks = std::move(online);
  return result;
}

double rollout_policy(const Policy& policy, const DelayModel& model, const RadioConfig& radio,
                      const ReportOptions& options, const EpisodeConfig& episodes, double side_m,
                      int steps, std::uint64_t seed) {
  const int m = episodes.num_uavs;
  if (static_cast<int>(policy.networks.size()) != m) {
    throw ShapeMismatch("policy has " + std::to_string(policy.networks.size()) +
                        " agents but the fleet has " + std::to_string(m));
  }
  const int psi_max = policy.observation.psi_max;
  FleetEnv env(model, radio, options);
  env.reset(make_episode(episodes, side_m, steps, seed));
  env.assign(initial_assignments(m, psi_max, seed));
  std::vector<Assignment> joint(m);
  double total = 0.0;
  for (int t = 0; t < steps; ++t) {
    const auto obs = observe_all(env, policy.observation);
    for (int j = 0; j < m; ++j) {
      joint[j] = policy.act(j, obs[j]).assignment(psi_max);
    }
    env.assign(joint);
    total += env.report().system_mean_ms;
    env.advance();
  }
  return steps > 0 ? total / steps : 0.0;
}

double rollout_fixed(Protocol protocol, int rate, const DelayModel& model,
                     const RadioConfig& radio, const ReportOptions& options,
                     const EpisodeConfig& episodes, double side_m, int steps, std::uint64_t seed) {
  FleetEnv env(model, radio, options);
  env.reset(make_episode(episodes, side_m, steps, seed));
  const std::vector<Assignment> joint(static_cast<std::size_t>(episodes.num_uavs),
                                      Assignment::of(protocol, rate));
  double total = 0.0;
  for (int t = 0; t < steps; ++t) {
    env.assign(joint);
    total += env.report().system_mean_ms;
    env.advance();
  }
  return steps > 0 ? total / steps : 0.0;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[8] = {'R', 'I', 'D', 'Q', 'P', 'O', 'L', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) {
    throw ConfigError("checkpoint truncated");
  }
  return v;
}

}  // namespace

void save_policy(const std::string& path, const Policy& policy, std::uint64_t config_hash) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ConfigError("cannot write checkpoint " + path);
  }
  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, config_hash);
  put(out, static_cast<std::int32_t>(policy.observation.n_max));
  put(out, static_cast<std::int32_t>(policy.observation.psi_max));
  put(out, policy.observation.distance_scale_m);
  put(out, static_cast<std::uint32_t>(policy.networks.size()));
  for (const auto& net : policy.networks) {
    put(out, static_cast<std::uint32_t>(net.sizes().size()));
    for (int s : net.sizes()) {
      put(out, static_cast<std::int32_t>(s));
    }
    for (const auto& l : net.layers) {
      out.write(reinterpret_cast<const char*>(l.weight.data()),
                static_cast<std::streamsize>(l.weight.size() * sizeof(float)));
      out.write(reinterpret_cast<const char*>(l.bias.data()),
                static_cast<std::streamsize>(l.bias.size() * sizeof(float)));
    }
  }
  if (!out) {
    throw ConfigError("failed writing checkpoint " + path);
  }
}

Policy load_policy(const std::string& path, std::uint64_t expected_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open checkpoint " + path);
  }
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ConfigError(path + " is not a policy checkpoint");
  }
  if (const auto v = get<std::uint32_t>(in); v != kVersion) {
    throw ConfigError("unsupported checkpoint version " + std::to_string(v));
  }
  if (const auto h = get<std::uint64_t>(in); h != expected_hash) {
    throw ConfigError("checkpoint config hash mismatch (checkpoint was trained with a different "
                      "observation/network configuration)");
  }
  Policy p;
  p.observation.n_max = get<std::int32_t>(in);
  p.observation.psi_max = get<std::int32_t>(in);
  p.observation.distance_scale_m = get<double>(in);
  const auto agents = get<std::uint32_t>(in);
  for (std::uint32_t a = 0; a < agents; ++a) {
    const auto n_sizes = get<std::uint32_t>(in);
    if (n_sizes < 2 || n_sizes > 64) {
      throw ConfigError("corrupt checkpoint layer table");
    }
    std::vector<int> sizes(n_sizes);
    for (auto& s : sizes) {
      s = get<std::int32_t>(in);
    }
    Rng dummy(0);
    QNetwork<float> net(sizes, dummy);
    for (auto& l : net.layers) {
      in.read(reinterpret_cast<char*>(l.weight.data()),
              static_cast<std::streamsize>(l.weight.size() * sizeof(float)));
      in.read(reinterpret_cast<char*>(l.bias.data()),
              static_cast<std::streamsize>(l.bias.size() * sizeof(float)));
    }
    if (!in) {
      throw ConfigError("checkpoint truncated");
    }
    p.networks.push_back(std::move(net));
  }
  return p;
}

}  // namespace ridsim::madqn
