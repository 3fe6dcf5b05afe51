#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ridsim/airspace.hpp"
#include "ridsim/rng.hpp"

namespace ridsim::madqn {

struct ObservationConfig {
  int n_max = 9;
  int psi_max = 10;
  // Distances are divided by this; <= 0 means "use the airspace diagonal".
  double distance_scale_m = 0.0;

  int dimension() const { return 4 + 4 * n_max; }
};

/// Local view of one UAV: its own protocol/rate and the nearest UAVs it can
/// hear, nearest first, zero-padded to n_max.
struct Observation {
  std::array<float, 2> own_protocol_onehot{};
  std::array<float, 2> own_rates{};
  std::vector<float> neighbor_distances;  // n_max
  std::vector<float> neighbor_protocols;  // 2 * n_max, one-hot pairs
  std::vector<float> neighbor_rates;      // n_max

  std::vector<float> flatten() const;
};

Observation encode_observation(int uav, std::span<const Uav> fleet, const LinkGraph& graph,
                               const ObservationConfig& config, double airspace_diagonal_m);

/// Flat action index: protocol = index / psi_max, rate = 1 + index % psi_max.
struct Action {
  int index = 0;

  Protocol protocol(int psi_max) const { return index / psi_max == 0 ? Protocol::Ble4 : Protocol::Wifi; }
  int rate(int psi_max) const { return 1 + index % psi_max; }
  Assignment assignment(int psi_max) const { return Assignment::of(protocol(psi_max), rate(psi_max)); }
  static Action of(Protocol p, int rate, int psi_max) {
    return {(p == Protocol::Ble4 ? 0 : psi_max) + rate - 1};
  }
};

struct Transition {
  std::vector<float> obs;
  int action = 0;
  float reward = 0.0f;
  std::vector<float> next_obs;
};

/// Weighted local/global delay reward for fleet[uav]; delays in seconds.
/// A UAV with nobody to deliver to gets 0.
double reward(int uav, const DelayReport& report, double alpha, double beta);

/// Fully connected ReLU network mapping an observation to one value per action.
/// Batches are stored column-wise (features x batch).
template <typename Scalar>
class QNetwork {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Layer {
    Matrix weight;  // out x in
    Vector bias;
  };

  QNetwork() = default;
  /// `sizes` = {input, hidden..., output}; weights uniform in +-1/sqrt(fan_in).
  QNetwork(std::vector<int> sizes, Rng& rng);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  std::size_t parameter_count() const;

  Matrix forward(const Matrix& inputs) const;
  Vector forward_one(std::span<const float> obs) const;

  std::vector<Layer> layers;

 private:
  std::vector<int> sizes_;
};

template <typename Scalar>
struct Gradients {
  std::vector<typename QNetwork<Scalar>::Layer> layers;
};

/// Mean squared error between targets and Q(obs, action) over the batch, with
/// its gradient w.r.t. every weight when `grad` is non-null.
template <typename Scalar>
Scalar loss_and_gradient(const QNetwork<Scalar>& net,
                         const typename QNetwork<Scalar>::Matrix& obs,
                         std::span<const int> actions, std::span<const Scalar> targets,
                         Gradients<Scalar>* grad);

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

template <typename Scalar>
class Adam {
 public:
  Adam() = default;
  Adam(const QNetwork<Scalar>& net, AdamConfig config);
  void step(QNetwork<Scalar>& net, const Gradients<Scalar>& grad);
  std::int64_t steps() const { return t_; }

 private:
  AdamConfig config_;
  std::vector<typename QNetwork<Scalar>::Layer> m_;
  std::vector<typename QNetwork<Scalar>::Layer> v_;
  std::int64_t t_ = 0;
};

/// Bounded FIFO experience store.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return items_[i]; }

  /// `count` distinct indices drawn uniformly (no replacement within a batch).
  std::vector<std::size_t> sample(std::size_t count, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

/// Epsilon-greedy choice. Always consumes one uniform draw; exploration
/// consumes a second. Greedy ties resolve to the lowest index.
Action select_action(const QNetwork<float>& net, std::span<const float> obs, double epsilon,
                     Rng& rng);
int argmax_lowest(std::span<const float> values);

/// Linear decay from e_init to e_final over `decay_episodes`, flat afterwards.
double epsilon_schedule(int episode, double e_init = 1.0, double e_final = 0.1,
                        int decay_episodes = 500);

/// One Adam step on the squared TD error with target
/// y = r + gamma * max_a' Q_target(o', a'). Returns the pre-update loss.
/// Throws NonFiniteLoss.
float train_step(QNetwork<float>& online, const QNetwork<float>& target,
                 std::span<const Transition* const> batch, double gamma, Adam<float>& adam);

/// target <- tau * online + (1 - tau) * target. Throws ShapeMismatch.
template <typename Scalar>
void soft_update(const QNetwork<Scalar>& online, QNetwork<Scalar>& target, double tau);

struct TrainConfig {
  int episodes = 1000;
  int steps_per_episode = 100;
  double gamma = 0.95;
  AdamConfig adam;
  int batch_size = 256;
  std::size_t buffer_capacity = 25000;
  std::size_t min_fill = 25000;  // learning starts once the buffer holds this many
  double tau = 0.999;
  double epsilon_init = 1.0;
  double epsilon_final = 0.1;
  int epsilon_decay_episodes = 500;
  std::vector<int> hidden{256, 128};
  double reward_alpha = 1.0;
  double reward_beta = 1.0;
  ObservationConfig observation;
  std::uint64_t seed = 1;
};

/// How training and evaluation episodes are laid out.
struct EpisodeConfig {
  int num_uavs = 10;
  std::vector<double> sides_m{1000.0};  // one is drawn per episode
  double altitude_min_m = 30.0;
  double altitude_max_m = 120.0;
  double max_speed_mps = 20.0;
  double step_seconds = 1.0;
  double tx_power_dbm = 18.0;
  int wifi_channel = 6;
  // When non-empty, UAV k starts here instead of at a random point.
  std::vector<Vec3> fixed_positions;
};

/// Fresh scenario for an episode: random positions from `seed`, given side.
Scenario make_episode(const EpisodeConfig& config, double side_m, int steps, std::uint64_t seed);

/// Random (protocol, rate) per UAV drawn from `seed`; used as the state
/// before the first decision of an episode.
std::vector<Assignment> initial_assignments(int count, int psi_max, std::uint64_t seed);

/// Independent greedy policies, one network per UAV slot.
struct Policy {
  ObservationConfig observation;
  std::vector<QNetwork<float>> networks;

  Action act(int agent, std::span<const float> obs) const;
};

struct CurveRow {
  int episode = 0;
  double mean_reward = 0.0;
  double system_delay_ms = 0.0;
  double epsilon = 0.0;
  double loss = 0.0;  // mean over updates in the episode; NaN before learning starts
};

struct TrainResult {
  Policy policy;
  std::vector<CurveRow> curve;
  std::uint64_t updates = 0;
};

/// Runs independent-learner DQN over episodes drawn from `episodes`.
/// `progress`, when set, is called after every episode.
TrainResult train(const DelayModel& model, const RadioConfig& radio, const ReportOptions& options,
                  const EpisodeConfig& episodes, const TrainConfig& config,
                  const std::function<void(const CurveRow&)>& progress = {});

/// Mean fleet delay (ms) over one episode with every UAV following the
/// greedy policy. Positions and mobility come from `seed` only.
double rollout_policy(const Policy& policy, const DelayModel& model, const RadioConfig& radio,
                      const ReportOptions& options, const EpisodeConfig& episodes, double side_m,
                      int steps, std::uint64_t seed);

/// Same episode with a fixed protocol and rate for every UAV.
double rollout_fixed(Protocol protocol, int rate, const DelayModel& model,
                     const RadioConfig& radio, const ReportOptions& options,
                     const EpisodeConfig& episodes, double side_m, int steps, std::uint64_t seed);

/// Binary checkpoint: magic, version, config hash, then per-agent layers.
void save_policy(const std::string& path, const Policy& policy, std::uint64_t config_hash);
/// Throws ConfigError on a bad file or when the stored hash differs.
Policy load_policy(const std::string& path, std::uint64_t expected_hash);

}  // namespace ridsim::madqn
