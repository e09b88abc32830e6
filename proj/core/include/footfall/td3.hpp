#pragma once

// TD3 training: replay buffer, clipped double-Q targets, twin critic
// regression, delayed deterministic policy updates and Polyak-averaged
// target networks, with linearly annealed learning rate and exploration.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "footfall/env.hpp"
#include "footfall/model.hpp"
#include "footfall/neural.hpp"
#include "footfall/plan.hpp"

namespace footfall {

struct Td3Config {
  double gamma{0.98};
  std::int64_t total_steps{1'000'000};
  int batch_size{256};
  double lr_initial{1e-3};
  double exploration_std_initial{0.1};  // in normalized action units
  double target_noise_std{0.2};
  double target_noise_clip{0.5};
  int policy_delay{2};
  double polyak_tau{0.005};
  std::size_t buffer_capacity{1'000'000};
  std::int64_t warmup_steps{10'000};
  std::int64_t eval_every{50'000};
  int eval_episodes{100};

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;

  double lr_at(std::int64_t step) const;
  double exploration_std_at(std::int64_t step) const;
};

/// Environment-side training configuration.
struct TrainingSetup {
  RobotSpec robot;
  RewardConfig reward;
  ToleranceConfig tolerance;
  std::vector<Situation> situations{Situation::NO, Situation::AO, Situation::FO};
  double rho_min{0.10};  // obstacle radius range for AO/FO episodes
  double rho_max{0.25};
  ScenarioParams scenario;
  std::vector<int> hidden{400, 300};
  double leaky_slope{0.01};
};

using ScenarioFactory = std::function<Scenario(std::uint64_t seed)>;

/// Uniform mix over setup.situations with rho ~ U[rho_min, rho_max].
ScenarioFactory make_scenario_factory(const TrainingSetup& setup);

/// Replay record. The action is the normalized actor-space action that was
/// sent to the environment.
struct Experience {
  Observation obs{};
  NormalizedAction action{};
  double reward{0.0};
  Observation next_obs{};
  bool terminated{false};
};

template <typename Scalar>
struct Batch {
  using Matrix = typename BasicMlp<Scalar>::Matrix;
  Matrix obs;       // 8 x B
  Matrix action;    // 3 x B
  Matrix reward;    // 1 x B
  Matrix next_obs;  // 8 x B
  Matrix not_done;  // 1 x B, 0 for terminated transitions

  Eigen::Index size() const { return obs.cols(); }
};

template <typename Scalar>
Batch<Scalar> make_batch(const std::vector<Experience>& items);

/// Fixed-capacity ring buffer; the oldest record is overwritten when full.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Experience& e);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  const Experience& at(std::size_t slot) const { return store_.at(slot); }

  /// Uniform draw with replacement over the filled slots.
  std::vector<std::size_t> sample_indices(std::size_t n, std::mt19937_64& rng) const;

  template <typename Scalar>
  Batch<Scalar> sample(std::size_t n, std::mt19937_64& rng) const;

 private:
  std::vector<Experience> store_;
  std::size_t capacity_;
  std::size_t size_{0};
  std::size_t cursor_{0};
};

template <typename Scalar>
struct TargetNets {
  const BasicMlp<Scalar>& actor;
  const BasicMlp<Scalar>& critic1;
  const BasicMlp<Scalar>& critic2;
};

/// y = r + gamma * min(Q1', Q2')(s', clip(pi'(s') + clip(noise))) for
/// non-terminated transitions, y = r for terminated ones. Returns 1 x B.
template <typename Scalar>
typename BasicMlp<Scalar>::Matrix critic_target(const Batch<Scalar>& batch,
                                                const TargetNets<Scalar>& targets,
                                                const Td3Config& cfg, std::mt19937_64& rng);

/// Critic output and its gradient with respect to the action rows, both
/// evaluated on (obs, action) columns. q is 1 x B, dq_da is 3 x B.
template <typename Scalar>
using CriticFn = std::function<std::pair<typename BasicMlp<Scalar>::Matrix, typename BasicMlp<Scalar>::Matrix>(
    const typename BasicMlp<Scalar>::Matrix& obs, const typename BasicMlp<Scalar>::Matrix& action)>;

/// One Adam ascent step on mean critic(s, actor(s)). Returns that mean.
template <typename Scalar>
double actor_ascent_step(BasicMlp<Scalar>& actor, AdamState<Scalar>& opt,
                         const typename BasicMlp<Scalar>::Matrix& obs, const CriticFn<Scalar>& critic,
                         double lr);

/// Online and target networks with their optimizer states.
template <typename Scalar>
class Td3Agent {
 public:
  using Matrix = typename BasicMlp<Scalar>::Matrix;

  Td3Agent(const Td3Config& cfg, std::uint64_t seed, const std::vector<int>& hidden = {400, 300},
           double leaky_slope = 0.01);
  /// Starts from existing double-precision networks.
  Td3Agent(const Td3Config& cfg, const TrainedModel& model);

  /// Squared TD error summed over both critics (batch means). One Adam step
  /// on each critic.
  double update_critics(const Batch<Scalar>& batch, double lr, std::mt19937_64& rng);
  /// Ascent on critic1(s, actor(s)); returns the batch-mean Q.
  double update_actor(const Batch<Scalar>& batch, double lr);
  void update_targets();

  NormalizedAction act(const Observation& obs) const;

  TrainedModel export_model(const TrainingSetup& setup) const;

  const Td3Config& config() const { return cfg_; }

  BasicMlp<Scalar> actor, critic1, critic2;
  BasicMlp<Scalar> actor_target, critic1_target, critic2_target;
  AdamState<Scalar> actor_opt, critic1_opt, critic2_opt;

 private:
  Td3Config cfg_;
};

struct TrainLogRow {
  std::int64_t step{0};
  double eval_success_rate{0.0};
  double eval_mean_steps{0.0};
  double critic_loss{0.0};
  double actor_j{0.0};
  double lr{0.0};
  double expl_std{0.0};
};

struct TrainResult {
  TrainedModel model;
  std::vector<TrainLogRow> log;
  double wall_seconds{0.0};
};

using TrainProgress = std::function<void(const TrainLogRow&)>;

/// Deterministic in (setup, cfg, seed). Training runs in single precision;
/// the returned model is converted to double.
TrainResult train(const TrainingSetup& setup, const Td3Config& cfg, std::uint64_t seed,
                  const ScenarioFactory& factory = {}, const TrainProgress& progress = {});

/// CSV with header step,eval_success_rate,eval_mean_steps,critic_loss,actor_J,lr,expl_std.
std::string format_train_log(const std::vector<TrainLogRow>& log);

/// Evaluation scenario set used during training (fixed seeds, disjoint from
/// the training stream).
std::vector<Scenario> evaluation_scenarios(const ScenarioFactory& factory, int count,
                                           std::uint64_t base_seed = 0xE7A1'5EED'0000ULL);

struct PolicyEvaluation {
  double success_rate{0.0};
  double mean_steps{0.0};      // over all episodes
  double collision_rate{0.0};  // episodes with at least one colliding footstep
  std::vector<FootstepPlan> plans;
};

PolicyEvaluation evaluate_policy(const TrainedModel& model, const std::vector<Scenario>& scenarios,
                                 int max_steps);

}  // namespace footfall
