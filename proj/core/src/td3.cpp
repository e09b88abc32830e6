#include "footfall/td3.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "footfall/text_io.hpp"

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

namespace footfall {

void Td3Config::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("td3: gamma must lie in (0, 1)");
  if (total_steps < 0) throw std::invalid_argument("td3: total_steps must be >= 0");
  if (batch_size < 1 || static_cast<std::size_t>(batch_size) > buffer_capacity) {
    throw std::invalid_argument("td3: batch_size must lie in [1, buffer_capacity]");
  }
  if (policy_delay < 1) throw std::invalid_argument("td3: policy_delay must be >= 1");
  if (!(lr_initial > 0.0)) throw std::invalid_argument("td3: lr_initial must be > 0");
  if (!(exploration_std_initial >= 0.0 && target_noise_std >= 0.0 && target_noise_clip >= 0.0)) {
    throw std::invalid_argument("td3: noise scales must be >= 0");
  }
  if (!(polyak_tau >= 0.0 && polyak_tau <= 1.0)) throw std::invalid_argument("td3: polyak_tau must lie in [0, 1]");
  if (warmup_steps < 0 || eval_every < 1 || eval_episodes < 1) {
    throw std::invalid_argument("td3: warmup_steps >= 0, eval_every >= 1 and eval_episodes >= 1 required");
  }
}

namespace {

double remaining_fraction(std::int64_t step, std::int64_t total) {
  if (total <= 0) return 0.0;
  return std::clamp(1.0 - static_cast<double>(step) / static_cast<double>(total), 0.0, 1.0);
}

}  // namespace

double Td3Config::lr_at(std::int64_t step) const { return lr_initial * remaining_fraction(step, total_steps); }

double Td3Config::exploration_std_at(std::int64_t step) const {
  return exploration_std_initial * remaining_fraction(step, total_steps);
}

ScenarioFactory make_scenario_factory(const TrainingSetup& setup) {
  if (setup.situations.empty()) throw std::invalid_argument("training setup needs at least one situation");
  if (!(setup.rho_min >= 0.0 && setup.rho_max >= setup.rho_min)) {
    throw std::invalid_argument("training setup: invalid obstacle radius range");
  }
  return [setup](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, setup.situations.size() - 1);
    const Situation s = setup.situations[pick(rng)];
    const double rho = std::uniform_real_distribution<double>(setup.rho_min, setup.rho_max)(rng);
    return sample_scenario(s, rho, rng(), setup.robot, setup.scenario);
  };
}

template <typename Scalar>
Batch<Scalar> make_batch(const std::vector<Experience>& items) {
  const auto n = static_cast<Eigen::Index>(items.size());
  const auto nobs = static_cast<Eigen::Index>(kObservationSize);
  const auto nact = static_cast<Eigen::Index>(kActionSize);
  Batch<Scalar> b;
  b.obs.resize(nobs, n);
  b.next_obs.resize(nobs, n);
  b.action.resize(nact, n);
  b.reward.resize(1, n);
  b.not_done.resize(1, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Experience& e = items[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < nobs; ++i) {
      b.obs(i, j) = static_cast<Scalar>(e.obs[static_cast<std::size_t>(i)]);
      b.next_obs(i, j) = static_cast<Scalar>(e.next_obs[static_cast<std::size_t>(i)]);
    }
    for (Eigen::Index i = 0; i < nact; ++i) b.action(i, j) = static_cast<Scalar>(e.action[static_cast<std::size_t>(i)]);
    b.reward(0, j) = static_cast<Scalar>(e.reward);
    b.not_done(0, j) = e.terminated ? Scalar(0) : Scalar(1);
  }
  return b;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be > 0");
  store_.reserve(std::min<std::size_t>(capacity, 1u << 20));
}

void ReplayBuffer::push(const Experience& e) {
  if (store_.size() < capacity_) {
    store_.push_back(e);
  } else {
    store_[cursor_] = e;
  }
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, std::mt19937_64& rng) const {
  if (size_ == 0) throw std::logic_error("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

template <typename Scalar>
Batch<Scalar> ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
  std::vector<Experience> items;
  items.reserve(n);
  for (std::size_t i : sample_indices(n, rng)) items.push_back(store_[i]);
  return make_batch<Scalar>(items);
}

namespace {

template <typename Matrix>
Matrix stack_rows(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

}  // namespace

template <typename Scalar>
typename BasicMlp<Scalar>::Matrix critic_target(const Batch<Scalar>& batch, const TargetNets<Scalar>& targets,
                                                const Td3Config& cfg, std::mt19937_64& rng) {
  using Matrix = typename BasicMlp<Scalar>::Matrix;
  Matrix next_action = mlp_predict(targets.actor, batch.next_obs);
  if (cfg.target_noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.target_noise_std);
    for (Eigen::Index i = 0; i < next_action.size(); ++i) {
      const double n = std::clamp(noise(rng), -cfg.target_noise_clip, cfg.target_noise_clip);
      next_action(i) += static_cast<Scalar>(n);
    }
  }
  next_action = next_action.cwiseMax(Scalar(-1)).cwiseMin(Scalar(1));
  const Matrix x = stack_rows(batch.next_obs, next_action);
  const Matrix q = mlp_predict(targets.critic1, x).cwiseMin(mlp_predict(targets.critic2, x));
  return batch.reward + (static_cast<Scalar>(cfg.gamma) * batch.not_done.array() * q.array()).matrix();
}

template <typename Scalar>
double actor_ascent_step(BasicMlp<Scalar>& actor, AdamState<Scalar>& opt,
                         const typename BasicMlp<Scalar>::Matrix& obs, const CriticFn<Scalar>& critic,
                         double lr) {
  using Matrix = typename BasicMlp<Scalar>::Matrix;
  const auto cache = mlp_forward(actor, obs);
  auto [q, dq_da] = critic(obs, cache.output);
  const auto n = static_cast<Scalar>(obs.cols());
  // Minimizing -mean(Q).
  const Matrix grad_action = -dq_da / n;
  const auto grads = mlp_backward(actor, cache, grad_action);
  adam_step(opt, actor, grads, lr);
  return static_cast<double>(q.mean());
}

template <typename Scalar>
Td3Agent<Scalar>::Td3Agent(const Td3Config& cfg, std::uint64_t seed, const std::vector<int>& hidden,
                           double leaky_slope)
    : Td3Agent(cfg, TrainedModel::initialized(seed, hidden, leaky_slope)) {}

template <typename Scalar>
Td3Agent<Scalar>::Td3Agent(const Td3Config& cfg, const TrainedModel& model)
    : actor(model.actor.template cast<Scalar>()),
      critic1(model.critic1.template cast<Scalar>()),
      critic2(model.critic2.template cast<Scalar>()),
      actor_target(actor),
      critic1_target(critic1),
      critic2_target(critic2),
      actor_opt(adam_init(actor)),
      critic1_opt(adam_init(critic1)),
      critic2_opt(adam_init(critic2)),
      cfg_(cfg) {}

template <typename Scalar>
double Td3Agent<Scalar>::update_critics(const Batch<Scalar>& batch, double lr, std::mt19937_64& rng) {
  const Matrix y = critic_target(batch, TargetNets<Scalar>{actor_target, critic1_target, critic2_target}, cfg_, rng);
  const Matrix x = stack_rows(batch.obs, batch.action);
  const auto n = static_cast<Scalar>(batch.size());
  double loss = 0.0;
  for (auto [net, opt] : {std::pair{&critic1, &critic1_opt}, std::pair{&critic2, &critic2_opt}}) {
    const auto cache = mlp_forward(*net, x);
    const Matrix diff = cache.output - y;
    loss += static_cast<double>(diff.squaredNorm() / n);
    const Matrix grad = (Scalar(2) / n) * diff;
    adam_step(*opt, *net, mlp_backward(*net, cache, grad), lr);
  }
  return loss;
}

template <typename Scalar>
double Td3Agent<Scalar>::update_actor(const Batch<Scalar>& batch, double lr) {
  const auto nact = static_cast<Eigen::Index>(kActionSize);
  CriticFn<Scalar> critic = [this, nact](const Matrix& obs, const Matrix& action) {
    const auto cache = mlp_forward(critic1, stack_rows(obs, action));
    const Matrix ones = Matrix::Ones(1, obs.cols());
    const auto g = mlp_backward(critic1, cache, ones, false);
    return std::pair<Matrix, Matrix>{cache.output, g.input.bottomRows(nact)};
  };
  return actor_ascent_step(actor, actor_opt, batch.obs, critic, lr);
}

template <typename Scalar>
void Td3Agent<Scalar>::update_targets() {
  polyak_update(actor_target, actor, cfg_.polyak_tau);
  polyak_update(critic1_target, critic1, cfg_.polyak_tau);
  polyak_update(critic2_target, critic2, cfg_.polyak_tau);
}

template <typename Scalar>
NormalizedAction Td3Agent<Scalar>::act(const Observation& obs) const {
  Matrix x(static_cast<Eigen::Index>(kObservationSize), 1);
  for (std::size_t i = 0; i < kObservationSize; ++i) x(static_cast<Eigen::Index>(i), 0) = static_cast<Scalar>(obs[i]);
  const Matrix y = mlp_predict(actor, x);
  return {static_cast<double>(y(0, 0)), static_cast<double>(y(1, 0)), static_cast<double>(y(2, 0))};
}

template <typename Scalar>
TrainedModel Td3Agent<Scalar>::export_model(const TrainingSetup& setup) const {
  TrainedModel m;
  m.actor = actor.template cast<double>();
  m.critic1 = critic1.template cast<double>();
  m.critic2 = critic2.template cast<double>();
  m.gamma = cfg_.gamma;
  m.robot = setup.robot;
  m.reward_cfg = setup.reward;
  m.tolerance = setup.tolerance;
  return m;
}

std::vector<Scenario> evaluation_scenarios(const ScenarioFactory& factory, int count, std::uint64_t base_seed) {
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) out.push_back(factory(base_seed + static_cast<std::uint64_t>(i)));
  return out;
}

PolicyEvaluation evaluate_policy(const TrainedModel& model, const std::vector<Scenario>& scenarios, int max_steps) {
  PolicyEvaluation ev;
  if (scenarios.empty()) return ev;
  int reached = 0;
  int collided = 0;
  double steps = 0.0;
  for (const Scenario& sc : scenarios) {
    FootstepPlan plan = rollout_to_target(model, env_reset(sc, model.robot), max_steps);
    reached += plan.reached ? 1 : 0;
    collided += plan.collisions > 0 ? 1 : 0;
    steps += plan.length;
    ev.plans.push_back(std::move(plan));
  }
  const double n = static_cast<double>(scenarios.size());
  ev.success_rate = reached / n;
  ev.collision_rate = collided / n;
  ev.mean_steps = steps / n;
  return ev;
}

namespace {

// Flushes float denormals for the duration of training; near-zero Adam
// moments otherwise slow the GEMMs down noticeably.
class DenormalGuard {
 public:
#if defined(__SSE__)
  DenormalGuard() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
  ~DenormalGuard() { _mm_setcsr(saved_); }

 private:
  unsigned saved_;
#endif
};

}  // namespace

TrainResult train(const TrainingSetup& setup, const Td3Config& cfg, std::uint64_t seed,
                  const ScenarioFactory& factory, const TrainProgress& progress) {
  cfg.validate();
  setup.robot.validate();
  setup.reward.validate();
  setup.tolerance.validate();
  const DenormalGuard fp_guard;
  const auto started = std::chrono::steady_clock::now();

  TrainResult result;
  Td3Agent<float> agent(cfg, seed, setup.hidden, setup.leaky_slope);
  if (cfg.total_steps == 0) {
    result.model = agent.export_model(setup);
    return result;
  }

  const ScenarioFactory scenarios = factory ? factory : make_scenario_factory(setup);
  const std::vector<Scenario> eval_set = evaluation_scenarios(scenarios, cfg.eval_episodes);

  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  ReplayBuffer buffer(std::min<std::size_t>(cfg.buffer_capacity, static_cast<std::size_t>(cfg.total_steps)));
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);

  auto new_episode = [&] { return env_reset(scenarios(rng()), setup.robot); };
  WorldState w = new_episode();

  double loss_sum = 0.0;
  double j_sum = 0.0;
  std::int64_t loss_n = 0;
  std::int64_t j_n = 0;
  std::int64_t critic_updates = 0;

  for (std::int64_t t = 0; t < cfg.total_steps; ++t) {
    const Observation obs = observe(w);
    NormalizedAction u;
    if (t < cfg.warmup_steps) {
      for (double& v : u) v = uniform(rng);
    } else {
      u = agent.act(obs);
      const double sigma = cfg.exploration_std_at(t);
      for (double& v : u) v = std::clamp(v + sigma * normal(rng), -1.0, 1.0);
    }
    auto [next, tr] = env_step(w, denormalize_action(u, setup.robot.feasible), setup.reward, setup.tolerance,
                               setup.robot);
    buffer.push({obs, u, tr.reward, tr.next_obs, tr.terminated});
    w = (tr.terminated || tr.truncated) ? new_episode() : next;

    if (t >= cfg.warmup_steps && buffer.size() >= batch_size) {
      const double lr = cfg.lr_at(t);
      const Batch<float> batch = buffer.sample<float>(batch_size, rng);
      loss_sum += agent.update_critics(batch, lr, rng);
      ++loss_n;
      if (++critic_updates % cfg.policy_delay == 0) {
        j_sum += agent.update_actor(batch, lr);
        ++j_n;
        agent.update_targets();
      }
    }

    if ((t + 1) % cfg.eval_every == 0) {
      const PolicyEvaluation ev =
          evaluate_policy(agent.export_model(setup), eval_set, setup.tolerance.truncation_steps);
      TrainLogRow row;
      row.step = t + 1;
      row.eval_success_rate = ev.success_rate;
      row.eval_mean_steps = ev.mean_steps;
      row.critic_loss = loss_n > 0 ? loss_sum / static_cast<double>(loss_n) : 0.0;
      row.actor_j = j_n > 0 ? j_sum / static_cast<double>(j_n) : 0.0;
      row.lr = cfg.lr_at(t + 1);
      row.expl_std = cfg.exploration_std_at(t + 1);
      result.log.push_back(row);
      if (progress) progress(row);
      loss_sum = j_sum = 0.0;
      loss_n = j_n = 0;
    }
  }

  result.model = agent.export_model(setup);
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::string format_train_log(const std::vector<TrainLogRow>& log) {
  std::string out = "step,eval_success_rate,eval_mean_steps,critic_loss,actor_J,lr,expl_std\n";
  for (const auto& r : log) {
    out += std::to_string(r.step) + "," + format_double(r.eval_success_rate) + "," +
           format_double(r.eval_mean_steps) + "," + format_double(r.critic_loss) + "," +
           format_double(r.actor_j) + "," + format_double(r.lr) + "," + format_double(r.expl_std) + "\n";
  }
  return out;
}

template Batch<float> make_batch<float>(const std::vector<Experience>&);
template Batch<double> make_batch<double>(const std::vector<Experience>&);
template Batch<float> ReplayBuffer::sample<float>(std::size_t, std::mt19937_64&) const;
template Batch<double> ReplayBuffer::sample<double>(std::size_t, std::mt19937_64&) const;
template BasicMlp<float>::Matrix critic_target<float>(const Batch<float>&, const TargetNets<float>&,
                                                      const Td3Config&, std::mt19937_64&);
template BasicMlp<double>::Matrix critic_target<double>(const Batch<double>&, const TargetNets<double>&,
                                                        const Td3Config&, std::mt19937_64&);
template double actor_ascent_step<float>(BasicMlp<float>&, AdamState<float>&, const BasicMlp<float>::Matrix&,
                                         const CriticFn<float>&, double);
template double actor_ascent_step<double>(BasicMlp<double>&, AdamState<double>&, const BasicMlp<double>::Matrix&,
                                          const CriticFn<double>&, double);
template class Td3Agent<float>;
template class Td3Agent<double>;

}  // namespace footfall
