#include "footfall/plan.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace footfall {

InferenceCounters& inference_counters() {
  thread_local InferenceCounters counters;
  return counters;
}

void reset_inference_counters() { inference_counters() = {}; }

Displacement denormalize_action(const NormalizedAction& u, const FeasibleSet& fs) {
  const double mid_x = 0.5 * (fs.dx_fwd_max - fs.dx_bwd_max);
  const double half_x = 0.5 * (fs.dx_fwd_max + fs.dx_bwd_max);
  auto unit = [](double v) { return std::clamp(v, -1.0, 1.0); };
  return clip_to_feasible(
      {mid_x + half_x * unit(u[0]), fs.dy_max * unit(u[1]), fs.dtheta_max * unit(u[2])}, fs);
}

namespace {

Mlp::Matrix observation_column(const Observation& obs) {
  Mlp::Matrix x(static_cast<Eigen::Index>(kObservationSize), 1);
  for (std::size_t i = 0; i < kObservationSize; ++i) x(static_cast<Eigen::Index>(i), 0) = obs[i];
  return x;
}

}  // namespace

NormalizedAction actor_output(const TrainedModel& model, const Observation& obs) {
  ++inference_counters().actor_passes;
  const Mlp::Matrix y = mlp_predict(model.actor, observation_column(obs));
  return {y(0, 0), y(1, 0), y(2, 0)};
}

Displacement act(const TrainedModel& model, const Observation& obs) {
  return denormalize_action(actor_output(model, obs), model.robot.feasible);
}

namespace {

FootstepPlan run_policy(const TrainedModel& model, const WorldState& start, int max_steps) {
  FootstepPlan plan;
  plan.steps.push_back(start.support);
  WorldState w = start;
  if (is_terminal(w, model.tolerance)) {
    plan.reached = true;
    return plan;
  }
  for (int i = 0; i < max_steps; ++i) {
    auto [next, t] = env_step(w, act(model, observe(w)), model.reward_cfg, model.tolerance, model.robot);
    w = next;
    plan.steps.push_back(w.support);
    ++plan.length;
    if (t.collided) ++plan.collisions;
    if (t.terminated) {
      plan.reached = true;
      break;
    }
  }
  return plan;
}

}  // namespace

FootstepPlan rollout(const TrainedModel& model, const WorldState& w, int horizon) {
  if (horizon < 1) throw std::invalid_argument("rollout: horizon must be >= 1");
  return run_policy(model, w, horizon);
}

FootstepPlan rollout_to_target(const TrainedModel& model, const WorldState& w, int cap) {
  if (cap < 1) throw std::invalid_argument("rollout_to_target: cap must be >= 1");
  return run_policy(model, w, cap);
}

double critic_value(const TrainedModel& model, const Observation& obs, ForecastCritic which) {
  const NormalizedAction u = actor_output(model, obs);
  Mlp::Matrix x(kCriticInputSize, 1);
  for (std::size_t i = 0; i < kObservationSize; ++i) x(static_cast<Eigen::Index>(i), 0) = obs[i];
  for (std::size_t i = 0; i < kActionSize; ++i) {
    x(static_cast<Eigen::Index>(kObservationSize + i), 0) = u[i];
  }
  auto& counters = inference_counters();
  ++counters.critic_passes;
  double q = mlp_predict(model.critic1, x)(0, 0);
  if (which == ForecastCritic::Min) {
    ++counters.critic_passes;
    q = std::min(q, mlp_predict(model.critic2, x)(0, 0));
  }
  return q;
}

double steps_from_value(double q, double gamma) {
  if (q >= 0.0) return 0.0;
  constexpr double kFloor = 1e-6;
  const double arg = 1.0 + (1.0 - gamma) * q;
  if (arg <= kFloor) return std::log(kFloor) / std::log(gamma);
  return std::log(arg) / std::log(gamma);
}

double forecast_steps(const TrainedModel& model, const WorldState& w, const ForecastOptions& opt) {
  const double q = critic_value(model, observe(w), opt.critic);
  return opt.raw_q ? -q : steps_from_value(q, model.gamma);
}

TargetSelection select_target(const TrainedModel& model, const Footstep& support,
                              const Obstacle& obstacle, const std::vector<Footstep>& candidates,
                              const ForecastOptions& opt) {
  if (candidates.empty()) throw std::invalid_argument("select_target: no candidates");
  TargetSelection sel;
  sel.forecasts.reserve(candidates.size());
  for (const Footstep& c : candidates) {
    WorldState w;
    w.support = support;
    w.scenario.start = support;
    w.scenario.target = c;
    w.scenario.obstacle = obstacle;
    sel.forecasts.push_back(forecast_steps(model, w, opt));
  }
  sel.index = static_cast<std::size_t>(
      std::min_element(sel.forecasts.begin(), sel.forecasts.end()) - sel.forecasts.begin());
  return sel;
}

bool plan_is_feasible(const FootstepPlan& plan, const RobotSpec& spec, double slack) {
  for (std::size_t i = 1; i < plan.steps.size(); ++i) {
    const Footstep& a = plan.steps[i - 1];
    const Footstep& b = plan.steps[i];
    if (b.foot != mirror(a.foot)) return false;
    if (!spec.feasible.contains(displacement_between(a, b, spec), slack)) return false;
  }
  return true;
}

}  // namespace footfall
