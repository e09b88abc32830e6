#pragma once

// Inference with a trained model: deterministic action selection, policy
// roll-outs, and step-count forecasting from the critics.

#include <array>
#include <cstdint>
#include <vector>

#include "footfall/env.hpp"
#include "footfall/model.hpp"

namespace footfall {

struct FootstepPlan {
  std::vector<Footstep> steps;  // starts with the current support footstep
  bool reached{false};
  int length{0};      // displacements taken
  int collisions{0};  // planned footsteps overlapping the obstacle
};

/// Per-thread network pass counters, for cost accounting in tests and tools.
struct InferenceCounters {
  std::uint64_t actor_passes{0};
  std::uint64_t critic_passes{0};
};

InferenceCounters& inference_counters();
void reset_inference_counters();

using NormalizedAction = std::array<double, kActionSize>;

/// Affine map from [-1, 1]^3 to the action box (asymmetric in x), followed
/// by projection onto the feasible ellipsoid.
Displacement denormalize_action(const NormalizedAction& u, const FeasibleSet& fs);

/// Raw tanh output of the actor (one actor pass).
NormalizedAction actor_output(const TrainedModel& model, const Observation& obs);

Displacement act(const TrainedModel& model, const Observation& obs);

/// Applies the policy `horizon` times or until the target is reached.
FootstepPlan rollout(const TrainedModel& model, const WorldState& w, int horizon);

/// Rolls out until the target is reached or `cap` steps were taken.
FootstepPlan rollout_to_target(const TrainedModel& model, const WorldState& w, int cap = 200);

enum class ForecastCritic { Min, Critic1 };

struct ForecastOptions {
  ForecastCritic critic{ForecastCritic::Min};
  bool raw_q{false};  // report -q instead of the geometric-sum inversion
};

/// Critic estimate q(s, pi(s)): one actor pass plus one (Critic1) or two
/// (Min) critic passes.
double critic_value(const TrainedModel& model, const Observation& obs,
                    ForecastCritic which = ForecastCritic::Min);

/// Inverts q = -(1 - gamma^n) / (1 - gamma) for n. q >= 0 gives 0; values
/// beyond the geometric horizon saturate at ln(1e-6) / ln(gamma).
double steps_from_value(double q, double gamma);

double forecast_steps(const TrainedModel& model, const WorldState& w, const ForecastOptions& opt = {});

struct TargetSelection {
  std::size_t index{0};
  std::vector<double> forecasts;
};

/// One forecast per candidate target, no roll-outs. Ties keep the lowest
/// index. Throws std::invalid_argument for an empty candidate list.
TargetSelection select_target(const TrainedModel& model, const Footstep& support,
                              const Obstacle& obstacle, const std::vector<Footstep>& candidates,
                              const ForecastOptions& opt = {});

/// True when consecutive feet alternate and every displacement lies in the
/// feasible set within `slack`.
bool plan_is_feasible(const FootstepPlan& plan, const RobotSpec& spec, double slack = 1e-9);

}  // namespace footfall
