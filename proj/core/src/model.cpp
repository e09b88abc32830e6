#include "footfall/model.hpp"

#include <stdexcept>

namespace footfall {

TrainedModel TrainedModel::initialized(std::uint64_t seed, const std::vector<int>& hidden,
                                       double leaky_slope) {
  std::vector<int> actor_dims{static_cast<int>(kObservationSize)};
  actor_dims.insert(actor_dims.end(), hidden.begin(), hidden.end());
  actor_dims.push_back(static_cast<int>(kActionSize));
  std::vector<int> critic_dims{kCriticInputSize};
  critic_dims.insert(critic_dims.end(), hidden.begin(), hidden.end());
  critic_dims.push_back(1);

  TrainedModel m;
  m.actor = mlp_init<double>(actor_dims, seed, OutputActivation::Tanh, leaky_slope);
  m.critic1 = mlp_init<double>(critic_dims, seed + 1, OutputActivation::Identity, leaky_slope);
  m.critic2 = mlp_init<double>(critic_dims, seed + 2, OutputActivation::Identity, leaky_slope);
  return m;
}

void TrainedModel::validate() const {
  actor.validate();
  critic1.validate();
  critic2.validate();
  if (actor.input_size() != static_cast<int>(kObservationSize) ||
      actor.output_size() != static_cast<int>(kActionSize) || actor.output != OutputActivation::Tanh) {
    throw std::invalid_argument("model: actor must map 8 inputs to 3 tanh outputs");
  }
  for (const Mlp* c : {&critic1, &critic2}) {
    if (c->input_size() != kCriticInputSize || c->output_size() != 1 ||
        c->output != OutputActivation::Identity) {
      throw std::invalid_argument("model: critics must map 11 inputs to 1 linear output");
    }
  }
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("model: gamma must lie in (0, 1)");
  robot.validate();
  tolerance.validate();
}

}  // namespace footfall
