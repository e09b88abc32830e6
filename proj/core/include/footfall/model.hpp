#pragma once

#include <cstdint>
#include <vector>

#include "footfall/env.hpp"
#include "footfall/neural.hpp"

namespace footfall {

inline constexpr int kCriticInputSize = static_cast<int>(kObservationSize + kActionSize);

/// Actor, twin critics and the robot/discount metadata needed to use them.
/// Networks work on normalized actions in [-1, 1]^3.
struct TrainedModel {
  Mlp actor;    // 8 -> 3, tanh head
  Mlp critic1;  // 11 -> 1, identity head
  Mlp critic2;
  double gamma{0.98};
  RobotSpec robot;
  RewardConfig reward_cfg;
  ToleranceConfig tolerance;

  /// Freshly initialized (untrained) networks with the given hidden sizes.
  static TrainedModel initialized(std::uint64_t seed, const std::vector<int>& hidden = {400, 300},
                                  double leaky_slope = 0.01);

  /// Throws std::invalid_argument on wrong network shapes or metadata.
  void validate() const;
};

}  // namespace footfall
