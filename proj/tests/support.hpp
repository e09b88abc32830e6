#pragma once

#include <random>

#include "footfall/env.hpp"

namespace fsn_test {

using namespace footfall;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Pose2 random_pose(std::mt19937_64& rng, double half = 2.0) {
  return {uniform(rng, -half, half), uniform(rng, -half, half), uniform(rng, -kPi, kPi)};
}

inline Foot random_foot(std::mt19937_64& rng) {
  return std::bernoulli_distribution(0.5)(rng) ? Foot::Left : Foot::Right;
}

inline Footstep random_footstep(std::mt19937_64& rng, double half = 2.0) {
  return {random_foot(rng), random_pose(rng, half)};
}

inline WorldState random_world(std::mt19937_64& rng) {
  WorldState w;
  w.support = random_footstep(rng);
  w.scenario.start = w.support;
  w.scenario.target = random_footstep(rng);
  if (std::bernoulli_distribution(0.7)(rng)) {
    w.scenario.obstacle = {uniform(rng, -1.5, 1.5), uniform(rng, -1.5, 1.5), uniform(rng, 0.1, 0.25)};
  }
  return w;
}

}  // namespace fsn_test
