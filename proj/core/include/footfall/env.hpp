#pragma once

// Footstep-planning MDP: observation, reward, termination and scenario
// generation for the three benchmark situations.

#include <array>
#include <cstdint>
#include <string_view>
#include <utility>

#include "footfall/geometry.hpp"

namespace footfall {

/// NO: no obstacle. AO: avoid a central obstacle between two zones.
/// FO: face a central obstacle from a fixed standoff.
enum class Situation { NO, AO, FO };

const char* to_string(Situation s);
/// Accepts "NO", "AO", "FO" (case-insensitive). Throws std::invalid_argument.
Situation parse_situation(std::string_view text);

struct Scenario {
  Footstep start;
  Footstep target;
  Obstacle obstacle;
  double area_half{2.0};

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct WorldState {
  Footstep support;
  Scenario scenario;
  int step_count{0};
};

inline constexpr std::size_t kObservationSize = 8;
inline constexpr std::size_t kActionSize = 3;

/// (1[f_r = f_t], x_t, s(y_t), cos th_t, s(sin th_t), x_o, s(y_o), rho),
/// target and obstacle expressed in the support-foot frame, s the symmetry
/// operator of the support foot.
using Observation = std::array<double, kObservationSize>;

struct RewardConfig {
  double w1{0.1};   // per meter of position error
  double w2{0.05};  // per radian of orientation error
  double w3{10.0};  // collision penalty, in steps

  /// Requires 0 <= w1, w2 <= 0.5 and w3 >= 2.
  void validate() const;

  friend bool operator==(const RewardConfig&, const RewardConfig&) = default;
};

struct ToleranceConfig {
  double tol_p{0.05};
  double tol_theta{deg_to_rad(5.0)};
  int truncation_steps{90};

  void validate() const;

  friend bool operator==(const ToleranceConfig&, const ToleranceConfig&) = default;
};

struct Transition {
  Observation obs{};
  Displacement action;  // the displacement actually applied (post clipping)
  double reward{0.0};
  Observation next_obs{};
  bool terminated{false};
  bool truncated{false};
  bool collided{false};
};

Observation observe(const WorldState& w);

double reward(const WorldState& w, bool collided, const RewardConfig& cfg);

bool is_terminal(const Footstep& support, const Footstep& target, const ToleranceConfig& tol);
inline bool is_terminal(const WorldState& w, const ToleranceConfig& tol) {
  return is_terminal(w.support, w.scenario.target, tol);
}

/// Clips, integrates, penalizes collision of the new footstep and flags
/// termination/truncation. Collisions never block the step.
std::pair<WorldState, Transition> env_step(const WorldState& w, const Displacement& a,
                                           const RewardConfig& cfg, const ToleranceConfig& tol,
                                           const RobotSpec& spec);

/// Throws std::invalid_argument if the start footstep collides with the
/// obstacle or lies outside the arena.
WorldState env_reset(const Scenario& sc, const RobotSpec& spec);

/// Zone geometry for scenario sampling. Zone bounds are fractions of
/// area_half so smaller arenas scale down; the defaults give the 4x4 m
/// layout: AO zones x in [0.6, 1.8] (mirrored), |y| <= 1.2.
struct ScenarioParams {
  double area_half{2.0};
  double ao_x_inner{0.3};
  double ao_x_outer{0.9};
  double ao_y_half{0.6};
  double fo_standoff{0.25};
  double start_clearance{0.3};
  int max_attempts{10000};
};

/// Deterministic in (situation, rho, seed). rho is forced to 0 for NO.
/// Throws std::runtime_error if rejection sampling exhausts max_attempts.
Scenario sample_scenario(Situation situation, double rho, std::uint64_t seed,
                         const RobotSpec& spec, const ScenarioParams& params = {});

/// Reflects every pose about the x axis and swaps foot labels.
Scenario mirror_scenario(const Scenario& sc);
WorldState mirror_world(const WorldState& w);

}  // namespace footfall
