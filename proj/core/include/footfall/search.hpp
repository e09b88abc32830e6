#pragma once

// Discrete footstep search: A* over the successor graph of a fixed action
// set with a grid-hashed closed list, anytime restarts with a decreasing
// heuristic inflation, and a breadth-first oracle for small instances.
//
// Action-set files hold one displacement per line, `<dx> <dy> <dtheta>`
// (radians, right-support convention); `#` starts a comment.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "footfall/env.hpp"
#include "footfall/plan.hpp"

namespace footfall {

struct ActionSet {
  std::string name;
  std::vector<Displacement> displacements;

  /// Throws std::invalid_argument for an empty set, an infeasible member or
  /// a set without a strictly forward step.
  void validate(const FeasibleSet& fs) const;

  /// Eight actions: long and short forward, backward, lateral out and in,
  /// turns both ways, and a diagonal step.
  static ActionSet set_a();
  /// Set A plus four mixed steps.
  static ActionSet set_b();
};

/// Parses and validates against `fs`; throws ParseError on malformed lines
/// or infeasible members.
ActionSet parse_action_set(std::string_view text, const std::string& name, const FeasibleSet& fs = {},
                           const std::string& source = "<actions>");
/// The set is named after the file stem.
ActionSet load_action_set(const std::filesystem::path& path, const FeasibleSet& fs = {});
std::string format_action_set(const ActionSet& set);

/// Largest position change between consecutive footsteps over the feasible
/// set, from a dense sweep of the ellipse boundary with a small safety margin.
double max_step_distance(const RobotSpec& spec);

struct SearchConfig {
  ActionSet action_set;
  double grid_xy{0.02};
  double grid_theta{deg_to_rad(10.0)};
  std::vector<double> epsilon_schedule{10.0, 5.0, 3.0, 2.0, 1.5, 1.0};
  std::int64_t node_budget{2'000'000};  // expansions per astar_plan call
  double d_max{0.0};
  double dtheta_max{0.0};
  // Also offer the target itself as a successor when one feasible,
  // collision-free step reaches it.
  bool snap_to_target{true};

  /// Set A, default resolution and schedule, d_max and dtheta_max from spec.
  static SearchConfig for_robot(const RobotSpec& spec, ActionSet set = ActionSet::set_a());

  void validate(const RobotSpec& spec) const;
};

/// All successors of `node` that do not collide with the obstacle, in action
/// order.
std::vector<Footstep> successors(const Footstep& node, const ActionSet& set, const Obstacle& obstacle,
                                 const RobotSpec& spec);

/// successors() plus, with cfg.snap_to_target, the target when a single
/// feasible step on the right foot lands on it.
std::vector<Footstep> search_successors(const Footstep& node, const Footstep& target, const Obstacle& obstacle,
                                        const SearchConfig& cfg, const RobotSpec& spec);

/// max(dp / d_max, dtheta / dtheta_max).
double heuristic(const Footstep& node, const Footstep& target, const SearchConfig& cfg);

/// Goal-aware variant used by the planners: the pose errors are reduced by
/// the tolerances and a foot mismatch costs at least one step. Consistent
/// whenever d_max and dtheta_max bound a single footstep.
double heuristic(const Footstep& node, const Footstep& target, const SearchConfig& cfg,
                 const ToleranceConfig& tol);

struct SearchResult {
  std::optional<FootstepPlan> plan;  // empty on failure
  std::int64_t expansions{0};
  bool budget_exhausted{false};
};

/// Best-first search on f = g + epsilon * h with unit step costs. A state is
/// closed by grid cell when expanded. Fails when `node_budget` expansions
/// are spent or the open list empties.
SearchResult astar_plan(const Footstep& start, const Footstep& target, const Obstacle& obstacle,
                        const SearchConfig& cfg, double epsilon, const ToleranceConfig& tol,
                        const RobotSpec& spec);

struct AraBudget {
  std::int64_t total_nodes{0};          // 0: only the per-level budget applies
  std::chrono::duration<double> wall{0.0};  // 0: no wall-clock limit
};

struct AraResult {
  std::optional<FootstepPlan> plan;  // shortest plan over completed levels
  double epsilon{0.0};               // lowest epsilon that completed with a plan
  std::vector<std::optional<int>> level_lengths;  // per schedule level; nullopt if not completed
  std::int64_t expansions{0};
};

/// Runs astar_plan for each schedule level in turn, restarting from scratch,
/// until the schedule ends or the budget runs out.
AraResult ara_star(const Footstep& start, const Footstep& target, const Obstacle& obstacle,
                   const SearchConfig& cfg, const AraBudget& budget, const ToleranceConfig& tol,
                   const RobotSpec& spec);

/// Exact minimum footstep count by breadth-first enumeration over the same
/// grid-hashed graph, or nullopt beyond depth_cap. Meant for small sets.
std::optional<int> bfs_oracle(const Footstep& start, const Footstep& target, const Obstacle& obstacle,
                              const SearchConfig& cfg, const ToleranceConfig& tol, const RobotSpec& spec,
                              int depth_cap);

/// Lower bound on any feasible plan length, from the distance, heading and
/// foot parity.
int step_lower_bound(const Footstep& start, const Footstep& target, const RobotSpec& spec,
                     const ToleranceConfig& tol);

}  // namespace footfall
