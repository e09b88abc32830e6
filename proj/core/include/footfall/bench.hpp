#pragma once

// Experiment harness: DRL roll-outs against anytime search on shared
// scenario streams, and critic forecasts against roll-out lengths on sets of
// nearby candidate targets. Output is deterministic in (model, options).
//
// Planning CSV:  trial,situation,rho,planner,reached,steps,wall_us
// Forecast CSV:  trial,candidate,forecast,rollout,chosen,best
//
// `steps` is empty for unreached plans and `rollout` is -1 for candidates
// whose roll-out failed. `wall_us` is only filled when timing is requested,
// since wall time would break byte-for-byte reproducibility.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "footfall/env.hpp"
#include "footfall/model.hpp"
#include "footfall/plan.hpp"
#include "footfall/search.hpp"

namespace footfall {

/// Seed of trial `i` in a stream rooted at `seed`.
std::uint64_t trial_seed(std::uint64_t seed, int trial);

/// FNV-1a over the text form of each scenario, in order.
std::uint64_t scenario_stream_hash(const std::vector<Scenario>& scenarios);

std::vector<Scenario> benchmark_scenarios(Situation situation, double rho, int trials, std::uint64_t seed,
                                          const RobotSpec& spec, const ScenarioParams& params = {});

struct SearchPlanner {
  std::string name;
  SearchConfig search;
  AraBudget budget;
};

struct PlanningOptions {
  Situation situation{Situation::NO};
  double rho{0.0};
  int trials{100};
  std::uint64_t seed{0};
  ScenarioParams scenario;
  int rollout_cap{200};
  bool timing{false};
  int jobs{1};
};

struct PlanRow {
  int trial{0};
  Situation situation{Situation::NO};
  double rho{0.0};
  std::string planner;
  bool reached{false};
  int steps{0};
  std::optional<double> wall_us;
};

struct PlannerSummary {
  std::string name;
  int trials{0};
  int reached{0};
  double mean_steps{0.0};  // over reached instances
  double sd_steps{0.0};    // sample standard deviation over reached instances
  double pct_reached{0.0};
  /// Instances where the DRL planner needs no more steps than this one; a
  /// failure counts against the planner that failed, double failures as ties.
  double pct_drl_equal_or_better{0.0};
  /// Step reduction of the DRL planner relative to this one, over instances
  /// both planners reached.
  double pct_step_reduction{0.0};
  int both_reached{0};
  std::uint64_t scenario_hash{0};
};

struct PlanStats {
  Situation situation{Situation::NO};
  double rho{0.0};
  int trials{0};
  std::vector<PlannerSummary> planners;  // DRL planner first
  std::vector<PlanRow> rows;             // trial-major, planners in summary order
  int lower_bound_violations{0};         // reached plans shorter than step_lower_bound
  int infeasible_plans{0};               // search plans failing the feasibility check
};

inline constexpr const char* kDrlPlannerName = "policy";

/// Throws std::invalid_argument for trials < 1 or a nonzero rho with NO.
PlanStats run_planning_benchmark(const TrainedModel& model, const std::vector<SearchPlanner>& planners,
                                 const PlanningOptions& opt);

/// Re-derives the per-planner aggregates from rows.
std::vector<PlannerSummary> summarize_planning(const std::vector<PlanRow>& rows, int trials,
                                               const std::vector<std::string>& planner_order);

std::string format_planning_csv(const std::vector<PlanRow>& rows);
std::vector<PlanRow> parse_planning_csv(const std::string& csv);

/// Empty when the CSV reproduces every aggregate within 1e-9, otherwise a
/// description of the first mismatch.
std::optional<std::string> verify_planning_csv(const std::string& csv, const PlanStats& stats);

/// Maps a world (support, target, obstacle) to a step-count forecast.
using Forecaster = std::function<double(const WorldState&)>;

struct ForecastBenchOptions {
  Situation situation{Situation::NO};
  double rho{0.0};
  int trials{100};
  int n_alt{3};
  std::uint64_t seed{0};
  double disc_radius{0.4};
  double heading_jitter{deg_to_rad(30.0)};
  ScenarioParams scenario;
  int rollout_cap{200};
  ForecastOptions forecast;
  int jobs{1};
};

struct ForecastRow {
  int trial{0};
  int candidate{0};
  double forecast{0.0};
  int rollout{-1};  // -1: roll-out failed, candidate dropped
  bool chosen{false};
  bool best{false};
};

struct ForecastStats {
  int trials{0};
  int scored_trials{0};        // trials with at least two usable candidates
  int dropped_candidates{0};
  double mean_rel_error_pct{0.0};
  double best_mean{0.0};
  double best_sd{0.0};
  double worst_mean{0.0};
  double worst_sd{0.0};
  double erroneous_pct{0.0};     // chosen roll-out longer than the best one
  double extra_steps_pct{0.0};   // mean excess of erroneous choices over the best
  double improvement_pct{0.0};   // mean (worst - best) / worst
  std::vector<ForecastRow> rows;
};

/// Candidate targets around `anchor`: uniform in a disc, heading jitter,
/// same foot, inside the arena and collision-free.
std::vector<Footstep> sample_candidates(const Footstep& anchor, const Obstacle& obstacle, double area_half,
                                        int n, double disc_radius, double heading_jitter, std::uint64_t seed,
                                        const RobotSpec& spec, int max_attempts = 10000);

/// Throws std::invalid_argument for n_alt < 2, trials < 1 or a nonzero rho
/// with NO. `forecaster` defaults to the model's critic forecast.
ForecastStats run_forecast_benchmark(const TrainedModel& model, const ForecastBenchOptions& opt,
                                     const Forecaster& forecaster = {});

ForecastStats summarize_forecast(const std::vector<ForecastRow>& rows, int trials);

std::string format_forecast_csv(const std::vector<ForecastRow>& rows);
std::vector<ForecastRow> parse_forecast_csv(const std::string& csv);
std::optional<std::string> verify_forecast_csv(const std::string& csv, const ForecastStats& stats);

}  // namespace footfall
