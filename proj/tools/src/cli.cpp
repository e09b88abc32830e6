#include "footfall_cli/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <stdexcept>

#include "footfall/model_io.hpp"
#include "footfall/plan_io.hpp"
#include "footfall/render.hpp"
#include "footfall/scenario_io.hpp"
#include "footfall/search.hpp"
#include "footfall/td3.hpp"
#include "footfall/text_io.hpp"

namespace footfall::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t parse_seed(const std::string& text, const char* what) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size()) {
    throw UsageError(std::string(what) + ": invalid seed '" + text + "'");
  }
  return v;
}

/// --seed wins, then FSN_SEED, then 0.
std::uint64_t resolve_seed(const std::optional<std::string>& flag) {
  if (flag) return parse_seed(*flag, "--seed");
  if (const char* env = std::getenv("FSN_SEED"); env != nullptr && *env != '\0') return parse_seed(env, "FSN_SEED");
  return 0;
}

std::vector<Situation> parse_situation_list(const std::string& text) {
  std::vector<Situation> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      out.push_back(parse_situation(item));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

Situation situation_flag(const std::string& text) {
  try {
    return parse_situation(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::vector<Footstep> parse_targets(const std::string& text, const std::string& source) {
  std::vector<Footstep> out;
  std::size_t pos = 0;
  std::size_t line = 0;
  while (pos < text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view raw(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line;
    const auto fields = split_fields(strip_comment(raw));
    if (fields.empty()) continue;
    out.push_back(parse_footstep_fields(fields, 0, source, line));
  }
  if (out.empty()) throw ParseError(source, 0, "no candidate targets");
  return out;
}

ActionSet resolve_action_set(const std::string& name, const RobotSpec& robot) {
  if (name == "A") return ActionSet::set_a();
  if (name == "B") return ActionSet::set_b();
  return load_action_set(name, robot.feasible);
}

// ---------------------------------------------------------------- train

struct TrainFlags {
  std::int64_t steps{1'000'000};
  std::optional<std::string> seed;
  std::optional<double> gamma;
  std::string out;
  std::string situations{"NO,AO,FO"};
  std::string log;
  std::string meta;
  std::optional<std::int64_t> eval_every;
  std::optional<int> eval_episodes;
  std::optional<std::int64_t> warmup;
  double arena{4.0};
  bool quiet{false};
};

int cmd_train(const TrainFlags& f, std::ostream& out, std::ostream& err) {
  TrainingSetup setup;
  setup.situations = parse_situation_list(f.situations);
  setup.scenario.area_half = 0.5 * f.arena;
  Td3Config cfg;
  cfg.total_steps = f.steps;
  if (f.gamma) cfg.gamma = *f.gamma;
  if (f.eval_every) cfg.eval_every = *f.eval_every;
  if (f.eval_episodes) cfg.eval_episodes = *f.eval_episodes;
  if (f.warmup) cfg.warmup_steps = *f.warmup;
  const std::uint64_t seed = resolve_seed(f.seed);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const TrainResult r = train(setup, cfg, seed, {}, [&](const TrainLogRow& row) {
    if (f.quiet) return;
    err << "step " << row.step << "  success " << row.eval_success_rate << "  mean_steps " << row.eval_mean_steps
        << "  critic_loss " << row.critic_loss << "  actor_J " << row.actor_j << "\n"
        << std::flush;
  });

  save_model(f.out, r.model);
  if (!f.log.empty()) write_file_atomic(f.log, format_train_log(r.log));
  if (!f.meta.empty()) {
    nlohmann::ordered_json j;
    j["steps"] = cfg.total_steps;
    j["seed"] = seed;
    j["situations"] = f.situations;
    j["arena"] = f.arena;
    j["gamma"] = cfg.gamma;
    j["wall_seconds"] = r.wall_seconds;
    if (!r.log.empty()) j["final_eval_success_rate"] = r.log.back().eval_success_rate;
    write_file_atomic(f.meta, j.dump(2) + "\n");
  }
  out << "wrote " << f.out << " (" << cfg.total_steps << " steps, " << r.wall_seconds << " s)\n";
  return kOk;
}

// ---------------------------------------------------------------- plan

struct PlanFlags {
  std::string model;
  std::string scenario;
  std::optional<int> horizon;
  bool full{false};
  int cap{200};
  std::string out;
};

int cmd_plan(const PlanFlags& f, std::ostream& out, std::ostream&) {
  const TrainedModel model = load_model(f.model);
  const Scenario sc = load_scenario(f.scenario);
  const WorldState w = env_reset(sc, model.robot);
  const bool full = f.full || !f.horizon;
  const FootstepPlan plan = full ? rollout_to_target(model, w, f.cap) : rollout(model, w, *f.horizon);
  const std::string text = format_plan(plan);
  if (!f.out.empty()) write_file_atomic(f.out, text);
  out << text;
  return full && !plan.reached ? kNotReached : kOk;
}

// ---------------------------------------------------------------- forecast

struct ForecastFlags {
  std::string model;
  std::string scenario;
  std::string targets;
  bool raw_q{false};
  std::string critic{"min"};
};

int cmd_forecast(const ForecastFlags& f, std::ostream& out, std::ostream&) {
  const TrainedModel model = load_model(f.model);
  const Scenario sc = load_scenario(f.scenario);
  const auto targets = parse_targets(read_text_file(f.targets), f.targets);
  ForecastOptions opt;
  opt.raw_q = f.raw_q;
  opt.critic = f.critic == "critic1" ? ForecastCritic::Critic1 : ForecastCritic::Min;
  const TargetSelection sel = select_target(model, sc.start, sc.obstacle, targets, opt);
  for (std::size_t i = 0; i < sel.forecasts.size(); ++i) {
    out << "candidate " << i << " " << format_double(sel.forecasts[i]) << "\n";
  }
  out << "selected " << sel.index << "\n";
  return kOk;
}

// ---------------------------------------------------------------- bench

struct BenchFlags {
  std::string model;
  std::string mode;
  std::string situation{"NO"};
  double rho{0.0};
  int trials{100};
  std::optional<std::string> seed;
  std::string csv;
  std::string summary;
  int jobs{1};
  int n_alt{3};
  double disc{0.4};
  std::string jitter{"30deg"};
  std::vector<std::string> action_sets;
  std::int64_t node_budget{2'000'000};
  std::int64_t total_nodes{0};
  double time_limit{0.0};
  bool timing{false};
  double arena{4.0};
  int cap{200};
  bool raw_q{false};
  std::string critic{"min"};
};

int cmd_bench(const BenchFlags& f, std::ostream& out, std::ostream& err) {
  const Situation situation = situation_flag(f.situation);
  if (situation == Situation::NO && f.rho != 0.0) throw UsageError("--rho must be 0 for situation NO");
  if (situation != Situation::NO && !(f.rho > 0.0)) throw UsageError("--rho must be > 0 for AO and FO");
  if (f.trials < 1) throw UsageError("--trials must be >= 1");
  const TrainedModel model = load_model(f.model);
  const std::uint64_t seed = resolve_seed(f.seed);
  ScenarioParams params;
  params.area_half = 0.5 * f.arena;

  std::string csv;
  std::string summary;
  if (f.mode == "plan") {
    std::vector<SearchPlanner> planners;
    const std::vector<std::string> sets = f.action_sets.empty() ? std::vector<std::string>{"A"} : f.action_sets;
    for (const std::string& name : sets) {
      SearchPlanner p;
      p.search = SearchConfig::for_robot(model.robot, resolve_action_set(name, model.robot));
      p.search.node_budget = f.node_budget;
      p.name = "ara_" + p.search.action_set.name;
      p.budget.total_nodes = f.total_nodes;
      p.budget.wall = std::chrono::duration<double>(f.time_limit);
      planners.push_back(std::move(p));
    }
    if (f.time_limit > 0.0) err << "warning: --time-limit makes results depend on machine speed\n";
    PlanningOptions opt;
    opt.situation = situation;
    opt.rho = f.rho;
    opt.trials = f.trials;
    opt.seed = seed;
    opt.scenario = params;
    opt.rollout_cap = f.cap;
    opt.timing = f.timing;
    opt.jobs = f.jobs;
    const PlanStats stats = run_planning_benchmark(model, planners, opt);
    csv = format_planning_csv(stats.rows);
    if (auto problem = verify_planning_csv(csv, stats)) throw std::runtime_error(*problem);
    summary = format_planning_summary(stats);
  } else if (f.mode == "forecast") {
    ForecastBenchOptions opt;
    opt.situation = situation;
    opt.rho = f.rho;
    opt.trials = f.trials;
    opt.n_alt = f.n_alt;
    opt.seed = seed;
    opt.disc_radius = f.disc;
    try {
      opt.heading_jitter = parse_angle(f.jitter);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    opt.scenario = params;
    opt.rollout_cap = f.cap;
    opt.forecast.raw_q = f.raw_q;
    opt.forecast.critic = f.critic == "critic1" ? ForecastCritic::Critic1 : ForecastCritic::Min;
    opt.jobs = f.jobs;
    if (opt.n_alt < 2) throw UsageError("--n-alt must be >= 2");
    const ForecastStats stats = run_forecast_benchmark(model, opt);
    csv = format_forecast_csv(stats.rows);
    if (auto problem = verify_forecast_csv(csv, stats)) throw std::runtime_error(*problem);
    if (stats.dropped_candidates > 0) {
      err << "dropped " << stats.dropped_candidates << " candidates whose roll-out did not reach the target\n";
    }
    summary = format_forecast_summary(stats, situation, f.rho);
  } else {
    throw UsageError("--mode must be plan or forecast");
  }
  if (!f.csv.empty()) write_file_atomic(f.csv, csv);
  if (!f.summary.empty()) write_file_atomic(f.summary, summary);
  out << summary;
  return kOk;
}

// ---------------------------------------------------------------- render

struct RenderFlags {
  std::string plan;
  std::string scenario;
  std::string out;
};

int cmd_render(const RenderFlags& f, std::ostream& out, std::ostream& err) {
  const FootstepPlan plan = load_plan(f.plan);
  const Scenario sc = load_scenario(f.scenario);
  const RenderResult r = render_svg(sc, plan, RobotSpec::sigmaban());
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";
  if (f.out.empty()) {
    out << r.svg;
  } else {
    write_file_atomic(f.out, r.svg);
  }
  return kOk;
}

}  // namespace

double parse_angle(const std::string& text) {
  std::string_view s = text;
  bool degrees = false;
  if (s.size() > 3 && s.substr(s.size() - 3) == "deg") {
    degrees = true;
    s.remove_suffix(3);
  }
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("invalid angle '" + text + "'");
  }
  return degrees ? deg_to_rad(v) : v;
}

std::string format_planning_summary(const PlanStats& stats) {
  nlohmann::ordered_json j;
  j["situation"] = to_string(stats.situation);
  j["rho"] = stats.rho;
  j["trials"] = stats.trials;
  j["lower_bound_violations"] = stats.lower_bound_violations;
  j["infeasible_plans"] = stats.infeasible_plans;
  auto& arr = j["planners"] = nlohmann::ordered_json::array();
  for (const auto& p : stats.planners) {
    nlohmann::ordered_json o;
    o["name"] = p.name;
    o["reached"] = p.reached;
    o["pct_reached"] = p.pct_reached;
    o["mean_steps"] = p.mean_steps;
    o["sd_steps"] = p.sd_steps;
    o["pct_footfall_equal_or_better"] = p.pct_drl_equal_or_better;
    o["pct_step_reduction"] = p.pct_step_reduction;
    o["both_reached"] = p.both_reached;
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(p.scenario_hash));
    o["scenario_hash"] = hash;
    arr.push_back(o);
  }
  return j.dump(2) + "\n";
}

std::string format_forecast_summary(const ForecastStats& stats, Situation situation, double rho) {
  nlohmann::ordered_json j;
  j["situation"] = to_string(situation);
  j["rho"] = rho;
  j["trials"] = stats.trials;
  j["scored_trials"] = stats.scored_trials;
  j["dropped_candidates"] = stats.dropped_candidates;
  j["mean_rel_error_pct"] = stats.mean_rel_error_pct;
  j["best_mean"] = stats.best_mean;
  j["best_sd"] = stats.best_sd;
  j["worst_mean"] = stats.worst_mean;
  j["worst_sd"] = stats.worst_sd;
  j["erroneous_pct"] = stats.erroneous_pct;
  j["extra_steps_pct"] = stats.extra_steps_pct;
  j["improvement_pct"] = stats.improvement_pct;
  return j.dump(2) + "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Footstep planning with a learned policy and critic-based forecasts", "fsn"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "Train a model with TD3");
  train_cmd->add_option("--steps", tf.steps, "Environment steps")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--seed", tf.seed, "Seed (default: FSN_SEED or 0)");
  train_cmd->add_option("--gamma", tf.gamma, "Discount factor");
  train_cmd->add_option("--out", tf.out, "Model file to write")->required();
  train_cmd->add_option("--situations", tf.situations, "Comma-separated list of NO, AO, FO");
  train_cmd->add_option("--log", tf.log, "CSV training log");
  train_cmd->add_option("--meta", tf.meta, "JSON run summary");
  train_cmd->add_option("--eval-every", tf.eval_every, "Evaluation period in steps");
  train_cmd->add_option("--eval-episodes", tf.eval_episodes, "Episodes per evaluation");
  train_cmd->add_option("--warmup", tf.warmup, "Uniform-action warmup steps");
  train_cmd->add_option("--arena", tf.arena, "Arena side length in meters")->check(CLI::PositiveNumber);
  train_cmd->add_flag("--quiet", tf.quiet, "No progress output");

  PlanFlags pf;
  auto* plan_cmd = app.add_subcommand("plan", "Plan footsteps with the policy");
  plan_cmd->add_option("--model", pf.model, "Model file")->required();
  plan_cmd->add_option("--scenario", pf.scenario, "Scenario file")->required();
  auto* horizon = plan_cmd->add_option("--horizon", pf.horizon, "Number of footsteps")->check(CLI::PositiveNumber);
  auto* full = plan_cmd->add_flag("--full", pf.full, "Plan until the target is reached (default)");
  horizon->excludes(full);
  plan_cmd->add_option("--cap", pf.cap, "Step cap for --full")->check(CLI::PositiveNumber);
  plan_cmd->add_option("--out", pf.out, "Also write the plan to this file");

  ForecastFlags ff;
  auto* forecast_cmd = app.add_subcommand("forecast", "Forecast step counts for candidate targets");
  forecast_cmd->add_option("--model", ff.model, "Model file")->required();
  forecast_cmd->add_option("--scenario", ff.scenario, "Scenario file (support footstep and obstacle)")->required();
  forecast_cmd->add_option("--targets", ff.targets, "Candidate targets, one footstep per line")->required();
  forecast_cmd->add_flag("--raw-q", ff.raw_q, "Report -q instead of the step count");
  forecast_cmd->add_option("--critic", ff.critic, "min or critic1")->check(CLI::IsMember({"min", "critic1"}));

  BenchFlags bf;
  auto* bench_cmd = app.add_subcommand("bench", "Run the planning or forecast benchmark");
  bench_cmd->add_option("--model", bf.model, "Model file")->required();
  bench_cmd->add_option("--mode", bf.mode, "plan or forecast")->required()->check(CLI::IsMember({"plan", "forecast"}));
  bench_cmd->add_option("--situation", bf.situation, "NO, AO or FO");
  bench_cmd->add_option("--rho", bf.rho, "Obstacle radius");
  bench_cmd->add_option("--trials", bf.trials, "Number of scenarios");
  bench_cmd->add_option("--seed", bf.seed, "Seed (default: FSN_SEED or 0)");
  bench_cmd->add_option("--csv", bf.csv, "Per-instance CSV output");
  bench_cmd->add_option("--summary", bf.summary, "Summary output");
  bench_cmd->add_option("--jobs", bf.jobs, "Worker threads")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--n-alt", bf.n_alt, "Candidates per forecast trial");
  bench_cmd->add_option("--disc", bf.disc, "Candidate disc radius in meters")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--jitter", bf.jitter, "Candidate heading jitter (radians, or e.g. 30deg)");
  bench_cmd->add_option("--action-set", bf.action_sets, "A (default), B or an action-set file; repeatable");
  bench_cmd->add_option("--node-budget", bf.node_budget, "Expansions per search level")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--total-nodes", bf.total_nodes, "Expansions over all levels (0: unlimited)");
  bench_cmd->add_option("--time-limit", bf.time_limit, "Search wall-clock limit in seconds (0: none)");
  bench_cmd->add_flag("--timing", bf.timing, "Fill the wall_us column");
  bench_cmd->add_option("--arena", bf.arena, "Arena side length in meters")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--cap", bf.cap, "Roll-out step cap")->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--raw-q", bf.raw_q, "Forecast with -q");
  bench_cmd->add_option("--critic", bf.critic, "min or critic1")->check(CLI::IsMember({"min", "critic1"}));

  RenderFlags rf;
  auto* render_cmd = app.add_subcommand("render", "Draw a plan as SVG");
  render_cmd->add_option("--plan", rf.plan, "Plan file")->required();
  render_cmd->add_option("--scenario", rf.scenario, "Scenario file")->required();
  render_cmd->add_option("--out", rf.out, "SVG file (default: standard output)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(tf, out, err);
    if (plan_cmd->parsed()) return cmd_plan(pf, out, err);
    if (forecast_cmd->parsed()) return cmd_forecast(ff, out, err);
    if (bench_cmd->parsed()) return cmd_bench(bf, out, err);
    if (render_cmd->parsed()) return cmd_render(rf, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace footfall::cli
