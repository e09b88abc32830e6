// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.
//
//   acceptance --models DIR [--only N]... [--retrain]
//
// Criteria 6 and 7 use the committed models in DIR (policy_1m.fsn and
// smoke_200k.fsn, each with a JSON run summary). --retrain trains both
// in-process instead, which takes hours on one core.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "footfall/bench.hpp"
#include "footfall/model_io.hpp"
#include "footfall/td3.hpp"
#include "footfall/text_io.hpp"
#include "geometry_oracles.hpp"
#include "search_instances.hpp"
#include "support.hpp"

using namespace footfall;
namespace fs = std::filesystem;
using fsn_test::uniform;

namespace {

struct Outcome {
  bool pass{true};
  std::string detail;
};

class Detail {
 public:
  template <typename T>
  Detail& operator<<(const T& v) {
    os_ << v;
    return *this;
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

constexpr std::uint64_t kHeldOutNo = 0xACCE'9700'0001ULL;
constexpr std::uint64_t kHeldOutAo = 0xACCE'9700'0002ULL;
constexpr std::uint64_t kHeldOutSmoke = 0xACCE'9700'0003ULL;

// ---------------------------------------------------------------- 1

Outcome geometry_oracles() {
  const RobotSpec spec;
  std::mt19937_64 rng(101);
  Outcome o;

  int disagreements = 0;
  int hits = 0;
  int checked = 0;
  while (checked < 1000) {
    const Footstep f{fsn_test::random_foot(rng), {uniform(rng, -0.4, 0.4), uniform(rng, -0.4, 0.4), uniform(rng, -kPi, kPi)}};
    const Obstacle ob{0.0, 0.0, uniform(rng, 0.05, 0.3)};
    if (std::abs(fsn_test::rect_distance(f, ob.x, ob.y, spec) - ob.rho) < 1e-3) continue;
    const bool expected = fsn_test::sampled_overlap(f, ob, spec, rng);
    disagreements += footstep_collides(f, ob, spec) != expected ? 1 : 0;
    hits += expected ? 1 : 0;
    ++checked;
  }

  double worst_group = 0.0;
  const Pose2 identity{};
  auto pose_gap = [](const Pose2& a, const Pose2& b) {
    return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(wrap_angle(a.theta - b.theta))});
  };
  for (int i = 0; i < 10000; ++i) {
    const Pose2 a = fsn_test::random_pose(rng);
    const Pose2 b = fsn_test::random_pose(rng);
    const Pose2 c = fsn_test::random_pose(rng);
    worst_group = std::max(worst_group, pose_gap(se2_compose(se2_compose(a, b), c), se2_compose(a, se2_compose(b, c))));
    worst_group = std::max(worst_group, pose_gap(se2_compose(a, se2_inverse(a)), identity));
    worst_group = std::max(worst_group, pose_gap(se2_compose(se2_inverse(a), a), identity));
    worst_group = std::max(worst_group, pose_gap(se2_compose(a, identity), a));
  }

  const FeasibleSet feas;
  double worst_radius = 0.0;
  int not_idempotent = 0;
  for (int i = 0; i < 100000; ++i) {
    const Displacement d{uniform(rng, -0.3, 0.3), uniform(rng, -0.2, 0.2), uniform(rng, -1.5, 1.5)};
    const Displacement c = clip_to_feasible(d, feas);
    worst_radius = std::max(worst_radius, feas.radius(c) - 1.0);
    not_idempotent += clip_to_feasible(c, feas) == c ? 0 : 1;
  }

  o.pass = disagreements == 0 && hits > 0 && hits < checked && worst_group <= 1e-10 && worst_radius <= 1e-9 &&
           not_idempotent == 0;
  o.detail = (Detail() << "collision disagreements " << disagreements << "/1000 (" << hits
                       << " overlaps); SE(2) worst error " << worst_group << "; clip radius excess " << std::max(worst_radius, 0.0)
                       << ", non-idempotent " << not_idempotent << "/100000")
                 .str();
  return o;
}

// ---------------------------------------------------------------- 2

Outcome gradient_check() {
  std::mt19937_64 rng(202);
  auto random_input = [&](int n) {
    Mlp::Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = uniform(rng, -1.0, 1.0);
    return x;
  };
  double worst = 0.0;
  const Mlp actor = mlp_init<double>({8, 400, 300, 3}, 1, OutputActivation::Tanh);
  const Mlp critic = mlp_init<double>({11, 400, 300, 1}, 2, OutputActivation::Identity);
  worst = std::max(worst, grad_check(actor, random_input(8), 3));
  worst = std::max(worst, grad_check(critic, random_input(11), 4));
  for (int k = 0; k < 18; ++k) {
    std::vector<int> dims{std::uniform_int_distribution<int>(1, 12)(rng)};
    const int hidden = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int h = 0; h < hidden; ++h) dims.push_back(std::uniform_int_distribution<int>(2, 40)(rng));
    dims.push_back(std::uniform_int_distribution<int>(1, 4)(rng));
    const auto head = k % 2 == 0 ? OutputActivation::Tanh : OutputActivation::Identity;
    const Mlp net = mlp_init<double>(dims, 100 + static_cast<std::uint64_t>(k), head, uniform(rng, 0.01, 0.3));
    worst = std::max(worst, grad_check(net, random_input(dims.front()), 200 + static_cast<std::uint64_t>(k)));
  }
  return {worst <= 1e-4, (Detail() << "worst relative error " << worst << " over 20 networks").str()};
}

// ---------------------------------------------------------------- 3

Outcome symmetry() {
  const TrainedModel model = TrainedModel::initialized(303, {64, 48});
  std::mt19937_64 rng(303);
  double worst_obs = 0.0;
  double worst_rollout = 0.0;
  int shape_mismatch = 0;
  for (int i = 0; i < 100; ++i) {
    const WorldState w = fsn_test::random_world(rng);
    const WorldState m = mirror_world(w);
    const Observation a = observe(w);
    const Observation b = observe(m);
    for (std::size_t k = 0; k < a.size(); ++k) worst_obs = std::max(worst_obs, std::abs(a[k] - b[k]));

    const FootstepPlan pa = rollout(model, w, 30);
    const FootstepPlan pb = rollout(model, m, 30);
    if (pa.steps.size() != pb.steps.size() || pa.reached != pb.reached) {
      ++shape_mismatch;
      continue;
    }
    for (std::size_t k = 0; k < pa.steps.size(); ++k) {
      const Footstep back = mirror_footstep(pb.steps[k]);
      if (back.foot != pa.steps[k].foot) ++shape_mismatch;
      worst_rollout = std::max({worst_rollout, std::abs(back.pose.x - pa.steps[k].pose.x),
                                std::abs(back.pose.y - pa.steps[k].pose.y),
                                std::abs(wrap_angle(back.pose.theta - pa.steps[k].pose.theta))});
    }
  }
  return {worst_obs <= 1e-12 && worst_rollout <= 1e-9 && shape_mismatch == 0,
          (Detail() << "observation gap " << worst_obs << "; roll-out gap " << worst_rollout << "; mismatches "
                    << shape_mismatch << " over 100 worlds")
              .str()};
}

// ---------------------------------------------------------------- 4

Outcome search_optimality() {
  const RobotSpec spec;
  const ToleranceConfig tol;
  const SearchConfig cfg = fsn_test::exact_search_config(spec);
  std::mt19937_64 rng(404);
  int astar_mismatch = 0;
  int ara_bound = 0;
  int ara_monotone = 0;
  int instances = 0;
  for (Situation s : {Situation::NO, Situation::AO, Situation::FO}) {
    for (int i = 0; i < 20; ++i) {
      const auto in = fsn_test::make_search_instance(s, cfg.action_set, rng, spec, 5);
      const auto bfs = bfs_oracle(in.start, in.target, in.obstacle, cfg, tol, spec, in.walk_length);
      const SearchResult a = astar_plan(in.start, in.target, in.obstacle, cfg, 1.0, tol, spec);
      ++instances;
      if (!bfs || !a.plan || a.plan->length != *bfs) {
        ++astar_mismatch;
        continue;
      }
      std::optional<int> prev;
      for (std::int64_t budget : {30, 300, 3000, 30000, 300000, 0}) {
        const AraResult r = ara_star(in.start, in.target, in.obstacle, cfg, {budget, {}}, tol, spec);
        for (std::size_t k = 0; k < r.level_lengths.size(); ++k) {
          if (r.level_lengths[k] && *r.level_lengths[k] > cfg.epsilon_schedule[k] * *bfs + 1e-9) ++ara_bound;
        }
        if (prev && (!r.plan || r.plan->length > *prev)) ++ara_monotone;
        if (r.plan) prev = r.plan->length;
      }
      if (!prev || *prev != *bfs) ++ara_monotone;
    }
  }
  return {astar_mismatch == 0 && ara_bound == 0 && ara_monotone == 0,
          (Detail() << instances << " instances; A*/BFS mismatches " << astar_mismatch << "; ARA* bound violations "
                    << ara_bound << "; non-monotone budgets " << ara_monotone)
              .str()};
}

// ---------------------------------------------------------------- 5

Outcome forecast_inversion() {
  const double gamma = Td3Config{}.gamma;
  double worst = 0.0;
  for (int n = 1; n <= 80; ++n) {
    const double q = -(1.0 - std::pow(gamma, n)) / (1.0 - gamma);
    worst = std::max(worst, std::abs(steps_from_value(q, gamma) - n));
  }
  return {worst <= 1e-3, (Detail() << "worst |n_hat - n| " << worst << " for n = 1..80").str()};
}

// ---------------------------------------------------------------- 6, 7

struct Models {
  std::optional<TrainedModel> full;
  std::optional<nlohmann::json> full_meta;
  std::optional<TrainedModel> smoke;
  std::optional<nlohmann::json> smoke_meta;
  std::vector<std::string> problems;
};

std::vector<Scenario> held_out(Situation s, double rho, int n, std::uint64_t base, const ScenarioParams& params) {
  std::vector<Scenario> out;
  for (int i = 0; i < n; ++i) out.push_back(sample_scenario(s, rho, trial_seed(base, i), RobotSpec{}, params));
  return out;
}

Models load_models(const fs::path& dir) {
  Models m;
  auto load = [&](const std::string& stem, std::optional<TrainedModel>& model, std::optional<nlohmann::json>& meta) {
    try {
      model = load_model(dir / (stem + ".fsn"));
      meta = nlohmann::json::parse(read_text_file(dir / (stem + ".json")));
    } catch (const std::exception& e) {
      m.problems.push_back(e.what());
      model.reset();
    }
  };
  load("policy_1m", m.full, m.full_meta);
  load("smoke_200k", m.smoke, m.smoke_meta);
  return m;
}

Models retrain() {
  Models m;
  auto run = [](double arena, std::int64_t steps) {
    TrainingSetup setup;
    setup.scenario.area_half = 0.5 * arena;
    Td3Config cfg;
    cfg.total_steps = steps;
    const TrainResult r = train(setup, cfg, 7, {}, [](const TrainLogRow& row) {
      std::cerr << "  step " << row.step << " success " << row.eval_success_rate << "\n";
    });
    nlohmann::json meta{{"steps", steps},          {"seed", 7},
                        {"situations", "NO,AO,FO"}, {"arena", arena},
                        {"wall_seconds", r.wall_seconds}};
    return std::pair{r.model, meta};
  };
  std::cerr << "training the 200k-step smoke model\n";
  std::tie(m.smoke, m.smoke_meta) = run(2.0, 200'000);
  std::cerr << "training the 1M-step model\n";
  std::tie(m.full, m.full_meta) = run(4.0, 1'000'000);
  return m;
}

Outcome desk_training(const Models& models) {
  if (!models.full || !models.smoke) {
    std::string why = "missing model";
    for (const auto& p : models.problems) why += "; " + p;
    return {false, why};
  }
  const TrainedModel& full = *models.full;
  const ScenarioParams arena4;
  const auto no = held_out(Situation::NO, 0.0, 200, kHeldOutNo, arena4);
  const PolicyEvaluation ev_no = evaluate_policy(full, no, 90);
  int below_bound = 0;
  for (std::size_t i = 0; i < no.size(); ++i) {
    const FootstepPlan& p = ev_no.plans[i];
    if (p.reached && p.length < step_lower_bound(no[i].start, no[i].target, full.robot, full.tolerance)) ++below_bound;
  }
  const auto ao = held_out(Situation::AO, 0.15, 200, kHeldOutAo, arena4);
  const PolicyEvaluation ev_ao = evaluate_policy(full, ao, 90);

  ScenarioParams arena2;
  arena2.area_half = 1.0;
  const auto smoke_no = held_out(Situation::NO, 0.0, 200, kHeldOutSmoke, arena2);
  const PolicyEvaluation ev_smoke = evaluate_policy(*models.smoke, smoke_no, 90);
  const double smoke_wall = models.smoke_meta->value("wall_seconds", 1e30);
  const double full_wall = models.full_meta->value("wall_seconds", 1e30);
  const bool full_is_1m = models.full_meta->value("steps", 0) == 1'000'000;
  const bool smoke_is_200k = models.smoke_meta->value("steps", 0) == 200'000 &&
                             models.smoke_meta->value("arena", 0.0) == 2.0;

  const bool pass = full_is_1m && smoke_is_200k && ev_no.success_rate >= 0.70 && below_bound == 0 &&
                    ev_ao.collision_rate <= 0.10 && ev_smoke.success_rate >= 0.60 && smoke_wall <= 3600.0;
  return {pass, (Detail() << std::setprecision(4) << "1M: NO success " << 100.0 * ev_no.success_rate
                          << "% (need >= 70), plans below the lower bound " << below_bound << ", AO(0.15) collisions "
                          << 100.0 * ev_ao.collision_rate << "% (need <= 10), trained in " << full_wall / 3600.0
                          << " h; smoke: NO success " << 100.0 * ev_smoke.success_rate << "% (need >= 60) in "
                          << smoke_wall / 60.0 << " min (need <= 60)")
                    .str()};
}

Outcome forecast_consistency(const Models& models) {
  if (!models.full) return {false, "missing model"};
  std::vector<ForecastRow> rows;
  int offset = 0;
  const std::vector<std::pair<Situation, int>> split{{Situation::NO, 167}, {Situation::AO, 167}, {Situation::FO, 166}};
  for (const auto& [situation, trials] : split) {
    ForecastBenchOptions opt;
    opt.situation = situation;
    opt.rho = situation == Situation::NO ? 0.0 : 0.15;
    opt.trials = trials;
    opt.seed = 707;
    const ForecastStats s = run_forecast_benchmark(*models.full, opt);
    for (ForecastRow r : s.rows) {
      r.trial += offset;
      rows.push_back(r);
    }
    offset += trials;
  }
  const ForecastStats s = summarize_forecast(rows, offset);
  return {s.mean_rel_error_pct <= 25.0 && s.erroneous_pct <= 20.0,
          (Detail() << std::setprecision(4) << offset << " scenarios x 3 candidates: mean relative error "
                    << s.mean_rel_error_pct << "% (need <= 25), erroneous choices " << s.erroneous_pct
                    << "% (need <= 20) over " << s.scored_trials << " scored sets, " << s.dropped_candidates
                    << " candidates dropped")
              .str()};
}

// ---------------------------------------------------------------- 8

Outcome bench_determinism(const Models& models) {
  const TrainedModel model = models.full ? *models.full : TrainedModel::initialized(808);
  SearchPlanner planner;
  planner.name = "ara_A";
  planner.search = SearchConfig::for_robot(model.robot);
  planner.search.node_budget = 20000;
  int differing = 0;
  int runs = 0;
  for (Situation s : {Situation::NO, Situation::AO, Situation::FO}) {
    PlanningOptions p;
    p.situation = s;
    p.rho = s == Situation::NO ? 0.0 : 0.15;
    p.trials = 8;
    p.seed = 808;
    const std::string a = format_planning_csv(run_planning_benchmark(model, {planner}, p).rows);
    const std::string b = format_planning_csv(run_planning_benchmark(model, {planner}, p).rows);
    p.jobs = 3;
    const std::string c = format_planning_csv(run_planning_benchmark(model, {planner}, p).rows);
    differing += (a != b) + (a != c);

    ForecastBenchOptions f;
    f.situation = s;
    f.rho = p.rho;
    f.trials = 8;
    f.seed = 808;
    const std::string fa = format_forecast_csv(run_forecast_benchmark(model, f).rows);
    const std::string fb = format_forecast_csv(run_forecast_benchmark(model, f).rows);
    f.jobs = 3;
    const std::string fc = format_forecast_csv(run_forecast_benchmark(model, f).rows);
    differing += (fa != fb) + (fa != fc);
    runs += 4;
  }
  return {differing == 0, (Detail() << differing << " of " << runs << " repeated bench runs differ from the first").str()};
}

// ---------------------------------------------------------------- 9

Outcome inference_cost() {
  const TrainedModel model = TrainedModel::initialized(909, {32, 32});
  std::mt19937_64 rng(909);
  int bad = 0;
  for (int i = 0; i < 50; ++i) {
    const WorldState w = fsn_test::random_world(rng);
    reset_inference_counters();
    rollout(model, w, 1);
    bad += inference_counters().actor_passes != 1 || inference_counters().critic_passes != 0;

    reset_inference_counters();
    const FootstepPlan p = rollout(model, w, 7);
    bad += inference_counters().actor_passes != static_cast<std::uint64_t>(p.length);

    reset_inference_counters();
    forecast_steps(model, w, {ForecastCritic::Min, false});
    bad += inference_counters().actor_passes != 1 || inference_counters().critic_passes != 2;

    reset_inference_counters();
    forecast_steps(model, w, {ForecastCritic::Critic1, false});
    bad += inference_counters().actor_passes != 1 || inference_counters().critic_passes != 1;
  }
  return {bad == 0, (Detail() << bad << " counter mismatches over 200 calls").str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string models_dir = "models";
  std::vector<int> only;
  bool retrain_models = false;
  app.add_option("--models", models_dir, "Directory with the committed models");
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 9));
  app.add_flag("--retrain", retrain_models, "Train the models in-process instead of loading them");
  CLI11_PARSE(app, argc, argv);

  std::optional<Models> models;
  auto get_models = [&]() -> const Models& {
    if (!models) models = retrain_models ? retrain() : load_models(models_dir);
    return *models;
  };

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"geometry oracles", geometry_oracles},
      {"gradient check", gradient_check},
      {"symmetry equivariance", symmetry},
      {"search optimality", search_optimality},
      {"forecast inversion", forecast_inversion},
      {"desk-scale training", [&] { return desk_training(get_models()); }},
      {"forecast vs roll-out", [&] { return forecast_consistency(get_models()); }},
      {"benchmark determinism", [&] { return bench_determinism(get_models()); }},
      {"inference cost", inference_cost},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += o.pass ? 0 : 1;
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": "
              << o.detail << " [" << std::fixed << std::setprecision(1) << secs << " s]" << std::defaultfloat
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
