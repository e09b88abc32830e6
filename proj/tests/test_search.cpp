#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "footfall/search.hpp"
#include "footfall/text_io.hpp"
#include "search_instances.hpp"
#include "support.hpp"

using namespace footfall;

TEST_CASE("built-in action sets are feasible") {
  const FeasibleSet fs;
  const ActionSet a = ActionSet::set_a();
  const ActionSet b = ActionSet::set_b();
  CHECK(a.displacements.size() == 8);
  CHECK(b.displacements.size() == 12);
  CHECK_NOTHROW(a.validate(fs));
  CHECK_NOTHROW(b.validate(fs));
  for (const auto& d : b.displacements) CHECK(fs.radius(d) <= 1.0 + 1e-9);
  ActionSet backward{"back", {{-0.03, 0.0, 0.0}}};
  CHECK_THROWS_AS(backward.validate(fs), std::invalid_argument);
  ActionSet too_far{"far", {{0.08, 0.01, 0.0}}};
  CHECK_THROWS_AS(too_far.validate(fs), std::invalid_argument);
}

TEST_CASE("action set text round-trip and diagnostics") {
  const ActionSet b = ActionSet::set_b();
  const ActionSet back = parse_action_set(format_action_set(b), "B");
  CHECK(back.displacements == b.displacements);
  try {
    parse_action_set("0.08 0 0\n# comment\n0.09 0 0\n", "x", FeasibleSet{}, "x.txt");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_action_set("0.08 0\n", "x"), ParseError);
  CHECK_THROWS_AS(parse_action_set("", "x"), ParseError);
}

TEST_CASE("successors apply every action and drop collisions") {
  const RobotSpec spec;
  const ActionSet set = ActionSet::set_a();
  const Footstep node{Foot::Right, {0.0, 0.0, 0.0}};
  CHECK(successors(node, set, Obstacle{}, spec).size() == set.displacements.size());

  // A disk just ahead of the swing foot's nominal position blocks the
  // forward steps but not the backward or in-place ones.
  const Obstacle ahead{0.22, 0.15, 0.1};
  const auto kept = successors(node, set, ahead, spec);
  CHECK(kept.size() < set.displacements.size());
  for (const Footstep& f : kept) CHECK_FALSE(footstep_collides(f, ahead, spec));
  for (const Footstep& f : kept) CHECK(f.pose.x < 0.08 - 1e-12);

  std::mt19937_64 rng(41);
  for (int i = 0; i < 100; ++i) {
    const Footstep s = fsn_test::random_footstep(rng);
    const auto a = successors(s, set, Obstacle{}, spec);
    const auto b = successors(mirror_footstep(s), set, Obstacle{}, spec);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      const Footstep m = mirror_footstep(b[k]);
      CHECK(m.foot == a[k].foot);
      CHECK(m.pose.x == doctest::Approx(a[k].pose.x).epsilon(1e-12));
      CHECK(m.pose.y == doctest::Approx(a[k].pose.y).epsilon(1e-12));
    }
  }
}

TEST_CASE("search successors snap onto a reachable target") {
  const RobotSpec spec;
  SearchConfig cfg = SearchConfig::for_robot(spec);
  const Footstep node{Foot::Right, {0.0, 0.0, 0.0}};
  const Footstep near = apply_displacement(node, {0.03, 0.01, deg_to_rad(7.0)}, spec);
  const auto with = search_successors(node, near, Obstacle{}, cfg, spec);
  CHECK(with.size() == cfg.action_set.displacements.size() + 1);
  CHECK(with.back() == near);
  // Same foot as the node, out of reach, or blocked: no snap.
  CHECK(search_successors(node, {Foot::Right, near.pose}, Obstacle{}, cfg, spec).size() == 8);
  CHECK(search_successors(node, {Foot::Left, {0.5, 0.15, 0.0}}, Obstacle{}, cfg, spec).size() == 8);
  CHECK(search_successors(node, near, Obstacle{near.pose.x, near.pose.y, 0.02}, cfg, spec).back() != near);
  cfg.snap_to_target = false;
  CHECK(search_successors(node, near, Obstacle{}, cfg, spec).size() == 8);
}

TEST_CASE("off-lattice headings are reachable through the snap step") {
  const RobotSpec spec;
  const ToleranceConfig tol;
  SearchConfig cfg = SearchConfig::for_robot(spec);
  cfg.node_budget = 200000;
  const Footstep start{Foot::Left, {-0.3, 0.075, 0.0}};
  const Footstep target{Foot::Right, {0.3, -0.2, 0.5}};
  const SearchResult r = astar_plan(start, target, Obstacle{0.0, 0.0, 0.1}, cfg, 1.0, tol, spec);
  REQUIRE(r.plan);
  CHECK(r.plan->steps.back() == target);
  CHECK(plan_is_feasible(*r.plan, spec));
  // Set A only turns in 20 degree increments, so without snapping the
  // 28.6 degree target heading is never within tolerance.
  cfg.snap_to_target = false;
  cfg.node_budget = 20000;
  CHECK_FALSE(astar_plan(start, target, Obstacle{0.0, 0.0, 0.1}, cfg, 1.0, tol, spec).plan);
}

TEST_CASE("heuristic formula") {
  SearchConfig cfg;
  cfg.d_max = 0.25;
  cfg.dtheta_max = deg_to_rad(20.0);
  const Footstep t{Foot::Right, {0.0, 0.0, 0.0}};
  CHECK(heuristic(t, t, cfg) == 0.0);
  CHECK(heuristic({Foot::Right, {1.0, 0.0, 0.0}}, t, cfg) == doctest::Approx(4.0));
  CHECK(heuristic({Foot::Right, {0.0, 0.0, deg_to_rad(40.0)}}, t, cfg) == doctest::Approx(2.0));

  const ToleranceConfig tol;
  CHECK(heuristic({Foot::Right, {0.04, 0.0, 0.0}}, t, cfg, tol) == 0.0);
  CHECK(heuristic({Foot::Left, {0.0, 0.0, 0.0}}, t, cfg, tol) == 1.0);
  CHECK(heuristic({Foot::Right, {1.05, 0.0, 0.0}}, t, cfg, tol) == doctest::Approx(4.0));
}

TEST_CASE("max step distance bounds every feasible footstep") {
  const RobotSpec spec;
  const double d_max = max_step_distance(spec);
  std::mt19937_64 rng(42);
  double seen = 0.0;
  for (int i = 0; i < 200000; ++i) {
    Displacement d{fsn_test::uniform(rng, -0.03, 0.08), fsn_test::uniform(rng, -0.04, 0.04),
                   fsn_test::uniform(rng, -0.35, 0.35)};
    d = clip_to_feasible(d, spec.feasible);
    const Footstep next = apply_displacement({Foot::Right, {}}, d, spec);
    seen = std::max(seen, std::hypot(next.pose.x, next.pose.y));
  }
  CHECK(seen <= d_max);
  CHECK(d_max <= seen * 1.001);
  // Lateral reach dominates: the outward step of dy_max.
  CHECK(d_max >= 0.19);
}

TEST_CASE("step lower bound") {
  const RobotSpec spec;
  const ToleranceConfig tol;
  const Footstep t{Foot::Right, {0.0, 0.0, 0.0}};
  CHECK(step_lower_bound(t, t, spec, tol) == 0);
  CHECK(step_lower_bound({Foot::Left, {0.0, 0.15, 0.0}}, t, spec, tol) == 1);
  CHECK(step_lower_bound({Foot::Right, {1.0, 0.0, 0.0}}, t, spec, tol) >= 4);
  CHECK(step_lower_bound({Foot::Right, {0.0, 0.0, kPi}}, t, spec, tol) >= 9);
  // Same foot needs an even count.
  CHECK(step_lower_bound({Foot::Right, {0.0, 0.0, kPi}}, t, spec, tol) % 2 == 0);
}

TEST_CASE("A* trivial cases") {
  const RobotSpec spec;
  const ToleranceConfig tol;
  const SearchConfig cfg = SearchConfig::for_robot(spec);
  const Footstep t{Foot::Right, {0.5, 0.5, 0.2}};
  const SearchResult same = astar_plan(t, t, Obstacle{}, cfg, 1.0, tol, spec);
  REQUIRE(same.plan);
  CHECK(same.plan->length == 0);
  const SearchResult swap = astar_plan({Foot::Left, t.pose}, t, Obstacle{}, cfg, 1.0, tol, spec);
  REQUIRE(swap.plan);
  CHECK(swap.plan->length >= 1);
  CHECK(swap.plan->steps.back().foot == Foot::Right);
  CHECK_THROWS_AS(astar_plan(t, t, Obstacle{}, cfg, 0.5, tol, spec), std::invalid_argument);
}

TEST_CASE("A* fails when the budget runs out") {
  const RobotSpec spec;
  SearchConfig cfg = SearchConfig::for_robot(spec);
  cfg.node_budget = 10;
  const SearchResult r = astar_plan({Foot::Right, {-1.5, 0.0, 0.0}}, {Foot::Right, {1.5, 0.0, 0.0}}, Obstacle{}, cfg,
                                    1.0, ToleranceConfig{}, spec);
  CHECK_FALSE(r.plan);
  CHECK(r.budget_exhausted);
  CHECK(r.expansions == 10);
}

TEST_CASE("A* and BFS agree on small instances") {
  const RobotSpec spec;
  const ToleranceConfig tol;
  const SearchConfig cfg = fsn_test::exact_search_config(spec);
  std::mt19937_64 rng(43);
  for (Situation s : {Situation::NO, Situation::AO, Situation::FO}) {
    for (int i = 0; i < 5; ++i) {
      const auto in = fsn_test::make_search_instance(s, cfg.action_set, rng, spec, 4);
      const auto bfs = bfs_oracle(in.start, in.target, in.obstacle, cfg, tol, spec, 8);
      REQUIRE(bfs);
      CHECK(*bfs <= in.walk_length);
      const SearchResult a = astar_plan(in.start, in.target, in.obstacle, cfg, 1.0, tol, spec);
      REQUIRE(a.plan);
      CHECK(a.plan->length == *bfs);
      CHECK(plan_is_feasible(*a.plan, spec));
      for (const Footstep& f : a.plan->steps) CHECK_FALSE(footstep_collides(f, in.obstacle, spec));
      CHECK(step_lower_bound(in.start, in.target, spec, tol) <= *bfs);
    }
  }
}

TEST_CASE("BFS trivial cases") {
  const RobotSpec spec;
  const ToleranceConfig tol;
  const SearchConfig cfg = SearchConfig::for_robot(spec);
  const Footstep s{Foot::Left, {0.0, 0.15, 0.0}};
  CHECK(bfs_oracle(s, s, Obstacle{}, cfg, tol, spec, 3) == 0);
  CHECK(bfs_oracle(s, {Foot::Right, {0.08, 0.0, 0.0}}, Obstacle{}, cfg, tol, spec, 3) == 1);
  CHECK_FALSE(bfs_oracle(s, {Foot::Right, {1.0, 0.0, 0.0}}, Obstacle{}, cfg, tol, spec, 2));
}

TEST_CASE("ARA* improves with budget and respects the inflation bound") {
  const RobotSpec spec;
  const ToleranceConfig tol;
  SearchConfig cfg = fsn_test::exact_search_config(spec);
  std::mt19937_64 rng(44);
  for (int i = 0; i < 4; ++i) {
    const auto in = fsn_test::make_search_instance(Situation::NO, cfg.action_set, rng, spec, 4);
    const SearchResult opt = astar_plan(in.start, in.target, in.obstacle, cfg, 1.0, tol, spec);
    REQUIRE(opt.plan);
    std::optional<int> prev;
    for (std::int64_t budget : {10, 100, 1000, 10000, 100000, 1000000}) {
      const AraResult r = ara_star(in.start, in.target, in.obstacle, cfg, {budget, {}}, tol, spec);
      for (std::size_t k = 0; k < r.level_lengths.size(); ++k) {
        if (r.level_lengths[k]) CHECK(*r.level_lengths[k] <= cfg.epsilon_schedule[k] * opt.plan->length + 1e-9);
      }
      if (!r.plan) {
        CHECK_FALSE(prev);
        continue;
      }
      if (prev) CHECK(r.plan->length <= *prev);
      prev = r.plan->length;
    }
    const AraResult full = ara_star(in.start, in.target, in.obstacle, cfg, {}, tol, spec);
    REQUIRE(full.plan);
    CHECK(full.plan->length == opt.plan->length);
    CHECK(full.epsilon == 1.0);
  }
}

TEST_CASE("search configuration validation") {
  const RobotSpec spec;
  SearchConfig cfg = SearchConfig::for_robot(spec);
  CHECK_NOTHROW(cfg.validate(spec));
  cfg.epsilon_schedule = {3.0, 3.0, 1.0};
  CHECK_THROWS_AS(cfg.validate(spec), std::invalid_argument);
  cfg.epsilon_schedule = {2.0, 0.5};
  CHECK_THROWS_AS(cfg.validate(spec), std::invalid_argument);
}
