#include "footfall/env.hpp"

#include <cctype>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace footfall {

const char* to_string(Situation s) {
  switch (s) {
    case Situation::NO: return "NO";
    case Situation::AO: return "AO";
    case Situation::FO: return "FO";
  }
  return "?";
}

Situation parse_situation(std::string_view text) {
  std::string upper;
  for (char c : text) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "NO") return Situation::NO;
  if (upper == "AO") return Situation::AO;
  if (upper == "FO") return Situation::FO;
  throw std::invalid_argument("unknown situation '" + std::string(text) + "' (expected NO, AO or FO)");
}

void RewardConfig::validate() const {
  if (!(w1 >= 0.0 && w1 <= 0.5 && w2 >= 0.0 && w2 <= 0.5)) {
    throw std::invalid_argument("reward shaping weights must lie in [0, 0.5]");
  }
  if (!(w3 >= 2.0)) throw std::invalid_argument("collision penalty w3 must be >= 2");
}

void ToleranceConfig::validate() const {
  if (!(tol_p > 0.0 && tol_theta > 0.0 && truncation_steps > 0)) {
    throw std::invalid_argument("tolerances and truncation limit must be strictly positive");
  }
}

Observation observe(const WorldState& w) {
  const Foot f = w.support.foot;
  const Pose2 target = to_frame(w.scenario.target.pose, w.support.pose);
  const Obstacle& o = w.scenario.obstacle;
  const Pose2 obstacle = to_frame({o.x, o.y, 0.0}, w.support.pose);
  // Adding 0.0 turns a negated zero into +0 so mirrored worlds compare equal.
  return {f == w.scenario.target.foot ? 1.0 : 0.0,
          target.x,
          apply_symmetry(f, target.y) + 0.0,
          std::cos(target.theta),
          apply_symmetry(f, std::sin(target.theta)) + 0.0,
          obstacle.x,
          apply_symmetry(f, obstacle.y) + 0.0,
          o.rho};
}

double reward(const WorldState& w, bool collided, const RewardConfig& cfg) {
  const PoseError e = pose_error(w.support, w.scenario.target);
  return -1.0 - cfg.w1 * e.delta_p - cfg.w2 * e.delta_theta - (collided ? cfg.w3 : 0.0);
}

bool is_terminal(const Footstep& support, const Footstep& target, const ToleranceConfig& tol) {
  if (support.foot != target.foot) return false;
  const PoseError e = pose_error(support, target);
  return e.delta_p <= tol.tol_p && e.delta_theta <= tol.tol_theta;
}

std::pair<WorldState, Transition> env_step(const WorldState& w, const Displacement& a,
                                           const RewardConfig& cfg, const ToleranceConfig& tol,
                                           const RobotSpec& spec) {
  Transition t;
  t.obs = observe(w);
  t.action = clip_to_feasible(a, spec.feasible);

  WorldState next = w;
  next.support = apply_displacement(w.support, t.action, spec);
  next.step_count = w.step_count + 1;

  t.collided = footstep_collides(next.support, next.scenario.obstacle, spec);
  t.reward = reward(next, t.collided, cfg);
  t.terminated = is_terminal(next, tol);
  t.truncated = !t.terminated && next.step_count >= tol.truncation_steps;
  t.next_obs = observe(next);
  return {next, t};
}

namespace {

bool inside_arena(const Footstep& f, double area_half) {
  return std::abs(f.pose.x) <= area_half && std::abs(f.pose.y) <= area_half;
}

}  // namespace

WorldState env_reset(const Scenario& sc, const RobotSpec& spec) {
  if (!inside_arena(sc.start, sc.area_half) || !inside_arena(sc.target, sc.area_half)) {
    throw std::invalid_argument("scenario start and target must lie inside the arena");
  }
  if (footstep_collides(sc.start, sc.obstacle, spec)) {
    throw std::invalid_argument("scenario start footstep collides with the obstacle");
  }
  return {sc.start, sc, 0};
}

Scenario sample_scenario(Situation situation, double rho, std::uint64_t seed,
                         const RobotSpec& spec, const ScenarioParams& params) {
  if (!(rho >= 0.0)) throw std::invalid_argument("obstacle radius must be non-negative");
  if (situation == Situation::NO) rho = 0.0;

  std::mt19937_64 rng(seed);
  const double a = params.area_half;
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::bernoulli_distribution coin(0.5);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto random_foot = [&] { return coin(rng) ? Foot::Left : Foot::Right; };

  Scenario sc;
  sc.area_half = a;
  sc.obstacle = situation == Situation::NO ? Obstacle{} : Obstacle{0.0, 0.0, rho};

  auto clear_start = [&](const Footstep& f) {
    if (footstep_collides(f, sc.obstacle, spec)) return false;
    if (!sc.obstacle.enabled()) return true;
    const double d = std::hypot(f.pose.x - sc.obstacle.x, f.pose.y - sc.obstacle.y);
    return d - sc.obstacle.rho >= params.start_clearance;
  };

  auto sample = [&](auto draw, auto accept, const char* what) {
    for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
      Footstep f = draw();
      if (accept(f)) return f;
    }
    throw std::runtime_error(std::string("sample_scenario: could not place a collision-free ") +
                             what + " after " + std::to_string(params.max_attempts) + " attempts");
  };

  auto arena_draw = [&] {
    Footstep f;
    f.foot = random_foot();
    f.pose = {uniform(-a, a), uniform(-a, a), angle(rng)};
    return f;
  };
  auto zone_draw = [&](double sign) {
    return [&, sign] {
      Footstep f;
      f.foot = random_foot();
      f.pose = {sign * uniform(params.ao_x_inner * a, params.ao_x_outer * a),
                uniform(-params.ao_y_half * a, params.ao_y_half * a), angle(rng)};
      return f;
    };
  };
  auto free_target = [&](const Footstep& f) { return !footstep_collides(f, sc.obstacle, spec); };

  switch (situation) {
    case Situation::NO:
      sc.target = {Foot::Right, {0.0, 0.0, 0.0}};
      sc.start = sample(arena_draw, clear_start, "start");
      break;
    case Situation::AO:
      sc.start = sample(zone_draw(-1.0), clear_start, "start");
      sc.target = sample(zone_draw(1.0), free_target, "target");
      break;
    case Situation::FO:
      sc.target = {Foot::Right, {-(rho + params.fo_standoff), 0.0, 0.0}};
      if (footstep_collides(sc.target, sc.obstacle, spec)) {
        throw std::runtime_error("sample_scenario: FO target collides with the obstacle");
      }
      sc.start = sample(arena_draw, clear_start, "start");
      break;
  }
  return sc;
}

Scenario mirror_scenario(const Scenario& sc) {
  return {mirror_footstep(sc.start), mirror_footstep(sc.target), mirror_obstacle(sc.obstacle),
          sc.area_half};
}

WorldState mirror_world(const WorldState& w) {
  return {mirror_footstep(w.support), mirror_scenario(w.scenario), w.step_count};
}

}  // namespace footfall
