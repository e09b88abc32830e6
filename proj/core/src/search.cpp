#include "footfall/search.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "footfall/text_io.hpp"

namespace footfall {

void ActionSet::validate(const FeasibleSet& fs) const {
  if (displacements.empty()) throw std::invalid_argument("action set '" + name + "' is empty");
  bool forward = false;
  for (const Displacement& d : displacements) {
    if (!fs.contains(d)) {
      throw std::invalid_argument("action set '" + name + "' holds an infeasible displacement");
    }
    forward = forward || d.dx > 0.0;
  }
  if (!forward) throw std::invalid_argument("action set '" + name + "' has no forward step");
}

ActionSet ActionSet::set_a() {
  const double t = deg_to_rad(20.0);
  return {"A",
          {{0.08, 0.0, 0.0},
           {0.04, 0.0, 0.0},
           {-0.03, 0.0, 0.0},
           {0.0, 0.04, 0.0},
           {0.0, -0.02, 0.0},
           {0.0, 0.0, t},
           {0.0, 0.0, -t},
           {0.05, 0.02, 0.0}}};
}

ActionSet ActionSet::set_b() {
  ActionSet s = set_a();
  s.name = "B";
  s.displacements.push_back({0.05, -0.02, 0.0});
  s.displacements.push_back({0.05, 0.0, deg_to_rad(10.0)});
  s.displacements.push_back({0.05, 0.0, -deg_to_rad(10.0)});
  s.displacements.push_back({0.02, 0.03, deg_to_rad(8.0)});
  return s;
}

ActionSet parse_action_set(std::string_view text, const std::string& name, const FeasibleSet& fs,
                           const std::string& source) {
  ActionSet set;
  set.name = name;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    const std::string_view raw = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    const auto fields = split_fields(strip_comment(raw));
    if (fields.empty()) continue;
    if (fields.size() != 3) throw ParseError(source, line_no, "expected '<dx> <dy> <dtheta>'");
    const Displacement d{parse_double(fields[0], source, line_no), parse_double(fields[1], source, line_no),
                         parse_double(fields[2], source, line_no)};
    if (!fs.contains(d)) throw ParseError(source, line_no, "displacement outside the feasible set");
    set.displacements.push_back(d);
  }
  try {
    set.validate(fs);
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, 0, e.what());
  }
  return set;
}

ActionSet load_action_set(const std::filesystem::path& path, const FeasibleSet& fs) {
  return parse_action_set(read_text_file(path), path.stem().string(), fs, path.string());
}

std::string format_action_set(const ActionSet& set) {
  std::string out = "# " + set.name + "\n";
  for (const Displacement& d : set.displacements) {
    out += format_double(d.dx) + " " + format_double(d.dy) + " " + format_double(d.dtheta) + "\n";
  }
  return out;
}

namespace {

double sweep_step_distance(const RobotSpec& spec) {
  // The distance is convex in (dx, dy), so the maximum sits on the boundary
  // of the ellipse; theta does not move the swing foot position.
  constexpr int kSamples = 1'000'000;
  const FeasibleSet& fs = spec.feasible;
  double best = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const double t = 2.0 * kPi * static_cast<double>(i) / kSamples;
    const double c = std::cos(t);
    const double dx = c * (c >= 0.0 ? fs.dx_fwd_max : fs.dx_bwd_max);
    const double dy = fs.dy_max * std::sin(t);
    best = std::max(best, std::hypot(dx, spec.f_dist + dy));
  }
  return best * (1.0 + 1e-6);
}

}  // namespace

double max_step_distance(const RobotSpec& spec) {
  thread_local std::optional<std::pair<RobotSpec, double>> cache;
  if (!cache || !(cache->first == spec)) cache.emplace(spec, sweep_step_distance(spec));
  return cache->second;
}

SearchConfig SearchConfig::for_robot(const RobotSpec& spec, ActionSet set) {
  SearchConfig cfg;
  cfg.action_set = std::move(set);
  cfg.d_max = max_step_distance(spec);
  cfg.dtheta_max = spec.feasible.dtheta_max;
  return cfg;
}

void SearchConfig::validate(const RobotSpec& spec) const {
  action_set.validate(spec.feasible);
  if (!(grid_xy > 0.0 && grid_theta > 0.0)) throw std::invalid_argument("grid resolution must be positive");
  if (!(d_max > 0.0 && dtheta_max > 0.0)) throw std::invalid_argument("d_max and dtheta_max must be positive");
  if (node_budget < 1) throw std::invalid_argument("node budget must be >= 1");
  if (epsilon_schedule.empty()) throw std::invalid_argument("epsilon schedule is empty");
  for (std::size_t i = 0; i < epsilon_schedule.size(); ++i) {
    if (i > 0 && !(epsilon_schedule[i] < epsilon_schedule[i - 1])) {
      throw std::invalid_argument("epsilon schedule must be strictly decreasing");
    }
  }
  if (!(epsilon_schedule.back() >= 1.0)) throw std::invalid_argument("epsilon values must be >= 1");
}

std::vector<Footstep> successors(const Footstep& node, const ActionSet& set, const Obstacle& obstacle,
                                 const RobotSpec& spec) {
  std::vector<Footstep> out;
  out.reserve(set.displacements.size());
  for (const Displacement& d : set.displacements) {
    const Footstep next = apply_displacement(node, d, spec);
    if (!footstep_collides(next, obstacle, spec)) out.push_back(next);
  }
  return out;
}

std::vector<Footstep> search_successors(const Footstep& node, const Footstep& target, const Obstacle& obstacle,
                                        const SearchConfig& cfg, const RobotSpec& spec) {
  std::vector<Footstep> out = successors(node, cfg.action_set, obstacle, spec);
  if (cfg.snap_to_target && node.foot != target.foot &&
      spec.feasible.contains(displacement_between(node, target, spec)) &&
      !footstep_collides(target, obstacle, spec)) {
    out.push_back(target);
  }
  return out;
}

double heuristic(const Footstep& node, const Footstep& target, const SearchConfig& cfg) {
  const PoseError e = pose_error(node, target);
  return std::max(e.delta_p / cfg.d_max, e.delta_theta / cfg.dtheta_max);
}

double heuristic(const Footstep& node, const Footstep& target, const SearchConfig& cfg,
                 const ToleranceConfig& tol) {
  const PoseError e = pose_error(node, target);
  const double hp = std::max(0.0, e.delta_p - tol.tol_p) / cfg.d_max;
  const double ht = std::max(0.0, e.delta_theta - tol.tol_theta) / cfg.dtheta_max;
  const double parity = node.foot == target.foot ? 0.0 : 1.0;
  return std::max({hp, ht, parity});
}

namespace {

struct CellKey {
  std::int64_t ix;
  std::int64_t iy;
  std::int64_t it;
  Foot foot;

  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
      h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    };
    mix(static_cast<std::uint64_t>(k.ix));
    mix(static_cast<std::uint64_t>(k.iy));
    mix(static_cast<std::uint64_t>(k.it));
    mix(k.foot == Foot::Left ? 1u : 2u);
    return static_cast<std::size_t>(h);
  }
};

class Grid {
 public:
  explicit Grid(const SearchConfig& cfg) : xy_(cfg.grid_xy), th_(cfg.grid_theta) {
    const double turns = 2.0 * kPi / th_;
    const auto k = std::llround(turns);
    if (k > 0 && std::abs(turns - static_cast<double>(k)) < 1e-9) wrap_ = k;
  }

  CellKey key(const Footstep& f) const {
    std::int64_t it = std::llround(wrap_angle(f.pose.theta) / th_);
    if (wrap_ > 0) it = ((it % wrap_) + wrap_) % wrap_;
    return {std::llround(f.pose.x / xy_), std::llround(f.pose.y / xy_), it, f.foot};
  }

 private:
  double xy_;
  double th_;
  std::int64_t wrap_{0};
};

struct Node {
  Footstep step;
  int g;
  int parent;
};

struct OpenEntry {
  double f;
  int g;
  int id;
};

struct OpenOrder {
  // Smallest f first, deeper nodes first on ties, then insertion order.
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.id > b.id;
  }
};

FootstepPlan trace_plan(const std::vector<Node>& nodes, int id) {
  FootstepPlan plan;
  for (int i = id; i >= 0; i = nodes[static_cast<std::size_t>(i)].parent) {
    plan.steps.push_back(nodes[static_cast<std::size_t>(i)].step);
  }
  std::reverse(plan.steps.begin(), plan.steps.end());
  plan.reached = true;
  plan.length = static_cast<int>(plan.steps.size()) - 1;
  return plan;
}

using Clock = std::chrono::steady_clock;

SearchResult weighted_astar(const Footstep& start, const Footstep& target, const Obstacle& obstacle,
                            const SearchConfig& cfg, double epsilon, const ToleranceConfig& tol,
                            const RobotSpec& spec, std::int64_t budget,
                            std::optional<Clock::time_point> deadline) {
  SearchResult result;
  const Grid grid(cfg);
  std::vector<Node> nodes;
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;
  std::unordered_map<CellKey, int, CellHash> best_g;
  std::unordered_set<CellKey, CellHash> closed;

  nodes.push_back({start, 0, -1});
  open.push({epsilon * heuristic(start, target, cfg, tol), 0, 0});
  best_g[grid.key(start)] = 0;

  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    const Node node = nodes[static_cast<std::size_t>(top.id)];
    const CellKey key = grid.key(node.step);
    if (!closed.insert(key).second) continue;
    if (is_terminal(node.step, target, tol)) {
      result.plan = trace_plan(nodes, top.id);
      return result;
    }
    if (result.expansions >= budget) {
      result.budget_exhausted = true;
      return result;
    }
    if (deadline && (result.expansions & 1023) == 0 && Clock::now() >= *deadline) {
      result.budget_exhausted = true;
      return result;
    }
    ++result.expansions;
    for (const Footstep& next : search_successors(node.step, target, obstacle, cfg, spec)) {
      const CellKey nk = grid.key(next);
      if (closed.count(nk) != 0) continue;
      const int g = node.g + 1;
      auto [it, inserted] = best_g.try_emplace(nk, g);
      if (!inserted) {
        if (it->second <= g) continue;
        it->second = g;
      }
      const int id = static_cast<int>(nodes.size());
      nodes.push_back({next, g, top.id});
      open.push({g + epsilon * heuristic(next, target, cfg, tol), g, id});
    }
  }
  return result;
}

}  // namespace

SearchResult astar_plan(const Footstep& start, const Footstep& target, const Obstacle& obstacle,
                        const SearchConfig& cfg, double epsilon, const ToleranceConfig& tol,
                        const RobotSpec& spec) {
  if (!(epsilon >= 1.0)) throw std::invalid_argument("astar_plan: epsilon must be >= 1");
  return weighted_astar(start, target, obstacle, cfg, epsilon, tol, spec, cfg.node_budget, std::nullopt);
}

AraResult ara_star(const Footstep& start, const Footstep& target, const Obstacle& obstacle,
                   const SearchConfig& cfg, const AraBudget& budget, const ToleranceConfig& tol,
                   const RobotSpec& spec) {
  AraResult out;
  out.level_lengths.assign(cfg.epsilon_schedule.size(), std::nullopt);
  std::optional<Clock::time_point> deadline;
  if (budget.wall.count() > 0.0) {
    deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(budget.wall);
  }
  for (std::size_t level = 0; level < cfg.epsilon_schedule.size(); ++level) {
    std::int64_t allowed = cfg.node_budget;
    if (budget.total_nodes > 0) allowed = std::min(allowed, budget.total_nodes - out.expansions);
    if (allowed <= 0) break;
    const double eps = cfg.epsilon_schedule[level];
    const SearchResult r = weighted_astar(start, target, obstacle, cfg, eps, tol, spec, allowed, deadline);
    out.expansions += r.expansions;
    if (r.budget_exhausted) break;
    if (!r.plan) continue;
    out.level_lengths[level] = r.plan->length;
    out.epsilon = eps;
    if (!out.plan || r.plan->length < out.plan->length) out.plan = r.plan;
  }
  return out;
}

std::optional<int> bfs_oracle(const Footstep& start, const Footstep& target, const Obstacle& obstacle,
                              const SearchConfig& cfg, const ToleranceConfig& tol, const RobotSpec& spec,
                              int depth_cap) {
  if (is_terminal(start, target, tol)) return 0;
  const Grid grid(cfg);
  std::unordered_set<CellKey, CellHash> visited{grid.key(start)};
  std::vector<Footstep> frontier{start};
  for (int depth = 1; depth <= depth_cap && !frontier.empty(); ++depth) {
    std::vector<Footstep> next_frontier;
    for (const Footstep& f : frontier) {
      for (const Footstep& next : search_successors(f, target, obstacle, cfg, spec)) {
        if (is_terminal(next, target, tol)) return depth;
        if (visited.insert(grid.key(next)).second) next_frontier.push_back(next);
      }
    }
    frontier = std::move(next_frontier);
  }
  return std::nullopt;
}

int step_lower_bound(const Footstep& start, const Footstep& target, const RobotSpec& spec,
                     const ToleranceConfig& tol) {
  const PoseError e = pose_error(start, target);
  const double dp = std::max(0.0, e.delta_p - tol.tol_p) / max_step_distance(spec);
  const double dt = std::max(0.0, e.delta_theta - tol.tol_theta) / spec.feasible.dtheta_max;
  int bound = static_cast<int>(std::ceil(std::max(dp, dt)));
  const int parity = start.foot == target.foot ? 0 : 1;
  if (bound % 2 != parity) ++bound;
  return bound;
}

}  // namespace footfall
