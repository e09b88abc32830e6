#include "footfall/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <thread>

#include "footfall/scenario_io.hpp"
#include "footfall/text_io.hpp"

namespace footfall {

std::uint64_t trial_seed(std::uint64_t seed, int trial) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(trial) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t scenario_stream_hash(const std::vector<Scenario>& scenarios) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Scenario& sc : scenarios) {
    for (const char c : format_scenario(sc)) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::vector<Scenario> benchmark_scenarios(Situation situation, double rho, int trials, std::uint64_t seed,
                                          const RobotSpec& spec, const ScenarioParams& params) {
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(std::max(trials, 0)));
  for (int i = 0; i < trials; ++i) out.push_back(sample_scenario(situation, rho, trial_seed(seed, i), spec, params));
  return out;
}

namespace {

void check_situation(Situation situation, double rho, int trials) {
  if (trials < 1) throw std::invalid_argument("benchmark needs at least one trial");
  if (situation == Situation::NO && rho != 0.0) {
    throw std::invalid_argument("situation NO has no obstacle; rho must be 0");
  }
  if (situation != Situation::NO && !(rho > 0.0)) {
    throw std::invalid_argument("situations AO and FO need rho > 0");
  }
}

template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
  const int workers = std::clamp(jobs, 1, std::max(n, 1));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        if (failed) return;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

using Clock = std::chrono::steady_clock;

}  // namespace

PlanStats run_planning_benchmark(const TrainedModel& model, const std::vector<SearchPlanner>& planners,
                                 const PlanningOptions& opt) {
  check_situation(opt.situation, opt.rho, opt.trials);
  for (const auto& p : planners) p.search.validate(model.robot);
  const std::vector<Scenario> scenarios =
      benchmark_scenarios(opt.situation, opt.rho, opt.trials, opt.seed, model.robot, opt.scenario);
  const std::size_t n_planners = planners.size() + 1;

  std::vector<std::vector<PlanRow>> per_trial(scenarios.size());
  std::vector<int> bound_violations(scenarios.size(), 0);
  std::vector<int> infeasible(scenarios.size(), 0);

  parallel_for(opt.trials, opt.jobs, [&](int i) {
    const Scenario& sc = scenarios[static_cast<std::size_t>(i)];
    const int bound = step_lower_bound(sc.start, sc.target, model.robot, model.tolerance);
    auto& rows = per_trial[static_cast<std::size_t>(i)];
    auto record = [&](const std::string& name, const std::optional<FootstepPlan>& plan, Clock::time_point t0) {
      PlanRow row;
      row.trial = i;
      row.situation = opt.situation;
      row.rho = opt.rho;
      row.planner = name;
      row.reached = plan && plan->reached;
      row.steps = row.reached ? plan->length : 0;
      if (opt.timing) row.wall_us = std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
      if (row.reached && row.steps < bound) ++bound_violations[static_cast<std::size_t>(i)];
      rows.push_back(row);
    };

    auto t0 = Clock::now();
    const FootstepPlan drl = rollout_to_target(model, env_reset(sc, model.robot), opt.rollout_cap);
    record(kDrlPlannerName, drl, t0);
    for (const SearchPlanner& p : planners) {
      t0 = Clock::now();
      const AraResult r = ara_star(sc.start, sc.target, sc.obstacle, p.search, p.budget, model.tolerance, model.robot);
      if (r.plan && !plan_is_feasible(*r.plan, model.robot)) ++infeasible[static_cast<std::size_t>(i)];
      record(p.name, r.plan, t0);
    }
  });

  PlanStats stats;
  stats.situation = opt.situation;
  stats.rho = opt.rho;
  stats.trials = opt.trials;
  stats.rows.reserve(scenarios.size() * n_planners);
  for (auto& rows : per_trial) {
    for (auto& r : rows) stats.rows.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    stats.lower_bound_violations += bound_violations[i];
    stats.infeasible_plans += infeasible[i];
  }
  std::vector<std::string> order{kDrlPlannerName};
  for (const auto& p : planners) order.push_back(p.name);
  stats.planners = summarize_planning(stats.rows, opt.trials, order);
  // Every planner consumed the same scenario vector.
  const std::uint64_t hash = scenario_stream_hash(scenarios);
  for (auto& s : stats.planners) s.scenario_hash = hash;
  return stats;
}

std::vector<PlannerSummary> summarize_planning(const std::vector<PlanRow>& rows, int trials,
                                               const std::vector<std::string>& planner_order) {
  std::map<std::string, std::vector<const PlanRow*>> by_planner;
  for (const auto& r : rows) {
    auto& v = by_planner[r.planner];
    if (v.empty()) v.assign(static_cast<std::size_t>(trials), nullptr);
    if (r.trial < 0 || r.trial >= trials) throw std::invalid_argument("plan row trial index out of range");
    v[static_cast<std::size_t>(r.trial)] = &r;
  }
  const auto drl_it = by_planner.find(kDrlPlannerName);

  std::vector<PlannerSummary> out;
  for (const std::string& name : planner_order) {
    PlannerSummary s;
    s.name = name;
    s.trials = trials;
    const auto it = by_planner.find(name);
    if (it == by_planner.end()) throw std::invalid_argument("no rows for planner '" + name + "'");
    std::vector<double> steps;
    int drl_ok = 0;
    double drl_sum = 0.0;
    double other_sum = 0.0;
    for (int t = 0; t < trials; ++t) {
      const PlanRow* r = it->second[static_cast<std::size_t>(t)];
      if (r == nullptr) throw std::invalid_argument("missing row for planner '" + name + "'");
      if (r->reached) steps.push_back(r->steps);
      if (drl_it == by_planner.end()) continue;
      const PlanRow* d = drl_it->second[static_cast<std::size_t>(t)];
      if (d == nullptr) throw std::invalid_argument("missing row for the DRL planner");
      if (d->reached && r->reached) {
        drl_ok += d->steps <= r->steps ? 1 : 0;
        ++s.both_reached;
        drl_sum += d->steps;
        other_sum += r->steps;
      } else if (d->reached || !r->reached) {
        ++drl_ok;
      }
    }
    s.reached = static_cast<int>(steps.size());
    s.mean_steps = mean_of(steps);
    s.sd_steps = sample_sd(steps);
    s.pct_reached = 100.0 * s.reached / trials;
    s.pct_drl_equal_or_better = 100.0 * drl_ok / trials;
    s.pct_step_reduction = other_sum > 0.0 ? 100.0 * (other_sum - drl_sum) / other_sum : 0.0;
    out.push_back(s);
  }
  return out;
}

std::string format_planning_csv(const std::vector<PlanRow>& rows) {
  std::string out = "trial,situation,rho,planner,reached,steps,wall_us\n";
  for (const auto& r : rows) {
    out += std::to_string(r.trial) + "," + to_string(r.situation) + "," + format_double(r.rho) + "," + r.planner +
           "," + (r.reached ? "1" : "0") + "," + (r.reached ? std::to_string(r.steps) : "") + "," +
           (r.wall_us ? format_double(std::round(*r.wall_us)) : "") + "\n";
  }
  return out;
}

namespace {

std::vector<std::vector<std::string>> csv_records(const std::string& csv, std::string_view header,
                                                  std::size_t columns) {
  std::vector<std::vector<std::string>> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < csv.size()) {
    const std::size_t eol = std::min(csv.find('\n', pos), csv.size());
    const std::string line = csv.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line_no == 1) {
      if (line != header) throw ParseError("<csv>", 1, "unexpected header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != columns) throw ParseError("<csv>", line_no, "wrong column count");
    out.push_back(std::move(fields));
  }
  return out;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

}  // namespace

std::vector<PlanRow> parse_planning_csv(const std::string& csv) {
  std::vector<PlanRow> rows;
  std::size_t line = 1;
  for (const auto& f : csv_records(csv, "trial,situation,rho,planner,reached,steps,wall_us", 7)) {
    ++line;
    PlanRow r;
    r.trial = static_cast<int>(parse_int(f[0], "<csv>", line));
    r.situation = parse_situation(f[1]);
    r.rho = parse_double(f[2], "<csv>", line);
    r.planner = f[3];
    r.reached = f[4] == "1";
    r.steps = r.reached ? static_cast<int>(parse_int(f[5], "<csv>", line)) : 0;
    if (!f[6].empty()) r.wall_us = parse_double(f[6], "<csv>", line);
    rows.push_back(r);
  }
  return rows;
}

std::optional<std::string> verify_planning_csv(const std::string& csv, const PlanStats& stats) {
  std::vector<std::string> order;
  for (const auto& p : stats.planners) order.push_back(p.name);
  const auto again = summarize_planning(parse_planning_csv(csv), stats.trials, order);
  for (std::size_t i = 0; i < again.size(); ++i) {
    const auto& a = again[i];
    const auto& b = stats.planners[i];
    if (a.reached != b.reached || a.both_reached != b.both_reached || !close(a.mean_steps, b.mean_steps) ||
        !close(a.sd_steps, b.sd_steps) || !close(a.pct_reached, b.pct_reached) ||
        !close(a.pct_drl_equal_or_better, b.pct_drl_equal_or_better) ||
        !close(a.pct_step_reduction, b.pct_step_reduction)) {
      return "aggregates for planner '" + b.name + "' do not match the CSV rows";
    }
  }
  return std::nullopt;
}

std::vector<Footstep> sample_candidates(const Footstep& anchor, const Obstacle& obstacle, double area_half,
                                        int n, double disc_radius, double heading_jitter, std::uint64_t seed,
                                        const RobotSpec& spec, int max_attempts) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> jitter(-heading_jitter, heading_jitter);
  std::vector<Footstep> out;
  for (int attempt = 0; static_cast<int>(out.size()) < n; ++attempt) {
    if (attempt >= max_attempts) throw std::runtime_error("could not place collision-free candidate targets");
    const double r = disc_radius * std::sqrt(unit(rng));
    const double phi = 2.0 * kPi * unit(rng);
    Footstep c = anchor;
    c.pose.x += r * std::cos(phi);
    c.pose.y += r * std::sin(phi);
    c.pose.theta = wrap_angle(anchor.pose.theta + jitter(rng));
    if (std::abs(c.pose.x) > area_half || std::abs(c.pose.y) > area_half) continue;
    if (footstep_collides(c, obstacle, spec)) continue;
    out.push_back(c);
  }
  return out;
}

ForecastStats run_forecast_benchmark(const TrainedModel& model, const ForecastBenchOptions& opt,
                                     const Forecaster& forecaster) {
  check_situation(opt.situation, opt.rho, opt.trials);
  if (opt.n_alt < 2) throw std::invalid_argument("forecast benchmark needs n_alt >= 2");
  const Forecaster forecast =
      forecaster ? forecaster : Forecaster([&](const WorldState& w) { return forecast_steps(model, w, opt.forecast); });
  const std::vector<Scenario> scenarios =
      benchmark_scenarios(opt.situation, opt.rho, opt.trials, opt.seed, model.robot, opt.scenario);

  std::vector<std::vector<ForecastRow>> per_trial(scenarios.size());
  parallel_for(opt.trials, opt.jobs, [&](int i) {
    const Scenario& sc = scenarios[static_cast<std::size_t>(i)];
    const auto candidates = sample_candidates(sc.target, sc.obstacle, sc.area_half, opt.n_alt, opt.disc_radius,
                                              opt.heading_jitter, trial_seed(opt.seed ^ 0xCA4D1DA7E5ULL, i),
                                              model.robot);
    auto& rows = per_trial[static_cast<std::size_t>(i)];
    for (int c = 0; c < opt.n_alt; ++c) {
      WorldState w;
      w.support = sc.start;
      w.scenario = sc;
      w.scenario.target = candidates[static_cast<std::size_t>(c)];
      ForecastRow row;
      row.trial = i;
      row.candidate = c;
      row.forecast = forecast(w);
      const FootstepPlan plan = rollout_to_target(model, w, opt.rollout_cap);
      row.rollout = plan.reached ? plan.length : -1;
      rows.push_back(row);
    }
    int chosen = -1;
    int best = -1;
    for (const auto& r : rows) {
      if (r.rollout < 0) continue;
      if (chosen < 0 || r.forecast < rows[static_cast<std::size_t>(chosen)].forecast) chosen = r.candidate;
      if (best < 0 || r.rollout < best) best = r.rollout;
    }
    for (auto& r : rows) {
      r.chosen = r.candidate == chosen;
      r.best = r.rollout >= 0 && r.rollout == best;
    }
  });

  std::vector<ForecastRow> rows;
  for (auto& t : per_trial) {
    for (auto& r : t) rows.push_back(r);
  }
  return summarize_forecast(rows, opt.trials);
}

ForecastStats summarize_forecast(const std::vector<ForecastRow>& rows, int trials) {
  ForecastStats s;
  s.trials = trials;
  s.rows = rows;
  std::map<int, std::vector<const ForecastRow*>> by_trial;
  for (const auto& r : rows) by_trial[r.trial].push_back(&r);

  std::vector<double> rel_errors;
  std::vector<double> bests;
  std::vector<double> worsts;
  std::vector<double> extras;
  std::vector<double> improvements;
  int erroneous = 0;
  for (const auto& [trial, trs] : by_trial) {
    std::vector<const ForecastRow*> usable;
    for (const ForecastRow* r : trs) {
      if (r->rollout < 0) {
        ++s.dropped_candidates;
        continue;
      }
      usable.push_back(r);
      rel_errors.push_back(std::abs(r->forecast - r->rollout) / std::max(r->rollout, 1));
    }
    if (usable.size() < 2) continue;
    ++s.scored_trials;
    const ForecastRow* chosen = usable.front();
    int best = usable.front()->rollout;
    int worst = best;
    for (const ForecastRow* r : usable) {
      if (r->forecast < chosen->forecast) chosen = r;
      best = std::min(best, r->rollout);
      worst = std::max(worst, r->rollout);
    }
    bests.push_back(best);
    worsts.push_back(worst);
    improvements.push_back(worst > 0 ? 100.0 * (worst - best) / worst : 0.0);
    if (chosen->rollout > best) {
      ++erroneous;
      extras.push_back(100.0 * (chosen->rollout - best) / std::max(best, 1));
    }
  }
  s.mean_rel_error_pct = 100.0 * mean_of(rel_errors);
  s.best_mean = mean_of(bests);
  s.best_sd = sample_sd(bests);
  s.worst_mean = mean_of(worsts);
  s.worst_sd = sample_sd(worsts);
  s.erroneous_pct = s.scored_trials > 0 ? 100.0 * erroneous / s.scored_trials : 0.0;
  s.extra_steps_pct = mean_of(extras);
  s.improvement_pct = mean_of(improvements);
  return s;
}

std::string format_forecast_csv(const std::vector<ForecastRow>& rows) {
  std::string out = "trial,candidate,forecast,rollout,chosen,best\n";
  for (const auto& r : rows) {
    out += std::to_string(r.trial) + "," + std::to_string(r.candidate) + "," + format_double(r.forecast) + "," +
           std::to_string(r.rollout) + "," + (r.chosen ? "1" : "0") + "," + (r.best ? "1" : "0") + "\n";
  }
  return out;
}

std::vector<ForecastRow> parse_forecast_csv(const std::string& csv) {
  std::vector<ForecastRow> rows;
  std::size_t line = 1;
  for (const auto& f : csv_records(csv, "trial,candidate,forecast,rollout,chosen,best", 6)) {
    ++line;
    ForecastRow r;
    r.trial = static_cast<int>(parse_int(f[0], "<csv>", line));
    r.candidate = static_cast<int>(parse_int(f[1], "<csv>", line));
    r.forecast = parse_double(f[2], "<csv>", line);
    r.rollout = static_cast<int>(parse_int(f[3], "<csv>", line));
    r.chosen = f[4] == "1";
    r.best = f[5] == "1";
    rows.push_back(r);
  }
  return rows;
}

std::optional<std::string> verify_forecast_csv(const std::string& csv, const ForecastStats& stats) {
  const ForecastStats a = summarize_forecast(parse_forecast_csv(csv), stats.trials);
  if (a.scored_trials != stats.scored_trials || a.dropped_candidates != stats.dropped_candidates ||
      !close(a.mean_rel_error_pct, stats.mean_rel_error_pct) || !close(a.best_mean, stats.best_mean) ||
      !close(a.best_sd, stats.best_sd) || !close(a.worst_mean, stats.worst_mean) ||
      !close(a.worst_sd, stats.worst_sd) || !close(a.erroneous_pct, stats.erroneous_pct) ||
      !close(a.extra_steps_pct, stats.extra_steps_pct) || !close(a.improvement_pct, stats.improvement_pct)) {
    return std::string("forecast aggregates do not match the CSV rows");
  }
  return std::nullopt;
}

}  // namespace footfall
