// Microbenchmarks for the hot paths: network passes, environment steps,
// single-footstep planning, forecasting and lattice search.

#include <benchmark/benchmark.h>

#include "footfall/bench.hpp"

using namespace footfall;

namespace {

const TrainedModel& model() {
  static const TrainedModel m = TrainedModel::initialized(1);
  return m;
}

WorldState world(Situation s) {
  const RobotSpec spec;
  return env_reset(sample_scenario(s, s == Situation::NO ? 0.0 : 0.15, 11, spec), spec);
}

void BM_ActorForward(benchmark::State& state) {
  const Mlp::Matrix x = Mlp::Matrix::Constant(kObservationSize, state.range(0), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(mlp_predict(model().actor, x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ActorForward)->Arg(1)->Arg(256);

void BM_CriticForwardBackward(benchmark::State& state) {
  const Mlp::Matrix x = Mlp::Matrix::Constant(kCriticInputSize, state.range(0), 0.1);
  const Mlp::Matrix g = Mlp::Matrix::Ones(1, state.range(0));
  for (auto _ : state) {
    const MlpCache<double> c = mlp_forward(model().critic1, x);
    benchmark::DoNotOptimize(mlp_backward(model().critic1, c, g));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CriticForwardBackward)->Arg(256);

void BM_EnvStep(benchmark::State& state) {
  const WorldState w = world(Situation::AO);
  const RewardConfig reward;
  const ToleranceConfig tol;
  const RobotSpec spec;
  for (auto _ : state) benchmark::DoNotOptimize(env_step(w, {0.05, 0.01, 0.1}, reward, tol, spec));
}
BENCHMARK(BM_EnvStep);

void BM_PlanOneFootstep(benchmark::State& state) {
  const WorldState w = world(Situation::NO);
  for (auto _ : state) benchmark::DoNotOptimize(rollout(model(), w, 1));
}
BENCHMARK(BM_PlanOneFootstep);

void BM_Forecast(benchmark::State& state) {
  const WorldState w = world(Situation::FO);
  const ForecastOptions opt{state.range(0) == 0 ? ForecastCritic::Min : ForecastCritic::Critic1, false};
  for (auto _ : state) benchmark::DoNotOptimize(forecast_steps(model(), w, opt));
}
BENCHMARK(BM_Forecast)->Arg(0)->Arg(1);

void BM_AStar(benchmark::State& state) {
  const RobotSpec spec;
  const SearchConfig cfg = SearchConfig::for_robot(spec);
  const Footstep start{Foot::Left, {-0.3, 0.075, 0.0}};
  const Footstep target{Foot::Right, {0.3, -0.2, 0.5}};
  const Obstacle obstacle{0.0, 0.0, 0.1};
  const double epsilon = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(astar_plan(start, target, obstacle, cfg, epsilon, ToleranceConfig{}, spec));
  }
}
BENCHMARK(BM_AStar)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
