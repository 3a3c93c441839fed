#include <benchmark/benchmark.h>

#include <vector>

#include "uavshare/association.hpp"
#include "uavshare/experiment.hpp"
#include "uavshare/rng.hpp"
#include "uavshare/woa.hpp"

using namespace uavshare;

namespace {

struct PopulationFixture {
  Scenario scenario;
  Network net;
  AssociationMatrix a;
  SlotLayout layout;
  std::vector<double> profile;
  FitnessKernel kernel;
  std::vector<WhaleAgent> pop;
  std::vector<double> out;

  static Scenario make_scenario(int channels) {
    ScenarioTemplate t;
    t.num_subchannels = channels;
    return generate_scenario(t, 11);
  }

  PopulationFixture(int channels, int population)
      : scenario(make_scenario(channels)),
        net(scenario),
        a(matching_to_association(deferred_acceptance(build_preferences(net), uav_capacities(scenario)).matching,
                                  scenario)),
        layout(scenario, a),
        profile(channel_power_profile(PowerMatrix(scenario), scenario)),
        kernel(net, a, layout, profile, 1e3) {
    Rng rng(5);
    for (int i = 0; i < population; ++i) pop.push_back(random_agent(layout, rng));
    out.resize(pop.size());
  }
};

void BM_PopulationSerial(benchmark::State& state) {
  PopulationFixture f(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    evaluate_population_serial(f.kernel, f.pop, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_PopulationOpenMP(benchmark::State& state) {
  PopulationFixture f(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    evaluate_population(f.kernel, f.pop, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_Experiment(benchmark::State& state) {
  ExperimentConfig cfg;
  ScenarioTemplate t;
  t.users_per_sp = {8, 6};
  t.num_subchannels = 10;
  cfg.tmpl = t;
  cfg.solver.woa.population = 20;
  cfg.solver.woa.max_iterations = 30;
  cfg.solver.max_outer = 5;
  cfg.seeds = {1, 2, 3, 4};
  const int jobs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg, jobs));
}

}  // namespace

BENCHMARK(BM_PopulationSerial)->Args({20, 100})->Args({40, 400});
BENCHMARK(BM_PopulationOpenMP)->Args({20, 100})->Args({40, 400});
BENCHMARK(BM_Experiment)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
