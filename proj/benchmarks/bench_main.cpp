#include <benchmark/benchmark.h>

#include <filesystem>
#include <string>

#include "pwtl/dataset.hpp"
#include "pwtl/optimizer.hpp"
#include "pwtl/solver.hpp"
#include "pwtl/surrogate.hpp"

using namespace pwtl;

namespace {

std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(PWTL_FIXTURE_DIR) / name; }

struct TwoIntersection {
    RoadNetwork net = load_network(fixture("two_intersection.json"));
    SimParams params;
    SimState initial = initialize(net, read_observed_speeds(fixture("two_intersection_speeds.csv")), params);
    SignalConfiguration lights = read_signal_config(fixture("two_intersection_lights.json"));
};

const TwoIntersection& scenario() {
    static const TwoIntersection s;
    return s;
}

void BM_BoundariesAndStep(benchmark::State& bs) {
    const auto& s = scenario();
    SimState cur = s.initial;
    SimState next = s.initial;
    const PhaseState phases = phases_at(s.net, s.lights, 0.0);
    for (auto _ : bs) {
        const VirtualBoundary vb = virtual_boundaries(s.net, cur, phases, s.params);
        step_into(s.net, cur, vb, phases, s.params, next);
        benchmark::DoNotOptimize(next.edges.data());
    }
}
BENCHMARK(BM_BoundariesAndStep);

void BM_FullRun(benchmark::State& bs) {
    const auto& s = scenario();
    for (auto _ : bs) {
        benchmark::DoNotOptimize(run(s.net, s.initial, s.lights, s.params).metrics.avg_speed);
    }
}
BENCHMARK(BM_FullRun)->Unit(benchmark::kMillisecond);

void BM_GenerateDataset(benchmark::State& bs) {
    const auto& s = scenario();
    GenerateOptions g;
    g.runs = 20;
    g.seed = 1;
    g.workers = static_cast<std::size_t>(bs.range(0));
    for (auto _ : bs) {
        benchmark::DoNotOptimize(generate(s.net, s.initial, s.params, g).rows.size());
    }
}
BENCHMARK(BM_GenerateDataset)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_FitMlp(benchmark::State& bs) {
    const auto& s = scenario();
    GenerateOptions g;
    g.runs = 100;
    g.seed = 2024;
    const TrainingData td = training_data(generate(s.net, s.initial, s.params, g), Target::Both);
    for (auto _ : bs) {
        benchmark::DoNotOptimize(fit_mlp(td.x, td.y, MlpHyper{}, 7).epochs_trained);
    }
}
BENCHMARK(BM_FitMlp)->Unit(benchmark::kMillisecond);

void BM_DeSphere(benchmark::State& bs) {
    const ObjectiveFn sphere = [](std::span<const double> x) {
        double v = 0;
        for (double c : x) v += (c - 0.3) * (c - 0.3);
        return v;
    };
    DeConfig c;
    c.seed = 1;
    for (auto _ : bs) {
        benchmark::DoNotOptimize(differential_evolution(sphere, static_cast<std::size_t>(bs.range(0)), c).best_value);
    }
}
BENCHMARK(BM_DeSphere)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
