#include <benchmark/benchmark.h>

#include <vector>

#include "mirplan/policies.hpp"
#include "mirplan/rng.hpp"
#include "mirplan/simulator.hpp"

using namespace mirplan;

namespace {

std::vector<double> random_offsets(int k, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> offsets;
    offsets.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        double m = 2.0 * rng.uniform01() - 1.0;
        if (m > -1e-4 && m < 1e-4) m = 0.25;
        offsets.push_back(m);
    }
    return offsets;
}

void BM_PlayoutEngine(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    const auto offsets = random_offsets(k, 7);
    Rng rng(11);
    for (auto _ : state) {
        OgpPlayoutEngine engine(offsets);
        while (!engine.terminal()) {
            const PolicyAction a = engine.current_action();
            double wi, wj;
            engine.current_weights(&wi, &wj);
            engine.mark_explored(rng.uniform01() < wi ? a.i : a.j);
        }
        benchmark::DoNotOptimize(engine.stats().queries);
    }
    state.SetComplexityN(k);
}

void BM_IregbRun(benchmark::State& state) {
    Rng gen(3);
    Instance instance = generate_instance(static_cast<int>(state.range(0)), TwoPointTemplate{}, gen);
    std::uint64_t rep = 0;
    for (auto _ : state) {
        Rng rng = Rng::derive(17, rep++);
        benchmark::DoNotOptimize(run_welfare(instance, Mechanism::Iregb, 100000, rng));
    }
}

}  // namespace

BENCHMARK(BM_PlayoutEngine)->RangeMultiplier(2)->Range(1 << 12, 1 << 18)->Complexity();
BENCHMARK(BM_IregbRun)->Arg(4)->Arg(16);
