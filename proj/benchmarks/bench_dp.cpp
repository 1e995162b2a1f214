#include <benchmark/benchmark.h>

#include "mirplan/dp_oracle.hpp"
#include "mirplan/instance.hpp"

using namespace mirplan;

namespace {

void BM_SubsetDp(benchmark::State& state) {
    Rng rng(5);
    Instance instance = generate_instance(static_cast<int>(state.range(0)), TwoPointTemplate{}, rng);
    for (auto _ : state) {
        const DpSolution sol = DpOracle::solve(instance);
        benchmark::DoNotOptimize(sol.w_star_full());
    }
    state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(BM_SubsetDp)->DenseRange(8, 16, 2)->Complexity();

BENCHMARK_MAIN();
