#include <benchmark/benchmark.h>

#include "clocktree/coarse_bound.hpp"
#include "clocktree/tree_sim.hpp"

namespace {

using namespace clocktree;

ChainSpec make_spec(int q, double beta) {
    const std::vector<double> ubar = q == 3 ? std::vector<double>{0.0, 1.0}
                                            : std::vector<double>{0.0, 1.0, 1.2};
    return solve_chain(build_model(q, 2, beta, ubar), {0, 1});
}

void BM_solve_boundary_law(benchmark::State& state) {
    const int q = static_cast<int>(state.range(0));
    const std::vector<double> ubar = q == 3 ? std::vector<double>{0.0, 1.0}
                                            : std::vector<double>{0.0, 1.0, 1.2};
    const ClockModel m = build_model(q, 2, 6.0, ubar);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_boundary_law(m, {0, 1}));
    }
}
BENCHMARK(BM_solve_boundary_law)->Arg(3)->Arg(5);

void BM_exact_moment(benchmark::State& state) {
    const ChainSpec spec = make_spec(3, 6.0);
    Rng rng(1);
    const SubTree g = grow_random_subtree(2, static_cast<int>(state.range(0)), rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(exact_moment_log(spec, g, 1.0));
    }
}
BENCHMARK(BM_exact_moment)->Arg(4)->Arg(16)->Arg(64);

void BM_coarse_moment(benchmark::State& state) {
    const ChainSpec spec = make_spec(3, 6.0);
    Rng rng(1);
    const SubTree g = grow_random_subtree(2, static_cast<int>(state.range(0)), rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(coarse_moment_log(spec, g, 1.0));
    }
}
BENCHMARK(BM_coarse_moment)->Arg(16)->Arg(64);

void BM_root_posterior(benchmark::State& state) {
    const ClockModel m = build_model(3, 2, 2.0, {0.0, 1.0});
    const ChainSpec spec = make_spec(3, 2.0);
    const int depth = static_cast<int>(state.range(0));
    const TruncatedTree tree(2, depth);
    const auto cfg = sample_broadcast(spec, tree, 99);
    const std::vector<uint8_t> boundary(cfg.spins.begin() + tree.level_begin(depth),
                                        cfg.spins.begin() + tree.level_end(depth));
    for (auto _ : state) {
        benchmark::DoNotOptimize(root_posterior(m, boundary, depth));
    }
}
BENCHMARK(BM_root_posterior)->Arg(4)->Arg(8);

void BM_broadcast(benchmark::State& state) {
    const ChainSpec spec = make_spec(3, 2.0);
    const TruncatedTree tree(2, static_cast<int>(state.range(0)));
    uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_broadcast(spec, tree, ++seed));
    }
}
BENCHMARK(BM_broadcast)->Arg(8)->Arg(12);

}  // namespace

BENCHMARK_MAIN();
