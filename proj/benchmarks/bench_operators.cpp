#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "trunckern/evolve.hpp"
#include "trunckern/metrics.hpp"
#include "trunckern/operators.hpp"

using namespace trunckern;

namespace {

GridSpec grid1d(int n, double L) {
    GridSpec g;
    g.d = 1;
    g.L = L;
    g.n = n;
    g.extension = Extension::constant(0.0);
    return g;
}

GridFunction noisy_field(const GridSpec& g) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    GridFunction u(g);
    for (double& v : u.values) v = unif(rng);
    return u;
}

void BM_ApplyLinear(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    GridSpec g = grid1d(n, 2.0);
    KernelParams p{1, 0.5, 1.0, 2.0, 0.0};
    OperatorConfig cfg;
    cfg.params = p;
    cfg.kind = OperatorKind::Linear;
    cfg.kernel = make_truncated_fractional_kernel(p, 1.0);
    NonlocalOperator op(g, cfg);
    GridFunction u = noisy_field(g);
    for (auto _ : state) {
        benchmark::DoNotOptimize(op.apply(u));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ApplyLinear)->Arg(256)->Arg(1024)->Arg(4096);

void BM_ApplyPucci(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    GridSpec g = grid1d(n, 2.0);
    KernelParams p{1, 0.5, 1.0, 2.0, 0.0};
    OperatorConfig cfg;
    cfg.params = p;
    cfg.kind = OperatorKind::PucciMinus;
    NonlocalOperator op(g, cfg);
    GridFunction u = noisy_field(g);
    for (auto _ : state) {
        benchmark::DoNotOptimize(op.apply(u));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ApplyPucci)->Arg(256)->Arg(1024)->Arg(4096);

void BM_ExplicitStep(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    EvolutionConfig cfg;
    cfg.grid = grid1d(n, 2.0);
    cfg.op.params = KernelParams{1, 0.25, 1.0, 2.0, 0.0625};
    cfg.op.kind = OperatorKind::Linear;
    cfg.op.kernel = make_truncated_fractional_kernel(cfg.op.params, 1.0);
    cfg.initial = noisy_field(cfg.grid);
    cfg.horizon = 1.0;
    NonlocalOperator op(cfg.grid, cfg.op);
    const double dt = 0.9 / op.node_mass();
    GridFunction u = cfg.initial;
    for (auto _ : state) {
        GridFunction fu = op.apply(u, GradientMode::Upwind);
        for (std::size_t i = 0; i < u.values.size(); ++i) u.values[i] += dt * fu.values[i];
        benchmark::DoNotOptimize(u.values.data());
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ExplicitStep)->Arg(1024)->Arg(4096);

void BM_HolderSeminorm(benchmark::State& state) {
    GridSpec g = grid1d(257, 1.0);
    SpaceTimeField field;
    field.grid = g;
    field.dt = 1.0 / 64.0;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int k = 0; k <= 64; ++k) {
        field.times.push_back(k == 64 ? 0.0 : -1.0 + k * field.dt);
        std::vector<double> snap(g.node_count());
        for (double& v : snap) v = unif(rng);
        field.snapshots.push_back(std::move(snap));
    }
    Cylinder Q{{0.0}, 0.0, 0.5, 0.5};
    for (auto _ : state) {
        benchmark::DoNotOptimize(partial_holder_seminorm(field, Q, 0.01, 0.5));
    }
}
BENCHMARK(BM_HolderSeminorm);

}  // namespace

BENCHMARK_MAIN();
