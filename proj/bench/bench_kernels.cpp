#include <memory>

#include <benchmark/benchmark.h>

#include "lpk/reference.hpp"

using namespace lpk;

namespace {

std::shared_ptr<const QuadratureGrid> bench_grid()
{
    static const auto g = std::make_shared<QuadratureGrid>(make_ball_grid(GridSpec{}));
    return g;
}

const SeriesContext& bench_context()
{
    static const SeriesContext ctx(PotentialModel::yukawa(0.5, 1.0), make_bump(), SeriesConfig{});
    return ctx;
}

RadialDiscretization bench_disc()
{
    RadialDiscretization d;
    d.R_max = 24.0;
    d.h = 0.02;
    d.l_max = 16;
    return d;
}

const SpectralData& bench_spectrum()
{
    static const SpectralData s = solve_spectrum(PotentialModel::yukawa(0.5, 1.0), bench_disc(), 16.0);
    return s;
}

const Vec3 bx(0.3, 0.1, 0.2), by(-0.2, 0.4, 0.1);

void BM_assemble_VR0_parallel(benchmark::State& st)
{
    const auto V = PotentialModel::yukawa(0.5, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(assemble_VR0(V, 1.0, bench_grid()));
}

void BM_assemble_VR0_serial(benchmark::State& st)
{
    const auto V = PotentialModel::yukawa(0.5, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(reference::assemble_VR0(V, 1.0, *bench_grid()));
}

void BM_born_mc_parallel(benchmark::State& st)
{
    bench_context();
    for (auto _ : st) benchmark::DoNotOptimize(born_term_mc(3, 1.0, bx, by, bench_context(), 1 << 15));
}

void BM_born_mc_serial(benchmark::State& st)
{
    for (auto _ : st) benchmark::DoNotOptimize(reference::born_term_mc(3, 1.0, bx, by, bench_context(), 1 << 15));
}

void BM_spectrum_tridiagonal(benchmark::State& st)
{
    const auto V = PotentialModel::yukawa(0.5, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(solve_spectrum(V, bench_disc(), 16.0));
}

void BM_spectrum_dense_l0(benchmark::State& st)
{
    const auto V = PotentialModel::yukawa(0.5, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(reference::solve_wave_dense(0, bench_disc(), V));
}

void BM_multiplier_kernel(benchmark::State& st)
{
    bench_spectrum();
    const auto m = projection_multiplier(make_bump(), 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(multiplier_kernel(m, bx, by, bench_spectrum(), 1.0));
}

void BM_multiplier_kernel_reference(benchmark::State& st)
{
    const auto m = projection_multiplier(make_bump(), 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(reference::multiplier_kernel(m, bx, by, bench_spectrum()));
}

} // namespace

BENCHMARK(BM_assemble_VR0_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_assemble_VR0_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_born_mc_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_born_mc_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_spectrum_tridiagonal)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_spectrum_dense_l0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_multiplier_kernel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_multiplier_kernel_reference)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
