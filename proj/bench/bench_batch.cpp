// Parallel vs serial batch kernels.

#include <benchmark/benchmark.h>

#include "cfc/batch.hpp"
#include "cfc/stimulus.hpp"

namespace {

std::vector<cfc::BatchJob> staircase_jobs()
{
    std::vector<cfc::BatchJob> jobs;
    const cfc::CfcConfig cfg;
    for (int rep = 0; rep < 4; ++rep) {
        for (const auto& r : cfc::kSweepRanges) {
            const auto st = cfc::staircase_sweep(r.start, r.stop, 41, 0.01);
            jobs.push_back({cfg, st.signal, st.signal.end(), cfc::AckModel{}, {}});
        }
    }
    return jobs;
}

void BM_SimulateBatchSerial(benchmark::State& state)
{
    const auto jobs = staircase_jobs();
    for (auto _ : state) {
        benchmark::DoNotOptimize(cfc::simulate_batch_serial(jobs));
    }
}

void BM_SimulateBatchParallel(benchmark::State& state)
{
    const auto jobs = staircase_jobs();
    const int threads = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(cfc::simulate_batch(jobs, threads));
    }
}

void BM_MeasureLevelsSerial(benchmark::State& state)
{
    const auto levels = cfc::log_spaced(10e-12, 1e-6, 61);
    const cfc::CfcConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cfc::measure_levels_serial(cfg, levels, {}));
    }
}

void BM_MeasureLevelsParallel(benchmark::State& state)
{
    const auto levels = cfc::log_spaced(10e-12, 1e-6, 61);
    const cfc::CfcConfig cfg;
    const int threads = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(cfc::measure_levels(cfg, levels, {}, threads));
    }
}

}  // namespace

BENCHMARK(BM_SimulateBatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateBatchParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MeasureLevelsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MeasureLevelsParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
