#include "cfc/batch.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include <omp.h>

#include "cfc/rate_law.hpp"
#include "cfc/stimulus.hpp"

namespace cfc {

namespace {

LevelReading measure_one(const CfcConfig& config, double level, const LevelOptions& o)
{
    const double rate = ideal_rate(config, rectify(level, config.polarity));
    const double duration =
        rate > 0.0 ? std::clamp(o.target_events / rate, o.min_duration, o.max_duration)
                   : o.max_duration;
    const SimulationResult sim = simulate(config, constant(level, duration), duration, o.ack);
    ReconstructOptions ro;
    ro.compensation = o.compensation;
    const ReconstructedSignal rec = reconstruct(sim.events, config, ro);

    LevelReading r;
    r.programmed = level;
    r.events = sim.events.size();
    if (!rec.empty()) {
        double sum = 0.0;
        for (const auto& s : rec.samples) {
            sum += s.i_est;
        }
        r.decoded = sum / static_cast<double>(rec.samples.size());
        r.range = rec.samples.back().range;
        r.measured = true;
    }
    return r;
}

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn)
{
    std::vector<std::exception_ptr> errors(n);
    const int nt = threads > 0 ? threads : omp_get_max_threads();
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
    for (long long k = 0; k < count; ++k) {
        try {
            fn(static_cast<std::size_t>(k));
        } catch (...) {
            errors[static_cast<std::size_t>(k)] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace

std::vector<SimulationResult> simulate_batch(std::span<const BatchJob> jobs, int threads)
{
    std::vector<SimulationResult> out(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t k) {
        const BatchJob& j = jobs[k];
        out[k] = simulate(j.config, j.stimulus, j.duration, j.ack, j.options);
    });
    return out;
}

std::vector<SimulationResult> simulate_batch_serial(std::span<const BatchJob> jobs)
{
    std::vector<SimulationResult> out;
    out.reserve(jobs.size());
    for (const BatchJob& j : jobs) {
        out.push_back(simulate(j.config, j.stimulus, j.duration, j.ack, j.options));
    }
    return out;
}

std::vector<LevelReading> measure_levels(const CfcConfig& config, std::span<const double> levels,
                                         const LevelOptions& options, int threads)
{
    config.validate();
    std::vector<LevelReading> out(levels.size());
    parallel_for(levels.size(), threads,
                 [&](std::size_t k) { out[k] = measure_one(config, levels[k], options); });
    return out;
}

std::vector<LevelReading> measure_levels_serial(const CfcConfig& config,
                                                std::span<const double> levels,
                                                const LevelOptions& options)
{
    config.validate();
    std::vector<LevelReading> out;
    out.reserve(levels.size());
    for (double level : levels) {
        out.push_back(measure_one(config, level, options));
    }
    return out;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n)
{
    if (!(lo > 0.0) || !(hi >= lo)) {
        throw ConfigError("log_spaced needs 0 < lo <= hi");
    }
    std::vector<double> v;
    v.reserve(n);
    if (n == 1) {
        v.push_back(lo);
        return v;
    }
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t k = 0; k < n; ++k) {
        const double u = static_cast<double>(k) / static_cast<double>(n - 1);
        v.push_back(k == 0 ? lo : (k + 1 == n ? hi : std::pow(10.0, a + (b - a) * u)));
    }
    return v;
}

int max_threads() noexcept { return omp_get_max_threads(); }

}  // namespace cfc
