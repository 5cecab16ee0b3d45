#pragma once

#include <span>
#include <vector>

#include "cfc/config.hpp"
#include "cfc/decoder.hpp"
#include "cfc/simulator.hpp"

// Batch kernels over independent channels / sweep levels. Each has an
// OpenMP version and a serial reference; both return identical results for
// any thread count because jobs share no mutable state.

namespace cfc {

struct BatchJob {
    CfcConfig config;
    CurrentSignal stimulus;
    double duration = 0.0;
    AckModel ack;
    SimulationOptions options;
};

/// `threads` <= 0 uses the OpenMP default. The first failing job's exception
/// is rethrown after the parallel region.
std::vector<SimulationResult> simulate_batch(std::span<const BatchJob> jobs, int threads = 0);
std::vector<SimulationResult> simulate_batch_serial(std::span<const BatchJob> jobs);

struct LevelOptions {
    /// Simulated time per level is target_events / ideal_rate, clamped.
    double target_events = 50.0;
    double min_duration = 1e-3;
    double max_duration = 10.0;
    AckModel ack;
    double compensation = 0.0;
};

struct LevelReading {
    double programmed = 0.0;
    double decoded = 0.0;  // mean reconstructed current, 0 if unmeasured
    std::size_t events = 0;
    RangeSelect range = RangeSelect::Low;
    bool measured = false;  // at least one interval

    [[nodiscard]] double relative_error() const noexcept
    {
        return measured ? (decoded - programmed) / programmed : -1.0;
    }
};

/// Constant-current encode/decode round trip for every level.
std::vector<LevelReading> measure_levels(const CfcConfig& config, std::span<const double> levels,
                                         const LevelOptions& options = {}, int threads = 0);
std::vector<LevelReading> measure_levels_serial(const CfcConfig& config,
                                                std::span<const double> levels,
                                                const LevelOptions& options = {});

/// n logarithmically spaced values from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, std::size_t n);

/// Number of threads OpenMP would use by default.
int max_threads() noexcept;

}  // namespace cfc
