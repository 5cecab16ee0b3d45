#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cfc/config.hpp"
#include "cfc/signal.hpp"

namespace cfc {

enum class Phase : std::uint8_t { Integrating, RequestPending, ResetPulse };

std::string_view to_string(Phase p) noexcept;

/// Live state of one channel. Voltages stay within [v_ref_l, v_ref_h].
struct ChannelState {
    double v_low = 0.0;    // V on C1
    double v_high = 0.0;   // V on C2
    RangeSelect selected = RangeSelect::Low;
    Phase phase = Phase::Integrating;
    double t_phase_start = 0.0;
};

/// One address-event: time the request was raised, channel address and
/// range flag at emission.
struct AerEvent {
    double t_req = 0.0;
    std::uint32_t channel = 0;
    RangeSelect sf = RangeSelect::Low;

    friend bool operator==(const AerEvent&, const AerEvent&) = default;
};

/// Acknowledge latency of the off-chip receiver: fixed when
/// latency_min == latency_max, otherwise uniform in [min, max] from a
/// seeded generator.
struct AckModel {
    double latency_min = 0.0;
    double latency_max = 0.0;
    std::uint64_t seed = 0;

    static AckModel fixed(double latency) { return {latency, latency, 0}; }
    static AckModel uniform(double lo, double hi, std::uint64_t seed) { return {lo, hi, seed}; }

    [[nodiscard]] bool is_fixed() const noexcept { return latency_min == latency_max; }
    [[nodiscard]] double mean() const noexcept { return 0.5 * (latency_min + latency_max); }
    void validate() const;
};

struct TraceSample {
    double t = 0.0;
    ChannelState state;
};

struct SimulationOptions {
    bool trace = false;
    /// When > 0, the trace has at most this spacing between samples.
    double trace_max_gap = 0.0;
    std::uint64_t event_cap = 100'000'000;
};

struct SimulationResult {
    std::vector<AerEvent> events;
    std::vector<TraceSample> trace;
    /// Set when the event cap was reached; `events` holds the prefix.
    bool truncated = false;
};

/// Leakage floor: 0 at or below config.i_leak_floor, identity above.
double nonideal(const CfcConfig& config, double i_rect) noexcept;

/// Event-driven simulation of one channel over [0, duration]. Crossing
/// times are solved in closed form on each linear stimulus piece. Throws
/// ConfigError on invalid inputs before any work is done.
SimulationResult simulate(const CfcConfig& config, const CurrentSignal& stimulus,
                          double duration, const AckModel& ack = {},
                          const SimulationOptions& options = {});

/// Average power of a run: static + energy_per_event * count / duration.
/// Defaults give 36 nW at a sustained 100 kHz.
double power_estimate(std::span<const AerEvent> events, double duration,
                      double energy_per_event = 0.36e-12, double static_power = 0.0);

/// Merges per-channel streams into one stream ordered by (t_req, channel).
std::vector<AerEvent> merge_events(std::span<const std::vector<AerEvent>> streams);

}  // namespace cfc
