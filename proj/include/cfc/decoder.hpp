#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfc/config.hpp"
#include "cfc/simulator.hpp"

namespace cfc {

enum class Placement { AtSecond, Midpoint };
enum class ResampleMode { Hold, Linear };

struct ReconstructedSample {
    double t = 0.0;
    double i_est = 0.0;
    RangeSelect range = RangeSelect::Low;
};

/// Current estimates derived from consecutive event pairs.
struct ReconstructedSignal {
    std::vector<ReconstructedSample> samples;
    CfcConfig config;
    double compensation = 0.0;
    Placement placement = Placement::Midpoint;

    [[nodiscard]] bool empty() const noexcept { return samples.empty(); }
};

struct ReconstructOptions {
    double compensation = 0.0;
    Placement placement = Placement::Midpoint;
    /// Ignore the per-event SF flag and infer the range of each interval from
    /// continuity with the previous estimate. For streams recorded without SF.
    bool infer_range = false;
};

/// One sample per consecutive event pair. Fewer than two events give an
/// empty signal. Throws DecodeError on mixed channels, unsorted events or
/// intervals shorter than the compensation.
ReconstructedSignal reconstruct(std::span<const AerEvent> events, const CfcConfig& config,
                                const ReconstructOptions& options = {});

struct UniformSeries {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> values;

    [[nodiscard]] double time(std::size_t k) const noexcept
    {
        return t0 + static_cast<double>(k) * dt;
    }
};

/// Uniform grid over [first, last] sample time.
UniformSeries resample(const ReconstructedSignal& signal, double dt,
                       ResampleMode mode = ResampleMode::Linear);

struct ExponentialFit {
    double amplitude = 0.0;  // A
    double tau = 0.0;        // s
    double baseline = 0.0;   // A
    double residual_norm = 0.0;
    std::size_t samples = 0;

    /// Flat `key=value` lines.
    [[nodiscard]] std::string to_record() const;
};

/// Least-squares fit of baseline + amplitude * exp(-(t - t0) / tau) to the
/// samples inside [t0, t1]. Throws DecodeError with fewer than 5 samples,
/// non-positive samples, or data without an exponential trend.
ExponentialFit fit_exponential(const ReconstructedSignal& signal, double t0, double t1);

/// Same fit on raw (t, value) arrays.
ExponentialFit fit_exponential(std::span<const double> t, std::span<const double> y, double t0);

struct SweepStep {
    double t_start = 0.0;
    double dwell = 0.0;
    double level = 0.0;  // programmed current (A, signed)
};

/// Staircase schedule: contiguous steps in time order.
struct SweepSchedule {
    std::vector<SweepStep> steps;

    [[nodiscard]] double end() const noexcept
    {
        return steps.empty() ? 0.0 : steps.back().t_start + steps.back().dwell;
    }
};

struct SweepPoint {
    double programmed = 0.0;
    std::optional<double> decoded;  // nullopt = no measurement
    std::optional<RangeSelect> range;
    std::size_t intervals = 0;
};

/// Per-step average of decoded intervals after discarding the first
/// `settle_fraction` of each dwell. Events outside the schedule throw.
std::vector<SweepPoint> sweep_analysis(std::span<const AerEvent> events,
                                       const SweepSchedule& schedule, const CfcConfig& config,
                                       double settle_fraction = 0.2, double compensation = 0.0);

}  // namespace cfc
