#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cfc {

enum class SegmentKind : std::uint8_t { Step, Linear };

/// One piece of a current schedule. It starts at `t0` and ends where the
/// next segment starts (or at the signal's domain end). A Step segment holds
/// `i0`; a Linear segment runs from `i0` to `i1` over its span.
struct Segment {
    double t0 = 0.0;
    double i0 = 0.0;
    double i1 = 0.0;
    SegmentKind kind = SegmentKind::Step;
};

/// Ground-truth stimulus: a signed, piecewise-linear current versus time.
/// Adjacent segments need not join, which is how jumps are represented.
class CurrentSignal {
public:
    CurrentSignal() = default;

    /// Throws ConfigError unless segment starts are strictly increasing,
    /// values are finite and end > last start.
    CurrentSignal(std::vector<Segment> segments, double end);

    /// Builder for continuous piecewise-linear curves through (t, i) points;
    /// the curve holds its last value until `end`.
    static CurrentSignal from_points(std::span<const double> t, std::span<const double> i,
                                     double end);

    [[nodiscard]] std::span<const Segment> segments() const noexcept { return segments_; }
    [[nodiscard]] double start() const noexcept;
    [[nodiscard]] double end() const noexcept { return end_; }
    [[nodiscard]] bool empty() const noexcept { return segments_.empty(); }

    /// Segment k spans [start_time(k), end_time(k)).
    [[nodiscard]] double end_time(std::size_t k) const noexcept;

    /// Value at t (right-continuous at jumps). Outside the domain the first
    /// or last value is held.
    [[nodiscard]] double at(double t) const noexcept;

    /// Value reached at the end of segment k (left limit at its end).
    [[nodiscard]] double end_value(std::size_t k) const noexcept;

private:
    std::vector<Segment> segments_;
    double end_ = 0.0;
};

/// Incremental builder for piecewise-linear signals. Consecutive points are
/// joined linearly; a point at the same time as the previous one is a jump.
class PwlBuilder {
public:
    /// Throws ConfigError if t goes backwards.
    void add_point(double t, double i);

    [[nodiscard]] bool empty() const noexcept { return !has_pending_; }
    [[nodiscard]] double last_time() const noexcept { return pending_t_; }
    [[nodiscard]] double last_value() const noexcept { return pending_i_; }

    /// Holds the last value until `end` (if end is later) and returns the signal.
    CurrentSignal finish(double end) &&;

private:
    std::vector<Segment> segments_;
    double pending_t_ = 0.0;
    double pending_i_ = 0.0;
    bool has_pending_ = false;
};

/// Strictly increasing spike times in seconds.
struct SpikeTrain {
    std::vector<double> times;
    double rate = 0.0;          // generating rate, 0 if hand-built
    std::uint64_t seed = 0;     // generating seed for Poisson trains

    void validate() const;
};

}  // namespace cfc
