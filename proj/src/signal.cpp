#include "cfc/signal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cfc/config.hpp"

namespace cfc {

CurrentSignal::CurrentSignal(std::vector<Segment> segments, double end)
    : segments_(std::move(segments)), end_(end)
{
    if (segments_.empty()) {
        throw ConfigError("current signal needs at least one segment");
    }
    for (std::size_t k = 0; k < segments_.size(); ++k) {
        const Segment& s = segments_[k];
        if (!std::isfinite(s.t0) || !std::isfinite(s.i0) || !std::isfinite(s.i1)) {
            throw ConfigError("current signal contains a non-finite value");
        }
        if (k > 0 && !(s.t0 > segments_[k - 1].t0)) {
            std::ostringstream os;
            os << "current signal breakpoints must be strictly increasing (segment " << k
               << " starts at " << s.t0 << " s)";
            throw ConfigError(os.str());
        }
        if (s.kind == SegmentKind::Step) {
            segments_[k].i1 = s.i0;
        }
    }
    if (!std::isfinite(end_) || !(end_ > segments_.back().t0)) {
        throw ConfigError("current signal domain end must follow the last breakpoint");
    }
}

CurrentSignal CurrentSignal::from_points(std::span<const double> t, std::span<const double> i,
                                         double end)
{
    if (t.size() != i.size() || t.empty()) {
        throw ConfigError("from_points needs equally sized, non-empty time and current arrays");
    }
    PwlBuilder b;
    for (std::size_t k = 0; k < t.size(); ++k) {
        b.add_point(t[k], i[k]);
    }
    return std::move(b).finish(end);
}

double CurrentSignal::start() const noexcept
{
    return segments_.empty() ? 0.0 : segments_.front().t0;
}

double CurrentSignal::end_time(std::size_t k) const noexcept
{
    return k + 1 < segments_.size() ? segments_[k + 1].t0 : end_;
}

double CurrentSignal::end_value(std::size_t k) const noexcept
{
    return segments_[k].i1;
}

double CurrentSignal::at(double t) const noexcept
{
    if (segments_.empty()) {
        return 0.0;
    }
    if (t <= segments_.front().t0) {
        return segments_.front().i0;
    }
    // Last segment whose start is <= t.
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double x, const Segment& s) { return x < s.t0; });
    const std::size_t k = static_cast<std::size_t>(std::distance(segments_.begin(), it)) - 1;
    const Segment& s = segments_[k];
    if (s.kind == SegmentKind::Step) {
        return s.i0;
    }
    const double t1 = end_time(k);
    if (t >= t1) {
        return s.i1;
    }
    const double u = (t - s.t0) / (t1 - s.t0);
    return s.i0 + (s.i1 - s.i0) * u;
}

void PwlBuilder::add_point(double t, double i)
{
    if (!std::isfinite(t) || !std::isfinite(i)) {
        throw ConfigError("piecewise-linear point is not finite");
    }
    if (has_pending_) {
        if (t < pending_t_) {
            std::ostringstream os;
            os << "piecewise-linear points go backwards in time (" << t << " s after "
               << pending_t_ << " s)";
            throw ConfigError(os.str());
        }
        if (t == pending_t_) {
            pending_i_ = i;
            return;
        }
        segments_.push_back({pending_t_, pending_i_, i, SegmentKind::Linear});
    }
    pending_t_ = t;
    pending_i_ = i;
    has_pending_ = true;
}

CurrentSignal PwlBuilder::finish(double end) &&
{
    if (!has_pending_) {
        throw ConfigError("piecewise-linear signal has no points");
    }
    if (end > pending_t_) {
        segments_.push_back({pending_t_, pending_i_, pending_i_, SegmentKind::Step});
    } else if (segments_.empty() || end < pending_t_) {
        throw ConfigError("piecewise-linear signal needs a positive time span ending at or after "
                          "its last point");
    } else {
        // A trailing jump at the very end carries no duration.
        end = pending_t_;
    }
    return CurrentSignal(std::move(segments_), end);
}

void SpikeTrain::validate() const
{
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!std::isfinite(times[k]) || (k > 0 && !(times[k] > times[k - 1]))) {
            throw ConfigError("spike times must be finite and strictly increasing");
        }
    }
}

}  // namespace cfc
