#include "cfc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cfc/rate_law.hpp"

namespace cfc {

std::string_view to_string(Phase p) noexcept
{
    switch (p) {
    case Phase::Integrating:
        return "Integrating";
    case Phase::RequestPending:
        return "RequestPending";
    case Phase::ResetPulse:
        return "ResetPulse";
    }
    return "?";
}

void AckModel::validate() const
{
    if (!std::isfinite(latency_min) || !std::isfinite(latency_max) || latency_min < 0.0 ||
        latency_max < latency_min) {
        throw ConfigError("ack latency bounds must satisfy 0 <= min <= max");
    }
}

double nonideal(const CfcConfig& config, double i_rect) noexcept
{
    return i_rect <= config.i_leak_floor ? 0.0 : i_rect;
}

namespace {

class LatencySource {
public:
    explicit LatencySource(const AckModel& model) : model_(model), rng_(model.seed) {}

    double next()
    {
        if (model_.is_fixed()) {
            return model_.latency_min;
        }
        // 53-bit mantissa draw; avoids implementation-defined distributions.
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        return model_.latency_min + (model_.latency_max - model_.latency_min) * u;
    }

private:
    AckModel model_;
    std::mt19937_64 rng_;
};

/// Stretch of time on which the effective current is linear (or zero) and
/// the detector output is constant.
struct Piece {
    double ta;
    double tb;
    double ra;  // effective current at ta
    double rb;  // effective current at tb
    RangeSelect range;
    bool active;
};

constexpr double kCrossingSlack = 1e-12;

double charge(double a, double slope, double span)
{
    return a * span + 0.5 * slope * span * span;
}

/// Smallest tau in [0, span] with charge(a, slope, tau) == q, for a current
/// that stays non-negative on the span.
double crossing_time(double a, double slope, double q, double span)
{
    double tau;
    if (slope == 0.0) {
        tau = q / a;
    } else {
        const double disc = std::max(0.0, a * a + 2.0 * slope * q);
        tau = 2.0 * q / (a + std::sqrt(disc));
    }
    return std::clamp(tau, 0.0, span);
}

class Channel {
public:
    Channel(const CfcConfig& config, const AckModel& ack, const SimulationOptions& options,
            SimulationResult& out)
        : cfg_(config), opts_(options), latency_(ack), out_(out)
    {
        state_.v_low = cfg_.v_ref_h;
        state_.v_high = cfg_.v_ref_h;
    }

    /// Splits one stimulus segment (clipped to [sa, sb]) into pieces and
    /// advances through them. Returns false once the event cap is hit.
    bool run_segment(double sa, double sb, double ia, double ib)
    {
        std::vector<double> cuts{sa, sb};
        if (ia != ib) {
            const double sign = cfg_.polarity == Polarity::SinkN ? 1.0 : -1.0;
            const double levels[] = {0.0, cfg_.i_leak_floor, cfg_.i_sw,
                                     cfg_.i_sw * (1.0 - cfg_.hysteresis)};
            for (double level : levels) {
                const double c = sign * level;
                const double u = (c - ia) / (ib - ia);
                if (u > 0.0 && u < 1.0) {
                    cuts.push_back(sa + u * (sb - sa));
                }
            }
            std::sort(cuts.begin(), cuts.end());
            cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        }
        const auto value = [&](double t) {
            if (t <= sa) {
                return ia;
            }
            if (t >= sb) {
                return ib;
            }
            return ia + (ib - ia) * ((t - sa) / (sb - sa));
        };
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double pa = cuts[k];
            const double pb = cuts[k + 1];
            if (!(pb > pa)) {
                continue;
            }
            const double mid = rectify(value(0.5 * (pa + pb)), cfg_.polarity);
            Piece p{};
            p.ta = pa;
            p.tb = pb;
            p.range = select_range(cfg_, mid, state_.selected);
            p.active = nonideal(cfg_, mid) > 0.0;
            p.ra = p.active ? rectify(value(pa), cfg_.polarity) : 0.0;
            p.rb = p.active ? rectify(value(pb), cfg_.polarity) : 0.0;
            if (!run_piece(p)) {
                return false;
            }
        }
        return true;
    }

private:
    double& active_voltage()
    {
        return state_.selected == RangeSelect::High ? state_.v_high : state_.v_low;
    }

    void record()
    {
        if (opts_.trace) {
            out_.trace.push_back({t_, state_});
        }
    }

    /// Inserts samples so no gap exceeds trace_max_gap before `until`.
    template <class VoltageAt>
    void fill_gap(double until, VoltageAt&& voltage_at)
    {
        if (!opts_.trace || !(opts_.trace_max_gap > 0.0) || out_.trace.empty()) {
            return;
        }
        double last = out_.trace.back().t;
        while (last + opts_.trace_max_gap < until) {
            last += opts_.trace_max_gap;
            ChannelState s = state_;
            voltage_at(last, s);
            out_.trace.push_back({last, s});
        }
    }

    void advance_phase()
    {
        if (state_.phase == Phase::RequestPending) {
            state_.phase = Phase::ResetPulse;
            state_.t_phase_start = t_;
            state_.v_low = cfg_.v_ref_h;
            state_.v_high = cfg_.v_ref_h;
            phase_end_ = t_ + cfg_.t_rst;
        } else {
            state_.phase = Phase::Integrating;
            state_.t_phase_start = t_;
        }
        record();
    }

    bool run_piece(const Piece& p)
    {
        t_ = p.ta;
        if (!started_) {
            state_.selected = p.range;
            started_ = true;
            record();
        } else if (p.range != state_.selected) {
            fill_gap(t_, [](double, ChannelState&) {});
            state_.selected = p.range;
            record();
        }
        const double slope = (p.rb - p.ra) / (p.tb - p.ta);
        while (t_ < p.tb) {
            if (state_.phase != Phase::Integrating) {
                if (phase_end_ <= p.tb) {
                    fill_gap(phase_end_, [](double, ChannelState&) {});
                    t_ = std::max(t_, phase_end_);
                    advance_phase();
                    continue;
                }
                fill_gap(p.tb, [](double, ChannelState&) {});
                t_ = p.tb;
                break;
            }

            const double c_eff = cfg_.effective_capacitance(state_.selected);
            double& v = active_voltage();
            const double q_needed = std::max(0.0, c_eff * (v - cfg_.v_ref_l));
            const double a = std::max(0.0, p.ra + slope * (t_ - p.ta));
            const double span = p.tb - t_;
            const double q_avail = p.active ? charge(a, slope, span) : 0.0;
            const double v0 = v;
            const double t0 = t_;
            const RangeSelect sel = state_.selected;
            const auto integrated = [&](double ts, ChannelState& s) {
                const double dv = p.active ? charge(a, slope, ts - t0) / c_eff : 0.0;
                (sel == RangeSelect::High ? s.v_high : s.v_low) =
                    std::max(cfg_.v_ref_l, v0 - dv);
            };

            // The slack absorbs ulp drift of the time cursor, so a crossing
            // that lands exactly on a piece end is not lost.
            if (p.active && q_avail >= q_needed * (1.0 - kCrossingSlack)) {
                const double t_ev = t_ + crossing_time(a, slope, q_needed, span);
                fill_gap(t_ev, integrated);
                if (out_.events.size() >= opts_.event_cap) {
                    out_.truncated = true;
                    return false;
                }
                t_ = t_ev;
                v = cfg_.v_ref_l;
                out_.events.push_back({t_ev, cfg_.channel_address, state_.selected});
                state_.phase = Phase::RequestPending;
                state_.t_phase_start = t_;
                phase_end_ = t_ + latency_.next();
                record();
            } else {
                fill_gap(p.tb, integrated);
                v = std::max(cfg_.v_ref_l, v - q_avail / c_eff);
                t_ = p.tb;
            }
        }
        return true;
    }

    const CfcConfig& cfg_;
    const SimulationOptions& opts_;
    LatencySource latency_;
    SimulationResult& out_;
    ChannelState state_;
    double t_ = 0.0;
    double phase_end_ = 0.0;
    bool started_ = false;
};

}  // namespace

SimulationResult simulate(const CfcConfig& config, const CurrentSignal& stimulus,
                          double duration, const AckModel& ack, const SimulationOptions& options)
{
    config.validate();
    ack.validate();
    if (!std::isfinite(duration) || !(duration > 0.0)) {
        throw ConfigError("simulation duration must be > 0");
    }
    if (stimulus.empty()) {
        throw ConfigError("stimulus is empty");
    }
    if (stimulus.start() > 0.0 || stimulus.end() < duration) {
        throw ConfigError("stimulus must be defined on [0, duration]");
    }
    if (options.trace && options.trace_max_gap < 0.0) {
        throw ConfigError("trace_max_gap must be >= 0");
    }

    SimulationResult result;
    Channel channel(config, ack, options, result);
    const auto segs = stimulus.segments();
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const double s0 = segs[k].t0;
        const double s1 = stimulus.end_time(k);
        if (s1 <= 0.0) {
            continue;
        }
        if (s0 >= duration) {
            break;
        }
        const double sa = std::max(0.0, s0);
        const double sb = std::min(duration, s1);
        double ia = stimulus.at(sa);
        double ib = segs[k].kind == SegmentKind::Step ? segs[k].i0 : stimulus.at(sb);
        if (sb >= s1) {
            ib = stimulus.end_value(k);
        }
        if (sa <= s0) {
            ia = segs[k].i0;
        }
        if (!channel.run_segment(sa, sb, ia, ib)) {
            break;
        }
    }
    return result;
}

double power_estimate(std::span<const AerEvent> events, double duration, double energy_per_event,
                      double static_power)
{
    if (!(duration > 0.0)) {
        throw ConfigError("power_estimate needs duration > 0");
    }
    return static_power + energy_per_event * static_cast<double>(events.size()) / duration;
}

std::vector<AerEvent> merge_events(std::span<const std::vector<AerEvent>> streams)
{
    std::vector<AerEvent> all;
    std::size_t n = 0;
    for (const auto& s : streams) {
        n += s.size();
    }
    all.reserve(n);
    for (const auto& s : streams) {
        all.insert(all.end(), s.begin(), s.end());
    }
    std::stable_sort(all.begin(), all.end(), [](const AerEvent& x, const AerEvent& y) {
        return x.t_req != y.t_req ? x.t_req < y.t_req : x.channel < y.channel;
    });
    return all;
}

}  // namespace cfc
