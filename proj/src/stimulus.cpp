#include "cfc/stimulus.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cfc/config.hpp"

namespace cfc {

CurrentSignal constant(double i, double duration)
{
    if (!(duration > 0.0)) {
        throw ConfigError("constant stimulus needs duration > 0");
    }
    return CurrentSignal({{0.0, i, i, SegmentKind::Step}}, duration);
}

Staircase staircase_sweep(double start, double stop, int steps, double dwell)
{
    if (!(start < stop)) {
        throw ConfigError("staircase needs start < stop");
    }
    if (steps < 2) {
        throw ConfigError("staircase needs at least 2 steps");
    }
    if (!(dwell > 0.0)) {
        throw ConfigError("staircase dwell must be > 0");
    }
    Staircase out;
    std::vector<Segment> segs;
    segs.reserve(static_cast<std::size_t>(steps));
    const double inc = (stop - start) / (steps - 1);
    for (int k = 0; k < steps; ++k) {
        const double level = k == steps - 1 ? stop : start + k * inc;
        const double t0 = k * dwell;
        segs.push_back({t0, level, level, SegmentKind::Step});
        out.schedule.steps.push_back({t0, dwell, level});
    }
    out.signal = CurrentSignal(std::move(segs), steps * dwell);
    return out;
}

double pfet_current(const PfetParams& params, double vg)
{
    const double i = params.i0 * std::pow(10.0, (params.vg_ref - vg) / params.slope);
    return std::min(params.i_sat, i);
}

CurrentSignal pfet_gate_sweep(double vg_start, double vg_stop, double duration,
                              const PfetParams& params, double max_dv)
{
    if (!(params.slope > 0.0)) {
        throw ConfigError("p-FET slope must be > 0");
    }
    if (!(params.i0 > 0.0) || !(params.i_sat > 0.0)) {
        throw ConfigError("p-FET i0 and i_sat must be > 0");
    }
    if (!(duration > 0.0)) {
        throw ConfigError("gate sweep needs duration > 0");
    }
    if (vg_start == vg_stop) {
        return constant(pfet_current(params, vg_start), duration);
    }
    if (!(max_dv > 0.0)) {
        max_dv = params.slope * 1e-3;
    }
    const double span = vg_stop - vg_start;
    const auto n = static_cast<std::size_t>(std::ceil(std::abs(span) / max_dv));
    std::vector<double> times;
    times.reserve(n + 2);
    for (std::size_t k = 0; k <= n; ++k) {
        times.push_back(duration * static_cast<double>(k) / static_cast<double>(n));
    }
    // Exact breakpoint at the saturation knee.
    const double vg_knee = params.vg_ref - params.slope * std::log10(params.i_sat / params.i0);
    const double u_knee = (vg_knee - vg_start) / span;
    if (u_knee > 0.0 && u_knee < 1.0) {
        times.push_back(u_knee * duration);
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());
    }
    PwlBuilder b;
    for (double t : times) {
        b.add_point(t, pfet_current(params, vg_start + span * (t / duration)));
    }
    return std::move(b).finish(duration);
}

CurrentSignal dpi_synapse(const SpikeTrain& spikes, double tau, double weight_jump,
                          double i_base, double duration, double resolution)
{
    if (!(tau > 0.0)) {
        throw ConfigError("DPI tau must be > 0");
    }
    if (!(duration > 0.0)) {
        throw ConfigError("DPI stimulus needs duration > 0");
    }
    if (!(resolution > 0.0)) {
        throw ConfigError("DPI resolution must be > 0");
    }
    spikes.validate();
    const double h = tau * resolution;

    PwlBuilder b;
    double t = 0.0;
    double i = i_base;
    b.add_point(t, i);
    const auto decay_to = [&](double t_end) {
        if (i == i_base) {
            b.add_point(t_end, i);
        } else {
            const double excess = i - i_base;
            const auto n = static_cast<std::size_t>(std::ceil((t_end - t) / h));
            for (std::size_t k = 1; k <= n; ++k) {
                const double tk = k == n ? t_end : t + static_cast<double>(k) * h;
                b.add_point(tk, i_base + excess * std::exp(-(tk - t) / tau));
            }
            i = i_base + excess * std::exp(-(t_end - t) / tau);
        }
        t = t_end;
    };
    for (double ts : spikes.times) {
        if (ts < 0.0) {
            throw ConfigError("spike times must be >= 0");
        }
        if (ts >= duration) {
            break;
        }
        if (ts > t) {
            decay_to(ts);
        }
        i += weight_jump;
        b.add_point(ts, i);
    }
    if (duration > t) {
        decay_to(duration);
    }
    return std::move(b).finish(duration);
}

void AdexParams::validate() const
{
    if (!(c_m > 0.0) || !(g_l > 0.0) || !(tau_w > 0.0) || !(delta_t > 0.0)) {
        throw ConfigError("AdEx c_m, g_l, tau_w and delta_t must be > 0");
    }
    if (!(v_peak > v_t)) {
        throw ConfigError("AdEx v_peak must exceed v_t");
    }
}

double AdexParams::rheobase() const
{
    // Steady state: 0 = -(g_l + a)(v - e_l) + g_l delta_t exp((v - v_t)/delta_t) + I.
    // The fixed point vanishes where the right-hand side has a double root.
    const double g = g_l + a;
    const double v_star = v_t + delta_t * std::log(g / g_l);
    return g * (v_star - e_l) - g_l * delta_t * std::exp((v_star - v_t) / delta_t);
}

AdexResult adex_neuron(const CurrentSignal& i_in, const AdexParams& p, double duration,
                       const AdexOptions& options)
{
    p.validate();
    if (!(duration > 0.0)) {
        throw ConfigError("AdEx duration must be > 0");
    }
    if (!(options.dt > 0.0)) {
        throw ConfigError("AdEx step must be > 0");
    }
    const double exp_cap = (p.v_peak - p.v_t) / p.delta_t + 5.0;
    const auto dv = [&](double v, double w, double i) {
        const double x = std::min((v - p.v_t) / p.delta_t, exp_cap);
        return (-p.g_l * (v - p.e_l) + p.g_l * p.delta_t * std::exp(x) - w + i) / p.c_m;
    };
    const auto dw = [&](double v, double w) { return (p.a * (v - p.e_l) - w) / p.tau_w; };
    const auto proxy = [&](double v) {
        return std::max(0.0, options.proxy_offset + p.g_l * (v - p.e_l));
    };

    AdexResult out;
    double v = std::isnan(options.v0) ? p.e_l : options.v0;
    double w = options.w0;
    const double h = options.dt;
    const auto steps = static_cast<std::size_t>(std::ceil(duration / h - 1e-9));
    out.v.reserve(steps + 1);
    out.v.push_back(v);

    PwlBuilder b;
    b.add_point(0.0, proxy(v));
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * h;
        const double t1 = std::min(duration, static_cast<double>(k + 1) * h);
        const double hh = t1 - t;
        const double i0 = i_in.at(t);
        const double im = i_in.at(t + 0.5 * hh);
        const double i1 = i_in.at(t1);

        const double k1v = dv(v, w, i0);
        const double k1w = dw(v, w);
        const double k2v = dv(v + 0.5 * hh * k1v, w + 0.5 * hh * k1w, im);
        const double k2w = dw(v + 0.5 * hh * k1v, w + 0.5 * hh * k1w);
        const double k3v = dv(v + 0.5 * hh * k2v, w + 0.5 * hh * k2w, im);
        const double k3w = dw(v + 0.5 * hh * k2v, w + 0.5 * hh * k2w);
        const double k4v = dv(v + hh * k3v, w + hh * k3w, i1);
        const double k4w = dw(v + hh * k3v, w + hh * k3w);
        v += hh / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        w += hh / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);

        if (v >= p.v_peak) {
            out.spikes.times.push_back(t1);
            b.add_point(t1, proxy(p.v_peak));
            v = p.v_reset;
            w += p.b;
        }
        b.add_point(t1, proxy(v));
        out.v.push_back(v);
    }
    out.membrane = std::move(b).finish(duration);
    return out;
}

SpikeTrain regular_train(double rate, double duration)
{
    if (!(rate > 0.0)) {
        throw ConfigError("spike rate must be > 0");
    }
    SpikeTrain s;
    s.rate = rate;
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) / rate;
        if (!(t < duration)) {
            break;
        }
        s.times.push_back(t);
    }
    return s;
}

SpikeTrain poisson_train(double rate, double duration, std::uint64_t seed)
{
    if (!(rate > 0.0)) {
        throw ConfigError("spike rate must be > 0");
    }
    SpikeTrain s;
    s.rate = rate;
    s.seed = seed;
    std::mt19937_64 rng(seed);
    double t = 0.0;
    for (;;) {
        // u in (0, 1): the gap is strictly positive and finite.
        const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
        t += -std::log(u) / rate;
        if (!(t < duration)) {
            break;
        }
        s.times.push_back(t);
    }
    return s;
}

}  // namespace cfc
