#include "cfc/decoder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "cfc/rate_law.hpp"
#include "cfc/csv_io.hpp"

namespace cfc {

namespace {

void check_stream(std::span<const AerEvent> events)
{
    for (std::size_t k = 1; k < events.size(); ++k) {
        if (events[k].channel != events[0].channel) {
            throw DecodeError("event stream mixes channels " + std::to_string(events[0].channel) +
                              " and " + std::to_string(events[k].channel));
        }
        if (!(events[k].t_req > events[k - 1].t_req)) {
            throw DecodeError("event times are not strictly increasing at event " +
                              std::to_string(k));
        }
    }
}

RangeSelect infer_range(const CfcConfig& config, double isi, double comp,
                        std::optional<double> previous)
{
    const double lo = decode_isi(config, isi, RangeSelect::Low, comp);
    const double hi = decode_isi(config, isi, RangeSelect::High, comp);
    // A Low reading at or above i_sw, or a High reading below the release
    // point, cannot come from the detector.
    const bool lo_ok = lo < config.i_sw;
    const bool hi_ok = hi >= config.i_sw * (1.0 - config.hysteresis);
    if (lo_ok != hi_ok) {
        return lo_ok ? RangeSelect::Low : RangeSelect::High;
    }
    if (!previous) {
        return RangeSelect::Low;
    }
    const double d_lo = std::abs(std::log(lo / *previous));
    const double d_hi = std::abs(std::log(hi / *previous));
    return d_hi < d_lo ? RangeSelect::High : RangeSelect::Low;
}

}  // namespace

ReconstructedSignal reconstruct(std::span<const AerEvent> events, const CfcConfig& config,
                                const ReconstructOptions& options)
{
    config.validate();
    if (!(options.compensation >= 0.0)) {
        throw ConfigError("compensation must be >= 0");
    }
    check_stream(events);

    ReconstructedSignal out;
    out.config = config;
    out.compensation = options.compensation;
    out.placement = options.placement;
    if (events.size() < 2) {
        return out;
    }
    out.samples.reserve(events.size() - 1);
    std::optional<double> previous;
    for (std::size_t k = 1; k < events.size(); ++k) {
        const double isi = events[k].t_req - events[k - 1].t_req;
        const RangeSelect range = options.infer_range
                                      ? infer_range(config, isi, options.compensation, previous)
                                      : events[k].sf;
        const double i = decode_isi(config, isi, range, options.compensation);
        const double t = options.placement == Placement::Midpoint
                             ? 0.5 * (events[k - 1].t_req + events[k].t_req)
                             : events[k].t_req;
        out.samples.push_back({t, i, range});
        previous = i;
    }
    return out;
}

UniformSeries resample(const ReconstructedSignal& signal, double dt, ResampleMode mode)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw DecodeError("resample step must be > 0");
    }
    if (signal.empty()) {
        throw DecodeError("cannot resample an empty signal");
    }
    const auto& s = signal.samples;
    UniformSeries out;
    out.t0 = s.front().t;
    out.dt = dt;
    const double span = s.back().t - s.front().t;
    const auto n = static_cast<std::size_t>(std::floor(span / dt * (1.0 + 1e-12))) + 1;
    out.values.reserve(n);
    std::size_t j = 0;  // last sample with time <= t
    for (std::size_t k = 0; k < n; ++k) {
        const double t = out.time(k);
        while (j + 1 < s.size() && s[j + 1].t <= t) {
            ++j;
        }
        if (mode == ResampleMode::Hold || j + 1 >= s.size()) {
            out.values.push_back(s[j].i_est);
            continue;
        }
        const double u = (t - s[j].t) / (s[j + 1].t - s[j].t);
        out.values.push_back(s[j].i_est + (s[j + 1].i_est - s[j].i_est) * u);
    }
    return out;
}

std::string ExponentialFit::to_record() const
{
    std::string r;
    r += "amplitude_A=" + format_double(amplitude) + "\n";
    r += "tau_s=" + format_double(tau) + "\n";
    r += "baseline_A=" + format_double(baseline) + "\n";
    r += "residual_norm_A=" + format_double(residual_norm) + "\n";
    r += "samples=" + std::to_string(samples) + "\n";
    return r;
}

namespace {

// Data are normalised so x = (t - t0) / x_scale and y = value / y_scale.
struct FitData {
    std::vector<double> x;
    std::vector<double> y;
};

struct LinearPart {
    double amplitude;
    double baseline;
    double ss;
};

/// Best amplitude/baseline for a fixed decay rate k (per unit of x).
LinearPart solve_linear(const FitData& d, double k)
{
    double see = 0, se = 0, sy = 0, sey = 0;
    const auto n = static_cast<double>(d.x.size());
    for (std::size_t j = 0; j < d.x.size(); ++j) {
        const double e = std::exp(-k * d.x[j]);
        see += e * e;
        se += e;
        sy += d.y[j];
        sey += e * d.y[j];
    }
    const double det = see * n - se * se;
    LinearPart p{};
    if (std::abs(det) <= 1e-13 * see * n) {
        p.amplitude = 0.0;
        p.baseline = sy / n;
    } else {
        p.amplitude = (sey * n - se * sy) / det;
        p.baseline = (see * sy - se * sey) / det;
    }
    double ss = 0;
    for (std::size_t j = 0; j < d.x.size(); ++j) {
        const double r = d.y[j] - p.baseline - p.amplitude * std::exp(-k * d.x[j]);
        ss += r * r;
    }
    p.ss = ss;
    return p;
}

double sum_squares(const FitData& d, double a, double b, double k)
{
    double ss = 0;
    for (std::size_t j = 0; j < d.x.size(); ++j) {
        const double r = d.y[j] - b - a * std::exp(-k * d.x[j]);
        ss += r * r;
    }
    return ss;
}

/// Gauss-Newton refinement on (amplitude, baseline, k) with step halving.
void polish(const FitData& d, double& a, double& b, double& k)
{
    double ss = sum_squares(d, a, b, k);
    for (int iter = 0; iter < 50; ++iter) {
        std::array<std::array<double, 3>, 3> m{};
        std::array<double, 3> g{};
        for (std::size_t j = 0; j < d.x.size(); ++j) {
            const double e = std::exp(-k * d.x[j]);
            const double r = d.y[j] - b - a * e;
            const std::array<double, 3> jac{e, 1.0, -a * d.x[j] * e};
            for (int p = 0; p < 3; ++p) {
                g[p] += jac[p] * r;
                for (int q = 0; q < 3; ++q) {
                    m[p][q] += jac[p] * jac[q];
                }
            }
        }
        // Gaussian elimination with partial pivoting.
        std::array<double, 3> step = g;
        bool singular = false;
        for (int c = 0; c < 3; ++c) {
            int piv = c;
            for (int r = c + 1; r < 3; ++r) {
                if (std::abs(m[r][c]) > std::abs(m[piv][c])) {
                    piv = r;
                }
            }
            if (std::abs(m[piv][c]) < 1e-300) {
                singular = true;
                break;
            }
            std::swap(m[c], m[piv]);
            std::swap(step[c], step[piv]);
            for (int r = c + 1; r < 3; ++r) {
                const double f = m[r][c] / m[c][c];
                for (int q = c; q < 3; ++q) {
                    m[r][q] -= f * m[c][q];
                }
                step[r] -= f * step[c];
            }
        }
        if (singular) {
            return;
        }
        for (int c = 2; c >= 0; --c) {
            for (int q = c + 1; q < 3; ++q) {
                step[c] -= m[c][q] * step[q];
            }
            step[c] /= m[c][c];
        }
        double lambda = 1.0;
        bool improved = false;
        for (int h = 0; h < 30; ++h, lambda *= 0.5) {
            const double na = a + lambda * step[0];
            const double nb = b + lambda * step[1];
            const double nk = k + lambda * step[2];
            const double nss = sum_squares(d, na, nb, nk);
            if (nss <= ss) {
                improved = nss < ss;
                a = na;
                b = nb;
                k = nk;
                ss = nss;
                break;
            }
        }
        if (!improved) {
            return;
        }
    }
}

}  // namespace

ExponentialFit fit_exponential(std::span<const double> t, std::span<const double> y, double t0)
{
    if (t.size() != y.size()) {
        throw DecodeError("fit_exponential needs equal-length time and value arrays");
    }
    if (t.size() < 5) {
        throw DecodeError("fit_exponential needs at least 5 samples in the window (got " +
                          std::to_string(t.size()) + ")");
    }
    double y_scale = 0.0;
    for (double v : y) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw DecodeError("fit_exponential needs positive samples");
        }
        y_scale = std::max(y_scale, v);
    }
    const auto [tmin, tmax] = std::minmax_element(t.begin(), t.end());
    const double x_scale = *tmax - *tmin;
    if (!(x_scale > 0.0)) {
        throw DecodeError("fit_exponential needs samples spread in time");
    }

    FitData d;
    d.x.reserve(t.size());
    d.y.reserve(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) {
        d.x.push_back((t[j] - t0) / x_scale);
        d.y.push_back(y[j] / y_scale);
    }

    // Scan log(tau) over [1e-4, 1e3] window lengths, then golden section.
    constexpr int grid = 241;
    const double u_lo = std::log(1e-4);
    const double u_hi = std::log(1e3);
    const auto ss_at = [&](double u) { return solve_linear(d, std::exp(-u)).ss; };
    int best = 0;
    double best_ss = std::numeric_limits<double>::infinity();
    for (int g = 0; g < grid; ++g) {
        const double u = u_lo + (u_hi - u_lo) * g / (grid - 1);
        const double ss = ss_at(u);
        if (ss < best_ss) {
            best_ss = ss;
            best = g;
        }
    }
    if (best == grid - 1) {
        throw DecodeError("no exponential trend in the fit window");
    }
    const double du = (u_hi - u_lo) / (grid - 1);
    double a = u_lo + du * std::max(0, best - 1);
    double b = u_lo + du * std::min(grid - 1, best + 1);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a);
    double e = a + phi * (b - a);
    double fc = ss_at(c);
    double fe = ss_at(e);
    for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
        if (fc < fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - phi * (b - a);
            fc = ss_at(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + phi * (b - a);
            fe = ss_at(e);
        }
    }
    double k = std::exp(-0.5 * (a + b));
    LinearPart lin = solve_linear(d, k);
    double amp = lin.amplitude;
    double base = lin.baseline;
    polish(d, amp, base, k);

    // Amplitude is relative to the largest sample here.
    if (!(k > 0.0) || !std::isfinite(k) || std::abs(amp) <= 1e-9) {
        throw DecodeError("no exponential trend in the fit window");
    }

    ExponentialFit fit;
    fit.amplitude = amp * y_scale;
    fit.baseline = base * y_scale;
    fit.tau = x_scale / k;
    fit.residual_norm = std::sqrt(sum_squares(d, amp, base, k)) * y_scale;
    fit.samples = t.size();
    return fit;
}

ExponentialFit fit_exponential(const ReconstructedSignal& signal, double t0, double t1)
{
    std::vector<double> t;
    std::vector<double> y;
    for (const auto& s : signal.samples) {
        if (s.t >= t0 && s.t <= t1) {
            t.push_back(s.t);
            y.push_back(s.i_est);
        }
    }
    return fit_exponential(t, y, t0);
}

std::vector<SweepPoint> sweep_analysis(std::span<const AerEvent> events,
                                       const SweepSchedule& schedule, const CfcConfig& config,
                                       double settle_fraction, double compensation)
{
    config.validate();
    if (schedule.steps.empty()) {
        throw ConfigError("sweep schedule has no steps");
    }
    if (!(settle_fraction >= 0.0 && settle_fraction < 1.0)) {
        throw ConfigError("settle_fraction must lie in [0, 1)");
    }
    check_stream(events);
    const double span_lo = schedule.steps.front().t_start;
    const double span_hi = schedule.end();
    for (const auto& ev : events) {
        if (ev.t_req < span_lo || ev.t_req > span_hi) {
            std::ostringstream os;
            os << "event at " << ev.t_req << " s lies outside the schedule span [" << span_lo
               << ", " << span_hi << "] s";
            throw DecodeError(os.str());
        }
    }

    std::vector<SweepPoint> out;
    out.reserve(schedule.steps.size());
    const auto by_time = [](const AerEvent& ev, double t) { return ev.t_req < t; };
    for (const auto& step : schedule.steps) {
        SweepPoint p;
        p.programmed = step.level;
        const double w0 = step.t_start + settle_fraction * step.dwell;
        const double w1 = step.t_start + step.dwell;
        auto first = std::lower_bound(events.begin(), events.end(), w0, by_time);
        auto last = std::lower_bound(first, events.end(), w1, by_time);
        if (std::distance(first, last) >= 2) {
            double sum = 0.0;
            for (auto it = first + 1; it != last; ++it) {
                sum += decode_isi(config, it->t_req - (it - 1)->t_req, it->sf, compensation);
            }
            p.intervals = static_cast<std::size_t>(std::distance(first, last)) - 1;
            p.decoded = sum / static_cast<double>(p.intervals);
            p.range = (last - 1)->sf;
        }
        out.push_back(p);
    }
    return out;
}

}  // namespace cfc
