// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cfc/batch.hpp"
#include "cfc/decoder.hpp"
#include "cfc/experiment.hpp"
#include "cfc/rate_law.hpp"
#include "cfc/simulator.hpp"
#include "cfc/stimulus.hpp"
#include "oracle_simulate.hpp"

using namespace cfc;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kAnchorRateTol = 1e-3;
constexpr double kAnchorRuntime = 5.0;
constexpr double kLinearityIdealTol = 5e-3;
constexpr double kLinearityDefaultTol = 2e-2;
constexpr double kLinearityRuntime = 60.0;
constexpr double kDeadZoneDuration = 10.0;
constexpr double kDistortion1uA = 0.0099;
constexpr double kDistortion1uATol = 0.0005;
constexpr double kDistortion4uA = 0.0385;
constexpr double kDistortion4uATol = 0.001;
constexpr double kCompensatedTol = 1e-4;
constexpr double kSwitchRatioTol = 0.01;
constexpr double kTauTol = 0.05;
constexpr double kSweepTol = 0.02;
constexpr int kOracleStimuli = 24;
constexpr double kOracleStepDivisor = 1e5;
constexpr double kOracleTimeTol = 2.0;  // in units of dt
constexpr double kPowerTol = 0.01;

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

CfcConfig ideal_knobs()
{
    CfcConfig c;
    c.t_rst = 0.0;
    c.i_leak_floor = 0.0;
    return c;
}

double mean_rate(const CfcConfig& c, double i, double target_events)
{
    const double duration = target_events / ideal_rate(c, i);
    const auto r = simulate(c, constant(i, duration), duration);
    return static_cast<double>(r.events.size()) / duration;
}

Outcome anchor_rates()
{
    const auto t0 = Clock::now();
    const CfcConfig c = ideal_knobs();
    struct Anchor {
        double current;
        double rate;
    };
    // The upper end of the unscaled range is taken just below the threshold.
    const Anchor anchors[] = {
        {1e-12, 10.0}, {10e-9 * (1.0 - 1e-6), 100e3}, {10e-9, 1e3}, {1e-6, 100e3}};
    Outcome o;
    double worst = 0.0;
    for (const auto& a : anchors) {
        const double r = mean_rate(c, a.current, 1e4);
        worst = std::max(worst, rel(r, a.rate));
        o.pass = o.pass && rel(r, a.rate) <= kAnchorRateTol;
    }
    const double elapsed = seconds_since(t0);
    o.pass = o.pass && elapsed < kAnchorRuntime;
    o.detail = fmt("worst rate error %.3g, runtime %.2f s", worst, elapsed);
    return o;
}

Outcome linearity()
{
    const auto t0 = Clock::now();
    const auto levels = log_spaced(10e-12, 1e-6, 61);
    const auto ideal = measure_levels(ideal_knobs(), levels, {});
    const auto dflt = measure_levels(CfcConfig{}, levels, {});
    double worst_ideal = 0.0;
    double worst_default = 0.0;
    Outcome o;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        o.pass = o.pass && ideal[k].measured && dflt[k].measured;
        worst_ideal = std::max(worst_ideal, std::abs(ideal[k].relative_error()));
        worst_default = std::max(worst_default, std::abs(dflt[k].relative_error()));
    }
    const double elapsed = seconds_since(t0);
    o.pass = o.pass && worst_ideal <= kLinearityIdealTol && worst_default <= kLinearityDefaultTol &&
             elapsed < kLinearityRuntime;
    o.detail = fmt("61 levels, worst error ideal %.3g, defaults %.3g, runtime %.2f s",
                   worst_ideal, worst_default, elapsed);
    return o;
}

Outcome dead_zone()
{
    const CfcConfig c;
    std::size_t events = 0;
    for (double i : {0.0, 1e-15, 1e-12, 3e-12, 5e-12, 5.4e-12, 5.5e-12}) {
        events += simulate(c, constant(i, kDeadZoneDuration), kDeadZoneDuration).events.size();
    }
    Outcome o;
    o.pass = events == 0;
    o.detail = fmt("%.0f events from 7 levels <= 5.5 pA over 10 s", static_cast<double>(events));
    return o;
}

// Fractional shortfall of the uncompensated reading, plus the compensated
// error, for a constant current with t_rst = 0.1 us.
struct Distortion {
    double low_by = 0.0;
    double compensated = 0.0;
    double oracle_isi_err = 0.0;
};

Distortion distortion_at(double i)
{
    CfcConfig c;
    c.t_rst = 0.1e-6;
    const double duration = 200.0 * (*ideal_isi(c, i) + c.t_rst);
    const auto stim = constant(i, duration);
    const auto ev = simulate(c, stim, duration).events;
    const auto mean = [](const ReconstructedSignal& r) {
        double s = 0.0;
        for (const auto& x : r.samples) {
            s += x.i_est;
        }
        return s / static_cast<double>(r.samples.size());
    };
    Distortion d;
    d.low_by = 1.0 - mean(reconstruct(ev, c)) / i;
    ReconstructOptions comp;
    comp.compensation = c.t_rst;
    d.compensated = rel(mean(reconstruct(ev, c, comp)), i);

    const double short_duration = 20.0 * (*ideal_isi(c, i) + c.t_rst);
    const double dt = oracle::fastest_ideal_isi(c, stim, short_duration) / 1e4;
    const auto orc = oracle::oracle_simulate(c, constant(i, short_duration), short_duration, dt);
    const double isi = (orc.back().t_req - orc.front().t_req) / static_cast<double>(orc.size() - 1);
    d.oracle_isi_err = std::abs(isi - (*ideal_isi(c, i) + c.t_rst)) / isi;
    return d;
}

Outcome high_current_distortion()
{
    const Distortion a = distortion_at(1e-6);
    const Distortion b = distortion_at(4e-6);
    Outcome o;
    o.pass = std::abs(a.low_by - kDistortion1uA) <= kDistortion1uATol &&
             std::abs(b.low_by - kDistortion4uA) <= kDistortion4uATol &&
             a.compensated <= kCompensatedTol && b.compensated <= kCompensatedTol &&
             a.oracle_isi_err < 1e-6 && b.oracle_isi_err < 1e-6;
    o.detail = fmt("low by %.4f%% at 1 uA, %.4f%% at 4 uA", 100 * a.low_by, 100 * b.low_by) +
               fmt(", compensated %.2g / %.2g", a.compensated, b.compensated) +
               fmt(", oracle interval error %.2g", std::max(a.oracle_isi_err, b.oracle_isi_err));
    return o;
}

Outcome range_switch()
{
    const CfcConfig c = ideal_knobs();
    const double below = c.i_sw * (1.0 - 1e-6);
    const double ratio = mean_rate(c, below, 1e4) / mean_rate(c, c.i_sw, 1e4);
    const auto low = simulate(c, constant(below, 1e-3), 1e-3).events;
    const auto high = simulate(c, constant(c.i_sw, 10e-3), 10e-3).events;
    bool flags = !low.empty() && !high.empty();
    for (const auto& e : low) {
        flags = flags && e.sf == RangeSelect::Low;
    }
    for (const auto& e : high) {
        flags = flags && e.sf == RangeSelect::High;
    }
    Outcome o;
    o.pass = rel(ratio, c.alpha * c.beta) <= kSwitchRatioTol && flags;
    o.detail = fmt("rate ratio %.5g, sf Low below / High at i_sw: ", ratio) + (flags ? "yes" : "no");
    return o;
}

Outcome dpi_tau()
{
    const CfcConfig c;
    const double tau = 20e-3;
    const double ts = 0.01;
    SpikeTrain one;
    one.times = {ts};
    const double duration = ts + 10.0 * tau;
    const auto syn = dpi_synapse(one, tau, 1e-9, 0.0, duration);
    const auto rec = reconstruct(simulate(c, syn, duration).events, c);
    const auto fit = fit_exponential(rec, ts, ts + 5.0 * tau);
    Outcome o;
    o.pass = rel(fit.tau, tau) <= kTauTol;
    o.detail = fmt("fitted tau %.5g ms (error %.3g), amplitude %.4g nA", fit.tau * 1e3,
                   rel(fit.tau, tau), fit.amplitude * 1e9);
    return o;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p)
{
    std::ifstream is(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cols.push_back(cell);
        }
        if (!line.empty() && line.back() == ',') {
            cols.emplace_back();
        }
        rows.push_back(cols);
    }
    return rows;
}

Outcome five_ranges(const fs::path& root)
{
    PresetOptions po;
    po.out_dir = root / "criterion7";
    run_preset("fig4", po);
    const CfcConfig c;
    Outcome o;
    double worst = 0.0;
    int checked = 0;
    int unmeasured = 0;
    for (const auto& r : kSweepRanges) {
        const auto rows = read_csv(po.out_dir / "fig4" / std::string(r.name) / "sweep.csv");
        o.pass = o.pass && rows.size() == 41;
        for (const auto& row : rows) {
            const double programmed = std::stod(row[0]);
            const bool measured = !row[1].empty();
            if (programmed <= c.i_leak_floor) {
                o.pass = o.pass && !measured && row[5] == "no_measurement";
                ++unmeasured;
            } else if (programmed >= 10e-12 && programmed <= 1e-6) {
                o.pass = o.pass && measured;
                if (measured) {
                    const double err = std::abs(std::stod(row[2]));
                    worst = std::max(worst, err);
                    o.pass = o.pass && err < kSweepTol;
                    ++checked;
                }
            }
        }
    }
    o.detail = fmt("%.0f in-band steps, worst error %.3g, %.0f sub-floor steps unmeasured",
                   checked, worst, unmeasured);
    return o;
}

// Piecewise-linear stimuli in the 1-100 nA band, mixing ramps, jumps and
// crossings of the switch point.
std::vector<CurrentSignal> oracle_suite(double duration)
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> logi(std::log(1e-9), std::log(100e-9));
    std::uniform_int_distribution<int> npts(2, 6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<CurrentSignal> out;
    for (int s = 0; s < kOracleStimuli; ++s) {
        PwlBuilder b;
        const int n = npts(rng);
        std::vector<double> times;
        for (int k = 0; k < n; ++k) {
            times.push_back(duration * u(rng));
        }
        times.push_back(0.0);
        std::sort(times.begin(), times.end());
        for (double t : times) {
            b.add_point(t, std::exp(logi(rng)));
            if (u(rng) < 0.3) {
                b.add_point(t, std::exp(logi(rng)));  // jump
            }
        }
        out.push_back(std::move(b).finish(duration));
    }
    return out;
}

Outcome oracle_equivalence()
{
    const double duration = 1e-3;
    const auto suite = oracle_suite(duration);
    Outcome o;
    double worst = 0.0;
    std::size_t events = 0;
    for (std::size_t k = 0; k < suite.size(); ++k) {
        // Alternate ideal knobs and the default dead time.
        const CfcConfig c = k % 2 == 0 ? ideal_knobs() : CfcConfig{};
        const double dt = oracle::fastest_ideal_isi(c, suite[k], duration) / kOracleStepDivisor;
        const auto fast = simulate(c, suite[k], duration).events;
        const auto slow = oracle::oracle_simulate(c, suite[k], duration, dt);
        if (fast.size() != slow.size()) {
            o.pass = false;
            o.detail = fmt("stimulus %.0f: %.0f vs %.0f events; ", static_cast<double>(k),
                           static_cast<double>(fast.size()), static_cast<double>(slow.size()));
            continue;
        }
        events += fast.size();
        for (std::size_t j = 0; j < fast.size(); ++j) {
            const double d = std::abs(fast[j].t_req - slow[j].t_req) / dt;
            worst = std::max(worst, d);
            o.pass = o.pass && d <= kOracleTimeTol && fast[j].sf == slow[j].sf;
        }
    }
    o.detail += fmt("%.0f stimuli, %.0f events, worst time gap %.3g dt",
                    static_cast<double>(suite.size()), static_cast<double>(events), worst);
    return o;
}

Outcome power()
{
    const CfcConfig c = ideal_knobs();
    const double duration = 10e-3;
    const auto ev = simulate(c, constant(1e-6, duration), duration).events;
    const double rate = static_cast<double>(ev.size()) / duration;
    const double p = power_estimate(ev, duration);
    Outcome o;
    o.pass = rel(p, 36e-9) <= kPowerTol;
    o.detail = fmt("%.4g nW at %.4g kHz", p * 1e9, rate * 1e-3);
    return o;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

Outcome determinism(const fs::path& root)
{
    Outcome o;
    std::size_t files = 0;
    std::uintmax_t bytes = 0;
    std::vector<fs::path> dirs;
    for (int run = 0; run < 3; ++run) {
        PresetOptions po;
        po.out_dir = root / ("criterion10_" + std::to_string(run));
        po.seed = 4242;
        // The third run changes the worker count.
        po.threads = run == 2 ? 1 : 0;
        for (auto name : kPresetNames) {
            run_preset(name, po);
        }
        dirs.push_back(po.out_dir);
    }
    for (const auto& entry : fs::recursive_directory_iterator(dirs[0])) {
        if (!entry.is_regular_file()) {
            continue;
        }
        const auto relp = fs::relative(entry.path(), dirs[0]);
        const std::string first = slurp(entry.path());
        for (std::size_t d = 1; d < dirs.size(); ++d) {
            o.pass = o.pass && fs::exists(dirs[d] / relp) && slurp(dirs[d] / relp) == first;
        }
        ++files;
        bytes += first.size();
    }
    for (std::size_t d = 1; d < dirs.size(); ++d) {
        std::size_t n = 0;
        for (const auto& entry : fs::recursive_directory_iterator(dirs[d])) {
            n += entry.is_regular_file() ? 1 : 0;
        }
        o.pass = o.pass && n == files;
    }
    o.pass = o.pass && files > 0;
    o.detail = fmt("%.0f files (%.1f MB) identical across 3 runs", static_cast<double>(files),
                   static_cast<double>(bytes) / 1e6);
    return o;
}

}  // namespace

int main()
{
    const fs::path root = fs::temp_directory_path() / "cfc_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);

    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "anchor rates", anchor_rates},
        {2, "six-decade linearity", linearity},
        {3, "dead zone", dead_zone},
        {4, "high-current distortion", high_current_distortion},
        {5, "range-switch factor", range_switch},
        {6, "synapse time constant", dpi_tau},
        {7, "five-range sweeps", [&] { return five_ranges(root); }},
        {8, "oracle equivalence", oracle_equivalence},
        {9, "power figure", power},
        {10, "determinism", [&] { return determinism(root); }},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += o.pass ? 0 : 1;
        std::printf("criterion %2d %-24s %s  %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str());
        std::fflush(stdout);
    }
    fs::remove_all(root);
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
                criteria.size());
    return failed == 0 ? 0 : 1;
}
