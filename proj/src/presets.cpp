// Preset pipelines: stimulus -> simulate -> reconstruct -> analysis.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "cfc/batch.hpp"
#include "cfc/csv_io.hpp"
#include "cfc/experiment.hpp"
#include "cfc/rate_law.hpp"
#include "experiment_io.hpp"

namespace cfc {

using nlohmann::json;

namespace {

constexpr int kStaircaseSteps = 41;
constexpr double kStaircaseDwell = 0.05;
constexpr double kComparisonStep = 1e-3;

double compensation_for(const CfcConfig& cfg, const PresetOptions& o)
{
    return o.compensate ? cfg.t_rst : 0.0;
}

ReconstructedSignal decode(const SimulationResult& sim, const CfcConfig& cfg, double comp)
{
    ReconstructOptions ro;
    ro.compensation = comp;
    return reconstruct(sim.events, cfg, ro);
}

void write_run_files(const std::filesystem::path& dir, const CurrentSignal& truth,
                     const SimulationResult& sim, const ReconstructedSignal& rec)
{
    write_file(dir / "truth.csv", [&](std::ostream& os) { write_signal_csv(os, truth); });
    write_file(dir / "events.csv", [&](std::ostream& os) { write_events_csv(os, sim.events); });
    write_file(dir / "recon.csv", [&](std::ostream& os) { write_recon_csv(os, rec); });
}

struct ComparisonStats {
    double worst = 0.0;
    double median = 0.0;
};

/// Writes comparison.csv of reconstruction vs ground truth on a uniform grid
/// over [0, duration]. The decoded value is the linear interpolation of the
/// reconstruction; grid points outside it have no measurement.
ComparisonStats write_comparison(const std::filesystem::path& path, const CfcConfig& cfg,
                                 const ReconstructedSignal& rec,
                                 const std::function<double(double)>& truth, double duration,
                                 double dt)
{
    std::vector<double> errors;
    const auto& s = rec.samples;
    std::size_t j = 0;
    write_file(path, [&](std::ostream& os) {
        os << "t_s,truth_A,decoded_A,rel_err,band\n";
        const auto n = static_cast<std::size_t>(std::floor(duration / dt + 1e-9));
        for (std::size_t k = 0; k <= n; ++k) {
            const double t = static_cast<double>(k) * dt;
            const double ref = truth(t);
            const bool covered = !s.empty() && t >= s.front().t && t <= s.back().t;
            double dec = 0.0;
            if (covered) {
                while (j + 1 < s.size() && s[j + 1].t <= t) {
                    ++j;
                }
                dec = s[j].i_est;
                if (j + 1 < s.size()) {
                    const double w = (t - s[j].t) / (s[j + 1].t - s[j].t);
                    dec += w * (s[j + 1].i_est - s[j].i_est);
                }
            }
            const std::string_view band = rectify(ref, cfg.polarity) <= cfg.i_leak_floor
                                              ? std::string_view("below_floor")
                                              : band_label(cfg, ref, covered);
            os << format_double(t) << ',' << format_double(ref) << ',';
            if (covered) {
                const double err = ref != 0.0 ? (dec - ref) / ref : 0.0;
                if (band == "valid") {
                    errors.push_back(std::abs(err));
                }
                os << format_double(dec) << ',' << format_double(err);
            } else {
                os << ',';
            }
            os << ',' << band << '\n';
        }
    });
    ComparisonStats out;
    if (!errors.empty()) {
        out.worst = *std::max_element(errors.begin(), errors.end());
        auto mid = errors.begin() + static_cast<std::ptrdiff_t>(errors.size() / 2);
        std::nth_element(errors.begin(), mid, errors.end());
        out.median = *mid;
    }
    return out;
}

RunSummary run_fig4(const PresetOptions& o)
{
    const CfcConfig cfg;
    const double comp = compensation_for(cfg, o);
    std::vector<Staircase> stairs;
    std::vector<BatchJob> jobs;
    for (const auto& r : kSweepRanges) {
        stairs.push_back(staircase_sweep(r.start, r.stop, kStaircaseSteps, kStaircaseDwell));
        jobs.push_back({cfg, stairs.back().signal, stairs.back().signal.end(), AckModel{}, {}});
    }
    const auto results = simulate_batch(jobs, o.threads);

    RunSummary summary;
    json ranges = json::array();
    for (std::size_t k = 0; k < kSweepRanges.size(); ++k) {
        const auto dir = o.out_dir / "fig4" / std::string(kSweepRanges[k].name);
        const ReconstructedSignal rec = decode(results[k], cfg, comp);
        write_run_files(dir, stairs[k].signal, results[k], rec);
        const auto points = sweep_analysis(results[k].events, stairs[k].schedule, cfg, 0.2, comp);
        write_file(dir / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, points, cfg); });

        double worst = 0.0;
        int valid = 0;
        int unmeasured = 0;
        for (const auto& p : points) {
            if (!p.decoded) {
                ++unmeasured;
            } else if (band_label(cfg, p.programmed, true) == "valid") {
                ++valid;
                worst = std::max(worst, std::abs((*p.decoded - p.programmed) / p.programmed));
            }
        }
        ranges.push_back({{"name", kSweepRanges[k].name},
                          {"start_A", kSweepRanges[k].start},
                          {"stop_A", kSweepRanges[k].stop},
                          {"steps", points.size()},
                          {"valid_steps", valid},
                          {"no_measurement_steps", unmeasured},
                          {"max_abs_rel_err_valid", worst},
                          {"events", results[k].events.size()}});
    }
    summary.record = {{"preset", "fig4"},
                      {"seed", o.seed},
                      {"compensation_s", comp},
                      {"config", config_to_json(cfg)},
                      {"ranges", ranges}};
    write_json(o.out_dir / "fig4" / "summary.json", summary.record);
    return summary;
}

RunSummary run_fig5(const PresetOptions& o)
{
    CfcConfig cfg;
    cfg.i_sw = 100e-9;
    const double comp = compensation_for(cfg, o);
    const PfetParams fet;
    const double vg_start = fet.vg_ref + 0.5 * fet.slope;
    const double vg_stop = fet.vg_ref - 6.8 * fet.slope;
    const double duration = 5.0;
    const CurrentSignal truth = pfet_gate_sweep(vg_start, vg_stop, duration, fet);
    const SimulationResult sim = simulate(cfg, truth, duration);
    const ReconstructedSignal rec = decode(sim, cfg, comp);

    const auto dir = o.out_dir / "fig5";
    write_run_files(dir, truth, sim, rec);
    const auto model = [&](double t) {
        return pfet_current(fet, vg_start + (vg_stop - vg_start) * (t / duration));
    };
    const ComparisonStats cmp =
        write_comparison(dir / "comparison.csv", cfg, rec, model, duration, kComparisonStep);

    // Onset of output relative to the modelled current.
    const double first_event_current = sim.events.empty() ? 0.0 : model(sim.events.front().t_req);
    RunSummary summary;
    summary.record = {{"preset", "fig5"},
                      {"seed", o.seed},
                      {"compensation_s", comp},
                      {"config", config_to_json(cfg)},
                      {"events", sim.events.size()},
                      {"first_event_model_current_A", first_event_current},
                      {"max_abs_rel_err_valid", cmp.worst},
                      {"median_abs_rel_err_valid", cmp.median},
                      {"vg_start_V", vg_start},
                      {"vg_stop_V", vg_stop}};
    write_json(dir / "summary.json", summary.record);
    return summary;
}

RunSummary run_fig6(const PresetOptions& o)
{
    CfcConfig cfg;
    cfg.i_sw = 0.5e-9;
    const double comp = compensation_for(cfg, o);
    const double duration = 1.0;
    const SpikeTrain input = regular_train(20.0, duration);
    const CurrentSignal synapse = dpi_synapse(input, 20e-3, 1.1e-9, 0.0, duration);
    const AdexParams neuron;
    const AdexResult adex = adex_neuron(synapse, neuron, duration);
    const SimulationResult sim = simulate(cfg, adex.membrane, duration);
    const ReconstructedSignal rec = decode(sim, cfg, comp);

    const auto dir = o.out_dir / "fig6";
    write_run_files(dir, adex.membrane, sim, rec);
    write_file(dir / "synapse.csv", [&](std::ostream& os) { write_signal_csv(os, synapse); });
    write_file(dir / "spikes_in.csv", [&](std::ostream& os) { write_spikes_csv(os, input); });
    write_file(dir / "spikes_out.csv",
               [&](std::ostream& os) { write_spikes_csv(os, adex.spikes); });
    const ComparisonStats cmp =
        write_comparison(dir / "comparison.csv", cfg, rec,
                         [&](double t) { return adex.membrane.at(t); }, duration, kComparisonStep);

    std::size_t switches = 0;
    for (std::size_t k = 1; k < sim.events.size(); ++k) {
        switches += sim.events[k].sf != sim.events[k - 1].sf ? 1 : 0;
    }
    RunSummary summary;
    summary.record = {{"preset", "fig6"},
                      {"seed", o.seed},
                      {"compensation_s", comp},
                      {"config", config_to_json(cfg)},
                      {"input_rate_hz", 20.0},
                      {"output_spikes", adex.spikes.times.size()},
                      {"events", sim.events.size()},
                      {"sf_switches", switches},
                      {"max_abs_rel_err_valid", cmp.worst},
                      {"median_abs_rel_err_valid", cmp.median}};
    write_json(dir / "summary.json", summary.record);
    return summary;
}

RunSummary run_fig7(const PresetOptions& o)
{
    const CfcConfig cfg;
    const double comp = compensation_for(cfg, o);
    const double duration = 2.0;
    const double tau = 20e-3;
    const SpikeTrain input = poisson_train(5.0, duration, o.seed);
    const CurrentSignal truth = dpi_synapse(input, tau, 1e-9, 0.0, duration);
    const SimulationResult sim = simulate(cfg, truth, duration);
    const ReconstructedSignal rec = decode(sim, cfg, comp);

    const auto dir = o.out_dir / "fig7";
    write_run_files(dir, truth, sim, rec);
    write_file(dir / "spikes.csv", [&](std::ostream& os) { write_spikes_csv(os, input); });

    // Fit every decay that runs for at least 3 tau before the next spike.
    std::vector<std::pair<double, ExponentialFit>> fits;
    for (std::size_t k = 0; k < input.times.size(); ++k) {
        const double ts = input.times[k];
        const double next = k + 1 < input.times.size() ? input.times[k + 1] : duration;
        if (next - ts < 3.0 * tau) {
            continue;
        }
        const double t1 = ts + std::min(next - ts, 5.0 * tau);
        std::vector<double> t;
        std::vector<double> y;
        for (const auto& s : rec.samples) {
            if (s.t >= ts + 1e-3 && s.t <= t1) {
                t.push_back(s.t);
                y.push_back(s.i_est);
            }
        }
        try {
            fits.emplace_back(ts, fit_exponential(t, y, ts));
        } catch (const DecodeError&) {
            // Too few samples in this window.
        }
    }
    double tau_sum = 0.0;
    write_file(dir / "fits.csv", [&](std::ostream& os) {
        os << "spike_t_s,tau_s,amplitude_A,baseline_A,residual_norm_A,samples\n";
        for (const auto& [ts, f] : fits) {
            os << format_double(ts) << ',' << format_double(f.tau) << ','
               << format_double(f.amplitude) << ',' << format_double(f.baseline) << ','
               << format_double(f.residual_norm) << ',' << f.samples << '\n';
            tau_sum += f.tau;
        }
    });
    const double tau_mean = fits.empty() ? 0.0 : tau_sum / static_cast<double>(fits.size());
    write_file(dir / "fit.txt", [&](std::ostream& os) {
        if (!fits.empty()) {
            os << fits.front().second.to_record();
        }
        os << "fits=" << fits.size() << '\n';
        os << "tau_mean_s=" << format_double(tau_mean) << '\n';
        os << "tau_true_s=" << format_double(tau) << '\n';
    });

    RunSummary summary;
    summary.record = {{"preset", "fig7"},
                      {"seed", o.seed},
                      {"compensation_s", comp},
                      {"config", config_to_json(cfg)},
                      {"input_spikes", input.times.size()},
                      {"events", sim.events.size()},
                      {"fits", fits.size()},
                      {"tau_true_s", tau},
                      {"tau_mean_s", tau_mean}};
    write_json(dir / "summary.json", summary.record);
    return summary;
}

}  // namespace

RunSummary run_preset(std::string_view name, const PresetOptions& options)
{
    if (name == "fig4") {
        return run_fig4(options);
    }
    if (name == "fig5") {
        return run_fig5(options);
    }
    if (name == "fig6") {
        return run_fig6(options);
    }
    if (name == "fig7") {
        return run_fig7(options);
    }
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected fig4, fig5, fig6, fig7)");
}

}  // namespace cfc
