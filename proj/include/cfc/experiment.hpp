#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cfc/config.hpp"
#include "cfc/decoder.hpp"
#include "cfc/simulator.hpp"
#include "cfc/stimulus.hpp"

namespace cfc {

inline constexpr std::uint64_t kDefaultSeed = 20170301;

struct StimulusSpec {
    std::string kind;  // constant | staircase | pfet | dpi | file
    double current = 0.0;
    double start = 0.0;
    double stop = 0.0;
    int steps = 0;
    double dwell = 0.0;
    double vg_start = 0.0;
    double vg_stop = 0.0;
    PfetParams pfet;
    double tau = 0.0;
    double weight = 0.0;
    double i_base = 0.0;
    double spike_rate = 0.0;
    std::string spike_train = "regular";  // regular | poisson
    std::string file;
};

/// Everything one run needs. Parsed from a flat JSON object whose keys are
/// the CfcConfig field names plus the experiment keys listed in the README.
struct ExperimentSpec {
    std::string name = "run";
    CfcConfig config;
    StimulusSpec stimulus;
    double duration = 0.0;  // 0: derived from the stimulus where possible
    AckModel ack;
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = kDefaultSeed;
    bool trace = false;
    double trace_max_gap = 0.0;
    double energy_per_event = 0.36e-12;
    double static_power = 0.0;
    bool compensate = false;
    Placement placement = Placement::Midpoint;
    std::uint64_t event_cap = 100'000'000;
    double settle_fraction = 0.2;

    /// Dead time removed by the decoder when `compensate` is set.
    [[nodiscard]] double compensation() const noexcept
    {
        return compensate ? config.t_rst + ack.mean() : 0.0;
    }
};

/// Throws ConfigError on unknown keys, wrong types or missing required keys.
/// Without `require_stimulus` only configuration keys are needed.
ExperimentSpec parse_experiment(const nlohmann::json& doc, bool require_stimulus = true);
ExperimentSpec load_experiment(const std::filesystem::path& path, bool require_stimulus = true);

/// Builds the ground-truth signal; the seed feeds Poisson spike trains.
CurrentSignal build_stimulus(const ExperimentSpec& spec);

/// Resolves spec.duration: explicit > 0, else the stimulus length.
double resolve_duration(const ExperimentSpec& spec, const CurrentSignal& stimulus);

struct RunSummary {
    nlohmann::json record;
    bool truncated = false;
};

/// Writes events.csv, truth.csv, recon.csv, summary.json (and trace.csv,
/// sweep.csv when applicable) into spec.out_dir.
RunSummary run_simulate(const ExperimentSpec& spec);

/// Decodes an events CSV into out_dir/recon.csv.
RunSummary run_decode(const std::filesystem::path& events_path, const ExperimentSpec& spec,
                      bool infer_range = false);

struct SweepRequest {
    double from = 10e-12;
    double to = 1e-6;
    std::size_t points = 61;
    double target_events = 50.0;
    int threads = 0;
};

/// Log-spaced constant-current linearity sweep into out_dir/sweep.csv.
RunSummary run_sweep(const ExperimentSpec& spec, const SweepRequest& request);

struct PresetOptions {
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = kDefaultSeed;
    bool compensate = false;
    int threads = 0;
};

inline constexpr std::string_view kPresetNames[] = {"fig4", "fig5", "fig6", "fig7"};

/// Runs a figure pipeline end to end; throws ConfigError on unknown names.
RunSummary run_preset(std::string_view name, const PresetOptions& options);

}  // namespace cfc
