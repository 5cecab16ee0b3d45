// cfc: command-line front end for the converter simulator.
//
//   cfc simulate --config spec.json [--out dir] [--seed n] [--duration s] [--compensate]
//   cfc decode events.csv [--config cfg.json] [--out dir] [--compensate] [--infer-range]
//   cfc preset fig4|fig5|fig6|fig7 [--out dir] [--seed n] [--compensate] [--parallel n]
//   cfc sweep [--config cfg.json] [--from A] [--to A] [--points n] [--parallel n]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cfc/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct CommonFlags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<double> duration;
    bool compensate = false;
    int parallel = 0;
};

void add_common(CLI::App& cmd, CommonFlags& f, bool with_config)
{
    if (with_config) {
        cmd.add_option("--config", f.config, "Flat JSON experiment/config file");
    }
    cmd.add_option("--out", f.out, "Output directory");
    cmd.add_option("--seed", f.seed, "Seed for all randomness");
    cmd.add_option("--duration", f.duration, "Simulated duration in seconds");
    cmd.add_flag("--compensate", f.compensate, "Remove reset + ack dead time when decoding");
    cmd.add_option("--parallel", f.parallel, "Worker threads (0 = OpenMP default)");
}

cfc::ExperimentSpec resolve(const CommonFlags& f, bool require_stimulus)
{
    cfc::ExperimentSpec spec;
    if (!f.config.empty()) {
        spec = cfc::load_experiment(f.config, require_stimulus);
    } else if (require_stimulus) {
        throw cfc::ConfigError("missing --config");
    }
    if (!f.out.empty()) {
        spec.out_dir = f.out;
    }
    if (f.seed) {
        spec.seed = *f.seed;
        spec.ack.seed = *f.seed;
    }
    if (f.duration) {
        if (!(*f.duration > 0.0)) {
            throw cfc::ConfigError("--duration must be > 0");
        }
        spec.duration = *f.duration;
    }
    spec.compensate = spec.compensate || f.compensate;
    return spec;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Auto-scaling current-to-frequency converter simulator"};
    app.require_subcommand(1);

    CommonFlags sim_flags;
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate one experiment description");
    add_common(*sim_cmd, sim_flags, true);

    CommonFlags dec_flags;
    std::string events_path;
    bool infer_range = false;
    auto* dec_cmd = app.add_subcommand("decode", "Reconstruct currents from an events CSV");
    dec_cmd->add_option("events", events_path, "Events CSV (t_req_s,channel,sf)")->required();
    add_common(*dec_cmd, dec_flags, true);
    dec_cmd->add_flag("--infer-range", infer_range, "Ignore sf and infer range from continuity");

    CommonFlags pre_flags;
    std::string preset_name;
    auto* pre_cmd = app.add_subcommand("preset", "Run a figure pipeline");
    pre_cmd->add_option("name", preset_name, "fig4 | fig5 | fig6 | fig7")
        ->required()
        ->check(CLI::IsMember({"fig4", "fig5", "fig6", "fig7"}));
    add_common(*pre_cmd, pre_flags, false);

    CommonFlags sweep_flags;
    cfc::SweepRequest sweep_req;
    auto* sweep_cmd = app.add_subcommand("sweep", "Log-spaced constant-current linearity sweep");
    add_common(*sweep_cmd, sweep_flags, true);
    sweep_cmd->add_option("--from", sweep_req.from, "Lowest current (A)");
    sweep_cmd->add_option("--to", sweep_req.to, "Highest current (A)");
    sweep_cmd->add_option("--points", sweep_req.points, "Number of levels");
    sweep_cmd->add_option("--events", sweep_req.target_events, "Target events per level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*sim_cmd) {
            const auto spec = resolve(sim_flags, true);
            const auto summary = cfc::run_simulate(spec);
            std::cout << summary.record.dump(2) << '\n';
            if (summary.truncated) {
                std::cerr << "error: event cap reached; outputs hold a truncated run\n";
                return kRuntimeError;
            }
        } else if (*dec_cmd) {
            const auto spec = resolve(dec_flags, false);
            std::cout << cfc::run_decode(events_path, spec, infer_range).record.dump(2) << '\n';
        } else if (*pre_cmd) {
            cfc::PresetOptions po;
            if (!pre_flags.out.empty()) {
                po.out_dir = pre_flags.out;
            }
            po.seed = pre_flags.seed.value_or(cfc::kDefaultSeed);
            po.compensate = pre_flags.compensate;
            po.threads = pre_flags.parallel;
            std::cout << cfc::run_preset(preset_name, po).record.dump(2) << '\n';
        } else if (*sweep_cmd) {
            const auto spec = resolve(sweep_flags, false);
            sweep_req.threads = sweep_flags.parallel;
            std::cout << cfc::run_sweep(spec, sweep_req).record.dump(2) << '\n';
        }
    } catch (const cfc::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}
