#include "cfc/experiment.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "cfc/batch.hpp"
#include "cfc/csv_io.hpp"
#include "cfc/rate_law.hpp"
#include "experiment_io.hpp"

namespace cfc {

using nlohmann::json;

namespace {

double as_number(const json& v, const std::string& key)
{
    if (!v.is_number()) {
        throw ConfigError("key '" + key + "' must be a number");
    }
    return v.get<double>();
}

std::string as_string(const json& v, const std::string& key)
{
    if (!v.is_string()) {
        throw ConfigError("key '" + key + "' must be a string");
    }
    return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& key)
{
    if (!v.is_boolean()) {
        throw ConfigError("key '" + key + "' must be true or false");
    }
    return v.get<bool>();
}

std::uint64_t as_uint(const json& v, const std::string& key)
{
    if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0 &&
                                    !v.is_number_unsigned())) {
        throw ConfigError("key '" + key + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

using Setter = std::function<void(ExperimentSpec&, const json&, const std::string&)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        const auto num = [&t](const char* key, auto member) {
            t[key] = [member](ExperimentSpec& s, const json& v, const std::string& k) {
                member(s) = as_number(v, k);
            };
        };
        num("c1", [](ExperimentSpec& s) -> double& { return s.config.c1; });
        num("alpha", [](ExperimentSpec& s) -> double& { return s.config.alpha; });
        num("beta", [](ExperimentSpec& s) -> double& { return s.config.beta; });
        num("v_ref_h", [](ExperimentSpec& s) -> double& { return s.config.v_ref_h; });
        num("v_ref_l", [](ExperimentSpec& s) -> double& { return s.config.v_ref_l; });
        num("i_sw", [](ExperimentSpec& s) -> double& { return s.config.i_sw; });
        num("hysteresis", [](ExperimentSpec& s) -> double& { return s.config.hysteresis; });
        num("t_rst", [](ExperimentSpec& s) -> double& { return s.config.t_rst; });
        num("i_leak_floor", [](ExperimentSpec& s) -> double& { return s.config.i_leak_floor; });
        num("i_max_valid", [](ExperimentSpec& s) -> double& { return s.config.i_max_valid; });
        num("current", [](ExperimentSpec& s) -> double& { return s.stimulus.current; });
        num("start", [](ExperimentSpec& s) -> double& { return s.stimulus.start; });
        num("stop", [](ExperimentSpec& s) -> double& { return s.stimulus.stop; });
        num("dwell", [](ExperimentSpec& s) -> double& { return s.stimulus.dwell; });
        num("vg_start", [](ExperimentSpec& s) -> double& { return s.stimulus.vg_start; });
        num("vg_stop", [](ExperimentSpec& s) -> double& { return s.stimulus.vg_stop; });
        num("pfet_i0", [](ExperimentSpec& s) -> double& { return s.stimulus.pfet.i0; });
        num("pfet_slope", [](ExperimentSpec& s) -> double& { return s.stimulus.pfet.slope; });
        num("pfet_i_sat", [](ExperimentSpec& s) -> double& { return s.stimulus.pfet.i_sat; });
        num("pfet_vg_ref", [](ExperimentSpec& s) -> double& { return s.stimulus.pfet.vg_ref; });
        num("tau", [](ExperimentSpec& s) -> double& { return s.stimulus.tau; });
        num("weight", [](ExperimentSpec& s) -> double& { return s.stimulus.weight; });
        num("i_base", [](ExperimentSpec& s) -> double& { return s.stimulus.i_base; });
        num("spike_rate", [](ExperimentSpec& s) -> double& { return s.stimulus.spike_rate; });
        num("duration", [](ExperimentSpec& s) -> double& { return s.duration; });
        num("ack_latency", [](ExperimentSpec& s) -> double& { return s.ack.latency_min; });
        num("ack_latency_max", [](ExperimentSpec& s) -> double& { return s.ack.latency_max; });
        num("trace_max_gap", [](ExperimentSpec& s) -> double& { return s.trace_max_gap; });
        num("energy_per_event", [](ExperimentSpec& s) -> double& { return s.energy_per_event; });
        num("static_power", [](ExperimentSpec& s) -> double& { return s.static_power; });
        num("settle_fraction", [](ExperimentSpec& s) -> double& { return s.settle_fraction; });

        t["name"] = [](ExperimentSpec& s, const json& v, const std::string& k) {
            s.name = as_string(v, k);
        };
        t["polarity"] = [](ExperimentSpec& s, const json& v, const std::string& k) {
            s.config.polarity = parse_polarity(as_string(v, k));
        };
        t["channel_address"] = [](ExperimentSpec& s, const json& v, const std::string& k) {
            s.config.channel_address = static_cast<std::uint32_t>(as_uint(v, k));
        };
        t["stimulus"] = [](ExperimentSpec& s, const json& v, const std::string& k) {
            s.stimulus.kind = as_string(v, k);
        };
        t["steps"] = [](ExperimentSpec& s, const json& v, const std::string& k) {
            s.stimulus.steps = static_cast<int>(as_uint(v, k));
        };
        t["spike_train"] = [](ExperimentSpec& s, const json& v, const std::string& k) {
            s.stimulus.spike_train = as_string(v, k);
        };
        t["stimulus_file"] = [](ExperimentSpec& s, const json& v, const std::string& k) {
            s.stimulus.file = as_string(v, k);
        };
        t["out"] = [](ExperimentSpec& s, const json& v, const std::string& k) {
            s.out_dir = as_string(v, k);
        };
        t["seed"] = [](ExperimentSpec& s, const json& v, const std::string& k) {
            s.seed = as_uint(v, k);
        };
        t["event_cap"] = [](ExperimentSpec& s, const json& v, const std::string& k) {
            s.event_cap = as_uint(v, k);
        };
        t["trace"] = [](ExperimentSpec& s, const json& v, const std::string& k) {
            s.trace = as_bool(v, k);
        };
        t["compensate"] = [](ExperimentSpec& s, const json& v, const std::string& k) {
            s.compensate = as_bool(v, k);
        };
        t["placement"] = [](ExperimentSpec& s, const json& v, const std::string& k) {
            const std::string p = as_string(v, k);
            if (p == "midpoint") {
                s.placement = Placement::Midpoint;
            } else if (p == "at_second") {
                s.placement = Placement::AtSecond;
            } else {
                throw ConfigError("placement must be 'midpoint' or 'at_second'");
            }
        };
        return t;
    }();
    return table;
}

void require_keys(const std::set<std::string>& present, std::initializer_list<const char*> keys,
                  const std::string& kind)
{
    for (const char* k : keys) {
        if (!present.count(k)) {
            throw ConfigError("missing key '" + std::string(k) + "' for stimulus '" + kind + "'");
        }
    }
}

}  // namespace

ExperimentSpec parse_experiment(const json& doc, bool require_stimulus)
{
    if (!doc.is_object()) {
        throw ConfigError("experiment description must be a JSON object");
    }
    ExperimentSpec spec;
    std::set<std::string> present;
    bool latency_max_given = false;
    for (const auto& [key, value] : doc.items()) {
        const auto& table = setters();
        auto it = table.find(key);
        if (it == table.end()) {
            throw ConfigError("unknown key '" + key + "'");
        }
        it->second(spec, value, key);
        present.insert(key);
        latency_max_given = latency_max_given || key == "ack_latency_max";
    }
    if (!latency_max_given) {
        spec.ack.latency_max = spec.ack.latency_min;
    }
    spec.ack.seed = spec.seed;
    spec.config.validate();
    spec.ack.validate();

    if (!require_stimulus && spec.stimulus.kind.empty()) {
        return spec;
    }
    const std::string& kind = spec.stimulus.kind;
    if (kind.empty()) {
        throw ConfigError("missing key 'stimulus'");
    }
    if (kind == "constant") {
        require_keys(present, {"current"}, kind);
    } else if (kind == "staircase") {
        require_keys(present, {"start", "stop", "steps", "dwell"}, kind);
    } else if (kind == "pfet") {
        require_keys(present, {"vg_start", "vg_stop"}, kind);
    } else if (kind == "dpi") {
        require_keys(present, {"tau", "weight", "spike_rate"}, kind);
        if (spec.stimulus.spike_train != "regular" && spec.stimulus.spike_train != "poisson") {
            throw ConfigError("spike_train must be 'regular' or 'poisson'");
        }
    } else if (kind == "file") {
        require_keys(present, {"stimulus_file"}, kind);
    } else {
        throw ConfigError("unknown stimulus kind '" + kind + "'");
    }
    return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path, bool require_stimulus)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_experiment(doc, require_stimulus);
}

namespace {

double need_duration(const ExperimentSpec& spec)
{
    if (!(spec.duration > 0.0)) {
        throw ConfigError("missing key 'duration' for stimulus '" + spec.stimulus.kind + "'");
    }
    return spec.duration;
}

}  // namespace

CurrentSignal build_stimulus(const ExperimentSpec& spec)
{
    const StimulusSpec& s = spec.stimulus;
    if (s.kind == "constant") {
        return constant(s.current, need_duration(spec));
    }
    if (s.kind == "staircase") {
        return staircase_sweep(s.start, s.stop, s.steps, s.dwell).signal;
    }
    if (s.kind == "pfet") {
        return pfet_gate_sweep(s.vg_start, s.vg_stop, need_duration(spec), s.pfet);
    }
    if (s.kind == "dpi") {
        const double d = need_duration(spec);
        const SpikeTrain train = s.spike_train == "poisson"
                                     ? poisson_train(s.spike_rate, d, spec.seed)
                                     : regular_train(s.spike_rate, d);
        return dpi_synapse(train, s.tau, s.weight, s.i_base, d);
    }
    if (s.kind == "file") {
        std::ifstream in(s.file);
        if (!in) {
            throw ConfigError("cannot open stimulus file " + s.file);
        }
        return read_signal_csv(in);
    }
    throw ConfigError("unknown stimulus kind '" + s.kind + "'");
}

double resolve_duration(const ExperimentSpec& spec, const CurrentSignal& stimulus)
{
    return spec.duration > 0.0 ? spec.duration : stimulus.end();
}

json config_to_json(const CfcConfig& c)
{
    return json{{"c1", c.c1},
                {"alpha", c.alpha},
                {"beta", c.beta},
                {"v_ref_h", c.v_ref_h},
                {"v_ref_l", c.v_ref_l},
                {"i_sw", c.i_sw},
                {"hysteresis", c.hysteresis},
                {"t_rst", c.t_rst},
                {"i_leak_floor", c.i_leak_floor},
                {"i_max_valid", c.i_max_valid},
                {"polarity", std::string(to_string(c.polarity))},
                {"channel_address", c.channel_address}};
}

void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& writer)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    writer(out);
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

void write_json(const std::filesystem::path& path, const json& doc)
{
    write_file(path, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
}

RunSummary run_simulate(const ExperimentSpec& spec)
{
    const CurrentSignal stimulus = build_stimulus(spec);
    const double duration = resolve_duration(spec, stimulus);
    if (spec.trace && spec.trace_max_gap < 0.0) {
        throw ConfigError("trace_max_gap must be >= 0");
    }
    SimulationOptions opts;
    opts.trace = spec.trace;
    opts.trace_max_gap = spec.trace_max_gap;
    opts.event_cap = spec.event_cap;
    const SimulationResult sim = simulate(spec.config, stimulus, duration, spec.ack, opts);

    ReconstructOptions ro;
    ro.compensation = spec.compensation();
    ro.placement = spec.placement;
    const ReconstructedSignal rec = reconstruct(sim.events, spec.config, ro);

    const auto& dir = spec.out_dir;
    std::filesystem::create_directories(dir);
    write_file(dir / "events.csv", [&](std::ostream& os) { write_events_csv(os, sim.events); });
    write_file(dir / "truth.csv", [&](std::ostream& os) { write_signal_csv(os, stimulus); });
    write_file(dir / "recon.csv", [&](std::ostream& os) { write_recon_csv(os, rec); });
    if (spec.trace) {
        write_file(dir / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, sim.trace); });
    }

    RunSummary summary;
    summary.truncated = sim.truncated;
    json& r = summary.record;
    r["name"] = spec.name;
    r["seed"] = spec.seed;
    r["duration_s"] = duration;
    r["events"] = sim.events.size();
    r["mean_rate_hz"] = static_cast<double>(sim.events.size()) / duration;
    r["power_W"] = power_estimate(sim.events, duration, spec.energy_per_event, spec.static_power);
    r["truncated"] = sim.truncated;
    r["compensation_s"] = ro.compensation;
    r["config"] = config_to_json(spec.config);

    if (spec.stimulus.kind == "staircase") {
        const StimulusSpec& s = spec.stimulus;
        const Staircase stair = staircase_sweep(s.start, s.stop, s.steps, s.dwell);
        const auto points = sweep_analysis(sim.events, stair.schedule, spec.config,
                                           spec.settle_fraction, ro.compensation);
        write_file(dir / "sweep.csv",
                   [&](std::ostream& os) { write_sweep_csv(os, points, spec.config); });
    }
    write_json(dir / "summary.json", r);
    return summary;
}

RunSummary run_decode(const std::filesystem::path& events_path, const ExperimentSpec& spec,
                      bool infer_range)
{
    std::ifstream in(events_path);
    if (!in) {
        throw std::runtime_error("cannot open events file " + events_path.string());
    }
    const std::vector<AerEvent> events = read_events_csv(in);
    ReconstructOptions ro;
    ro.compensation = spec.compensation();
    ro.placement = spec.placement;
    ro.infer_range = infer_range;
    const ReconstructedSignal rec = reconstruct(events, spec.config, ro);
    std::filesystem::create_directories(spec.out_dir);
    write_file(spec.out_dir / "recon.csv", [&](std::ostream& os) { write_recon_csv(os, rec); });

    RunSummary summary;
    summary.record["events"] = events.size();
    summary.record["samples"] = rec.samples.size();
    summary.record["compensation_s"] = ro.compensation;
    return summary;
}

void write_sweep_csv(std::ostream& os, std::span<const SweepPoint> points, const CfcConfig& cfg)
{
    os << "programmed_A,decoded_A,rel_err,intervals,range,status\n";
    for (const auto& p : points) {
        os << format_double(p.programmed) << ',';
        if (p.decoded) {
            os << format_double(*p.decoded) << ','
               << format_double((*p.decoded - p.programmed) / p.programmed) << ',';
        } else {
            os << ",,";
        }
        os << p.intervals << ',';
        if (p.range) {
            os << sf_bit(*p.range);
        }
        os << ',' << band_label(cfg, p.programmed, p.decoded.has_value()) << '\n';
    }
}

std::string_view band_label(const CfcConfig& cfg, double programmed, bool measured)
{
    if (!measured) {
        return "no_measurement";
    }
    const double i = rectify(programmed, cfg.polarity);
    if (i <= cfg.i_leak_floor) {
        return "below_floor";
    }
    if (i < kValidLow) {
        return "below_valid";
    }
    if (i > cfg.i_max_valid) {
        return "above_valid";
    }
    return "valid";
}

RunSummary run_sweep(const ExperimentSpec& spec, const SweepRequest& req)
{
    if (!(req.from > 0.0) || !(req.to > req.from) || req.points < 2) {
        throw ConfigError("sweep needs 0 < from < to and at least 2 points");
    }
    const std::vector<double> levels = log_spaced(req.from, req.to, req.points);
    LevelOptions lo;
    lo.target_events = req.target_events;
    lo.ack = spec.ack;
    lo.compensation = spec.compensation();
    if (spec.duration > 0.0) {
        lo.max_duration = spec.duration;
    }
    std::vector<double> signed_levels = levels;
    if (spec.config.polarity == Polarity::SourceP) {
        for (double& l : signed_levels) {
            l = -l;
        }
    }
    const auto readings = measure_levels(spec.config, signed_levels, lo, req.threads);

    double worst = 0.0;
    std::filesystem::create_directories(spec.out_dir);
    write_file(spec.out_dir / "sweep.csv", [&](std::ostream& os) {
        os << "programmed_A,decoded_A,rel_err,events,range,status\n";
        for (const auto& r : readings) {
            os << format_double(r.programmed) << ',';
            if (r.measured) {
                os << format_double(r.decoded) << ',' << format_double(r.relative_error());
            } else {
                os << ',';
            }
            os << ',' << r.events << ',' << sf_bit(r.range) << ','
               << band_label(spec.config, r.programmed, r.measured) << '\n';
            if (r.measured) {
                worst = std::max(worst, std::abs(r.relative_error()));
            }
        }
    });
    RunSummary summary;
    json& rec = summary.record;
    rec["name"] = spec.name;
    rec["points"] = readings.size();
    rec["from_A"] = req.from;
    rec["to_A"] = req.to;
    rec["max_abs_rel_err"] = worst;
    rec["compensation_s"] = lo.compensation;
    rec["config"] = config_to_json(spec.config);
    write_json(spec.out_dir / "summary.json", rec);
    return summary;
}

}  // namespace cfc
