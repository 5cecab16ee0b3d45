#include "cfc/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>

namespace cfc {

CsvError::CsvError(std::size_t line, const std::string& what)
    : DecodeError("line " + std::to_string(line) + ": " + what), line_(line)
{
}

std::string format_double(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        const std::size_t comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma - pos));
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

double parse_double(std::string_view s, std::size_t line, const char* column)
{
    s = trim(s);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw CsvError(line, std::string("cannot parse ") + column + " '" + std::string(s) + "'");
    }
    return v;
}

unsigned long parse_uint(std::string_view s, std::size_t line, const char* column)
{
    s = trim(s);
    unsigned long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw CsvError(line, std::string("cannot parse ") + column + " '" + std::string(s) + "'");
    }
    return v;
}

/// Iterates data rows after checking the header. Blank lines are skipped.
template <class RowFn>
void for_each_row(std::istream& is, std::string_view header, std::size_t columns, RowFn&& fn)
{
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string_view row = trim(line);
        if (row.empty()) {
            continue;
        }
        if (!have_header) {
            if (row != header) {
                throw CsvError(lineno, "expected header '" + std::string(header) + "'");
            }
            have_header = true;
            continue;
        }
        const auto cells = split(row);
        if (cells.size() != columns) {
            throw CsvError(lineno, "expected " + std::to_string(columns) + " columns, got " +
                                       std::to_string(cells.size()));
        }
        fn(cells, lineno);
    }
}

}  // namespace

void write_events_csv(std::ostream& os, std::span<const AerEvent> events)
{
    os << "t_req_s,channel,sf\n";
    for (const auto& e : events) {
        os << format_double(e.t_req) << ',' << e.channel << ',' << sf_bit(e.sf) << '\n';
    }
}

std::vector<AerEvent> read_events_csv(std::istream& is, bool require_sorted)
{
    std::vector<AerEvent> out;
    std::map<std::uint32_t, double> last;
    for_each_row(is, "t_req_s,channel,sf", 3, [&](const auto& cells, std::size_t lineno) {
        AerEvent e;
        e.t_req = parse_double(cells[0], lineno, "t_req_s");
        if (!std::isfinite(e.t_req)) {
            throw CsvError(lineno, "t_req_s is not finite");
        }
        e.channel = static_cast<std::uint32_t>(parse_uint(cells[1], lineno, "channel"));
        const unsigned long sf = parse_uint(cells[2], lineno, "sf");
        if (sf > 1) {
            throw CsvError(lineno, "sf must be 0 or 1");
        }
        e.sf = sf == 1 ? RangeSelect::High : RangeSelect::Low;
        if (require_sorted) {
            auto it = last.find(e.channel);
            if (it != last.end() && !(e.t_req > it->second)) {
                throw CsvError(lineno, "event time does not increase for channel " +
                                           std::to_string(e.channel));
            }
            last[e.channel] = e.t_req;
        }
        out.push_back(e);
    });
    return out;
}

void write_trace_csv(std::ostream& os, std::span<const TraceSample> trace)
{
    os << "t_s,v_low_V,v_high_V,phase,selected\n";
    for (const auto& s : trace) {
        os << format_double(s.t) << ',' << format_double(s.state.v_low) << ','
           << format_double(s.state.v_high) << ',' << to_string(s.state.phase) << ','
           << sf_bit(s.state.selected) << '\n';
    }
}

void write_recon_csv(std::ostream& os, const ReconstructedSignal& signal)
{
    os << "t_s,i_A,range\n";
    for (const auto& s : signal.samples) {
        os << format_double(s.t) << ',' << format_double(s.i_est) << ',' << sf_bit(s.range)
           << '\n';
    }
}

void write_signal_csv(std::ostream& os, const CurrentSignal& signal)
{
    os << "t_s,i_A\n";
    const auto segs = signal.segments();
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const double t1 = signal.end_time(k);
        os << format_double(segs[k].t0) << ',' << format_double(segs[k].i0) << '\n';
        // The end point is implied when the next segment starts from it.
        if (k + 1 == segs.size() || segs[k + 1].i0 != segs[k].i1) {
            os << format_double(t1) << ',' << format_double(segs[k].i1) << '\n';
        }
    }
}

CurrentSignal read_signal_csv(std::istream& is)
{
    PwlBuilder b;
    for_each_row(is, "t_s,i_A", 2, [&](const auto& cells, std::size_t lineno) {
        const double t = parse_double(cells[0], lineno, "t_s");
        const double i = parse_double(cells[1], lineno, "i_A");
        if (!b.empty() && t < b.last_time()) {
            throw CsvError(lineno, "signal times must not decrease");
        }
        try {
            b.add_point(t, i);
        } catch (const ConfigError& e) {
            throw CsvError(lineno, e.what());
        }
    });
    if (b.empty()) {
        throw ConfigError("signal CSV has no rows");
    }
    const double end = b.last_time();
    return std::move(b).finish(end);
}

void write_spikes_csv(std::ostream& os, const SpikeTrain& spikes)
{
    os << "t_s\n";
    for (double t : spikes.times) {
        os << format_double(t) << '\n';
    }
}

SpikeTrain read_spikes_csv(std::istream& is)
{
    SpikeTrain s;
    for_each_row(is, "t_s", 1, [&](const auto& cells, std::size_t lineno) {
        const double t = parse_double(cells[0], lineno, "t_s");
        if (!s.times.empty() && !(t > s.times.back())) {
            throw CsvError(lineno, "spike times must be strictly increasing");
        }
        s.times.push_back(t);
    });
    return s;
}

}  // namespace cfc
