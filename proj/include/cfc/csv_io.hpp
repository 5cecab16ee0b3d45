#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cfc/config.hpp"
#include "cfc/decoder.hpp"
#include "cfc/signal.hpp"
#include "cfc/simulator.hpp"

namespace cfc {

/// Malformed CSV input; the message names the offending line.
class CsvError : public DecodeError {
public:
    CsvError(std::size_t line, const std::string& what);
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

// Events: t_req_s,channel,sf (sf 0 = Low, 1 = High)
void write_events_csv(std::ostream& os, std::span<const AerEvent> events);
/// An empty stream yields no events. With require_sorted, a row whose time
/// does not follow the previous row of the same channel is an error.
std::vector<AerEvent> read_events_csv(std::istream& is, bool require_sorted = true);

// State trace: t_s,v_low_V,v_high_V,phase,selected
void write_trace_csv(std::ostream& os, std::span<const TraceSample> trace);

// Reconstruction: t_s,i_A,range (range 0 = Low, 1 = High)
void write_recon_csv(std::ostream& os, const ReconstructedSignal& signal);

// Current signal: t_s,i_A. Rows are joined linearly; two rows with the same
// time encode a jump.
void write_signal_csv(std::ostream& os, const CurrentSignal& signal);
CurrentSignal read_signal_csv(std::istream& is);

// Spike train: t_s
void write_spikes_csv(std::ostream& os, const SpikeTrain& spikes);
SpikeTrain read_spikes_csv(std::istream& is);

}  // namespace cfc
