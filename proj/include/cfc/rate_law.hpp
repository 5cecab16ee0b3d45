#pragma once

#include <optional>

#include "cfc/config.hpp"

// Stateless transfer functions of the converter, shared by the simulator
// and the decoder. All currents in amperes, times in seconds.

namespace cfc {

/// |i_signed| when its sign is the one the selector passes, otherwise 0.
double rectify(double i_signed, Polarity polarity) noexcept;

/// Range detector. Ties at i_sw go High. With config.hysteresis = h > 0
/// and previous == High, the detector stays High down to i_sw*(1-h).
RangeSelect select_range(const CfcConfig& config, double i_rect,
                         RangeSelect previous = RangeSelect::Low) noexcept;

/// Output rate for a constant rectified current, i / (scale * C1 * dV).
double ideal_rate(const CfcConfig& config, double i_rect) noexcept;

/// Reciprocal of ideal_rate; nullopt when no event is ever produced.
std::optional<double> ideal_isi(const CfcConfig& config, double i_rect) noexcept;

/// Inverse rate law: current that produces an interval `isi` on `range`,
/// after removing `dead_time_comp` of non-integrating time.
/// Throws DecodeError when isi <= dead_time_comp.
double decode_isi(const CfcConfig& config, double isi, RangeSelect range,
                  double dead_time_comp = 0.0);

}  // namespace cfc
