#include "cfc/rate_law.hpp"

#include <cmath>
#include <sstream>

namespace cfc {

double rectify(double i_signed, Polarity polarity) noexcept
{
    if (polarity == Polarity::SinkN) {
        return i_signed > 0.0 ? i_signed : 0.0;
    }
    return i_signed < 0.0 ? -i_signed : 0.0;
}

RangeSelect select_range(const CfcConfig& config, double i_rect, RangeSelect previous) noexcept
{
    if (i_rect >= config.i_sw) {
        return RangeSelect::High;
    }
    if (previous == RangeSelect::High && config.hysteresis > 0.0 &&
        i_rect >= config.i_sw * (1.0 - config.hysteresis)) {
        return RangeSelect::High;
    }
    return RangeSelect::Low;
}

double ideal_rate(const CfcConfig& config, double i_rect) noexcept
{
    if (i_rect <= 0.0) {
        return 0.0;
    }
    const RangeSelect r = select_range(config, i_rect);
    return i_rect / (config.scale(r) * config.c1 * config.delta_v());
}

std::optional<double> ideal_isi(const CfcConfig& config, double i_rect) noexcept
{
    const double f = ideal_rate(config, i_rect);
    if (f <= 0.0) {
        return std::nullopt;
    }
    return 1.0 / f;
}

double decode_isi(const CfcConfig& config, double isi, RangeSelect range, double dead_time_comp)
{
    if (!(dead_time_comp >= 0.0)) {
        throw DecodeError("dead-time compensation must be >= 0");
    }
    if (!(isi > dead_time_comp)) {
        std::ostringstream os;
        os << "interval shorter than dead time (isi = " << isi << " s, compensation = "
           << dead_time_comp << " s)";
        throw DecodeError(os.str());
    }
    return config.scale(range) * config.c1 * config.delta_v() / (isi - dead_time_comp);
}

}  // namespace cfc
