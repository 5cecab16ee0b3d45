#include "cfc/config.hpp"

#include <cmath>
#include <string>

namespace cfc {

std::string_view to_string(Polarity p) noexcept
{
    return p == Polarity::SinkN ? "SinkN" : "SourceP";
}

std::string_view to_string(RangeSelect r) noexcept
{
    return r == RangeSelect::High ? "High" : "Low";
}

Polarity parse_polarity(std::string_view s)
{
    if (s == "SinkN" || s == "sink_n" || s == "N") {
        return Polarity::SinkN;
    }
    if (s == "SourceP" || s == "source_p" || s == "P") {
        return Polarity::SourceP;
    }
    throw ConfigError("unknown polarity '" + std::string(s) + "' (expected SinkN or SourceP)");
}

namespace {

void require(bool ok, const char* what)
{
    if (!ok) {
        throw ConfigError(std::string("invalid CfcConfig: ") + what);
    }
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void CfcConfig::validate() const
{
    require(finite(c1) && c1 > 0.0, "c1 must be > 0");
    require(finite(alpha) && alpha > 1.0, "alpha must be > 1");
    require(finite(beta) && beta >= 1.0, "beta must be >= 1");
    require(finite(v_ref_h) && finite(v_ref_l) && v_ref_h > v_ref_l, "v_ref_h must exceed v_ref_l");
    require(finite(i_sw) && i_sw > 0.0, "i_sw must be > 0");
    require(finite(hysteresis) && hysteresis >= 0.0 && hysteresis < 1.0,
            "hysteresis must lie in [0, 1)");
    require(finite(t_rst) && t_rst >= 0.0, "t_rst must be >= 0");
    require(finite(i_leak_floor) && i_leak_floor >= 0.0, "i_leak_floor must be >= 0");
    require(finite(i_max_valid) && i_max_valid > 0.0, "i_max_valid must be > 0");
}

CfcConfig CfcConfig::ideal()
{
    CfcConfig c;
    c.t_rst = 0.0;
    c.i_leak_floor = 0.0;
    return c;
}

}  // namespace cfc
