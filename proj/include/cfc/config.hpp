#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cfc {

/// Raised for invalid parameters, stimuli or experiment descriptions.
/// Always detected before any simulation work starts.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an event stream cannot be decoded (corrupt intervals,
/// mixed channels, unsorted rows).
class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Which sign of monitored current the P/N selector passes.
/// SinkN passes positive (inflowing) current, SourceP passes negative current.
enum class Polarity : std::uint8_t { SourceP, SinkN };

constexpr Polarity opposite(Polarity p) noexcept
{
    return p == Polarity::SinkN ? Polarity::SourceP : Polarity::SinkN;
}

/// Active integration path. Low integrates the unscaled current on C1,
/// High integrates current/beta on C2 = alpha * C1. Serialized as the SF
/// flag (0 = Low, 1 = High).
enum class RangeSelect : std::uint8_t { Low = 0, High = 1 };

constexpr int sf_bit(RangeSelect r) noexcept { return r == RangeSelect::High ? 1 : 0; }

std::string_view to_string(Polarity p) noexcept;
std::string_view to_string(RangeSelect r) noexcept;
Polarity parse_polarity(std::string_view s);

/// Programmable parameters of one converter channel. The defaults are the
/// fabricated chip's operating point: 100 fF / 1 pF capacitors, 1 V swing,
/// 10 nA range threshold, 0.1 us reset pulse, 5.5 pA leakage floor.
struct CfcConfig {
    double c1 = 100e-15;            // F
    double alpha = 10.0;            // C2 / C1
    double beta = 10.0;             // mirror divide ratio on the scaled path
    double v_ref_h = 1.5;           // V, integrator start
    double v_ref_l = 0.5;           // V, discriminator threshold
    double i_sw = 10e-9;            // A, range-detector threshold
    double hysteresis = 0.0;        // fraction of i_sw; High -> Low only below i_sw*(1-h)
    double t_rst = 0.1e-6;          // s, extended reset pulse
    double i_leak_floor = 5.5e-12;  // A, inputs at or below produce no charge
    double i_max_valid = 1e-6;      // A, documented validity bound
    Polarity polarity = Polarity::SinkN;
    std::uint32_t channel_address = 0;

    [[nodiscard]] double delta_v() const noexcept { return v_ref_h - v_ref_l; }
    [[nodiscard]] double c2() const noexcept { return alpha * c1; }

    /// Effective integration scale: 1 on Low, alpha*beta on High.
    [[nodiscard]] double scale(RangeSelect r) const noexcept
    {
        return r == RangeSelect::High ? alpha * beta : 1.0;
    }

    /// Charge-equivalent capacitance seen by the rectified input current.
    [[nodiscard]] double effective_capacitance(RangeSelect r) const noexcept
    {
        return scale(r) * c1;
    }

    /// Throws ConfigError naming the first violated invariant.
    void validate() const;

    /// Defaults with every non-ideality disabled (no reset pulse, no floor).
    static CfcConfig ideal();
};

}  // namespace cfc
