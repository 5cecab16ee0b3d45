#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "cfc/decoder.hpp"
#include "cfc/signal.hpp"

// Ground-truth current generators. All are pure functions of their
// parameters (and seed, for Poisson trains).

namespace cfc {

CurrentSignal constant(double i, double duration);

struct Staircase {
    CurrentSignal signal;
    SweepSchedule schedule;
};

/// `steps` equal-dwell levels start + k*(stop-start)/(steps-1), starting at t = 0.
Staircase staircase_sweep(double start, double stop, int steps, double dwell);

struct RangePreset {
    std::string_view name;
    double start;
    double stop;
};

/// The five bias-generator ranges swept on the test chip.
inline constexpr std::array<RangePreset, 5> kSweepRanges{{
    {"range1", 3.2e-12, 820e-12},
    {"range2", 26e-12, 6.5e-9},
    {"range3", 196e-12, 50e-9},
    {"range4", 1.57e-9, 4e-6},
    {"range5", 12.5e-9, 3.2e-6},
}};

/// Behavioural subthreshold p-FET: current grows one decade per `slope`
/// volts of gate drop below vg_ref, clipped at i_sat.
struct PfetParams {
    double i0 = 1e-12;     // A at vg = vg_ref
    double slope = 0.09;   // V per decade
    double i_sat = 5e-6;   // A
    double vg_ref = 1.5;   // V
};

double pfet_current(const PfetParams& params, double vg);

/// Gate voltage ramps linearly from vg_start to vg_stop over `duration`.
/// The exponential is emitted as linear segments no wider than
/// `max_dv` volts (default: a thousandth of a decade).
CurrentSignal pfet_gate_sweep(double vg_start, double vg_stop, double duration,
                              const PfetParams& params, double max_dv = 0.0);

/// First-order synapse: tau di/dt = -(i - i_base) between spikes, i += w at
/// each spike. Decays are emitted as chords every tau*resolution seconds.
CurrentSignal dpi_synapse(const SpikeTrain& spikes, double tau, double weight_jump,
                          double i_base, double duration, double resolution = 0.01);

// Illustrative defaults (Brette-Gerstner regular-spiking cell with subthreshold
// adaptation a = 0, so a resting cell relaxes without undershoot), not chip values.
struct AdexParams {
    double c_m = 281e-12;      // F
    double g_l = 30e-9;        // S
    double e_l = -70.6e-3;     // V
    double v_t = -50.4e-3;     // V
    double delta_t = 2e-3;     // V
    double a = 0.0;            // S
    double tau_w = 144e-3;     // s
    double b = 0.0805e-9;      // A
    double v_reset = -70.6e-3; // V
    double v_peak = -40.4e-3;  // V, v_t + 5 delta_t

    void validate() const;
    /// Constant input at which the resting fixed point disappears.
    [[nodiscard]] double rheobase() const;
};

struct AdexOptions {
    double dt = 10e-6;
    double proxy_offset = 20e-12;  // monitored current at rest
    double v0 = std::numeric_limits<double>::quiet_NaN();  // NaN: start at e_l
    double w0 = 0.0;
};

struct AdexResult {
    CurrentSignal membrane;  // non-negative proxy current
    SpikeTrain spikes;
    std::vector<double> v;   // membrane voltage on the integration grid
};

/// Fixed-step RK4 integration of the adaptive exponential neuron.
AdexResult adex_neuron(const CurrentSignal& i_in, const AdexParams& params, double duration,
                       const AdexOptions& options = {});

SpikeTrain regular_train(double rate, double duration);
SpikeTrain poisson_train(double rate, double duration, std::uint64_t seed);

}  // namespace cfc
