#pragma once

// Shared domain types for the cross-phase-modulation simulator.
//
// Unit discipline: every rate, detuning and Rabi frequency is stored in rad/s.
// Ordinary frequencies (Hz) only appear at the edges (presets, CLI, exported
// tables) and are converted with to_angular()/to_hertz().

#include <cstddef>
#include <numbers>
#include <optional>

namespace xpm {

namespace constants {
inline constexpr double planck = 6.62607015e-34;        // J s
inline constexpr double speed_of_light = 299792458.0;   // m/s
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// 85Rb D2 line.
inline constexpr double rb_d2_wavelength = 780.24e-9;            // m
inline constexpr double rb_d2_linewidth = two_pi * 6.07e6;       // rad/s

// Signal Rabi frequency per square root of peak power: 0.8 uW gives
// 2 pi x 3 MHz on the |2> -> |4> transition. Absolute Rabi calibration of the
// experiment is unknown; this single constant sets the phase scale.
inline constexpr double signal_rabi_at_reference = two_pi * 3.0e6;  // rad/s
inline constexpr double signal_reference_power = 0.8e-6;            // W
}  // namespace constants

double signal_rabi_per_sqrt_watt();

struct MediumParams {
    double d0 = 3.0;                                  // on-resonance intensity OD
    double gamma = constants::two_pi * 75e3;          // ground dephasing, rad/s
    double Gamma3 = constants::rb_d2_linewidth;       // |3> decay, rad/s
    double Gamma4 = constants::rb_d2_linewidth;       // |4> decay, rad/s
    double branch3 = 0.5;                             // |3> -> |1> fraction

    void validate() const;
};

struct FieldParams {
    double omega_p = 0.0;    // probe Rabi, rad/s
    double omega_c = 0.0;    // coupling Rabi, rad/s
    double delta_p = 0.0;    // probe one-photon detuning, rad/s
    double delta_2ph = 0.0;  // two-photon detuning, rad/s
    double delta_s = constants::two_pi * 40e6;  // signal detuning from |2>-|4>, rad/s

    void validate() const;
    bool weak_probe() const { return omega_p < omega_c / 5.0; }
};

// Gaussian signal pulse; tau_s is the RMS width of the *intensity* envelope.
struct SignalPulse {
    double tau_s = 40e-9;
    double n_ph = 0.0;
    double t0 = 0.0;
    std::optional<double> peak_power;  // W
    double wavelength = constants::rb_d2_wavelength;

    static SignalPulse from_energy(double energy, double tau_s, double t0 = 0.0,
                                   double wavelength = constants::rb_d2_wavelength);
    static SignalPulse from_peak_power(double power, double tau_s, double t0 = 0.0,
                                       double wavelength = constants::rb_d2_wavelength);

    double photon_energy() const;
    double energy() const;
    // peak_power if set, otherwise the value implied by n_ph and tau_s.
    double resolved_peak_power() const;
    void validate() const;
};

struct SpectralWindow {
    double delta_eit = 0.0;  // FWHM, rad/s

    static SpectralWindow from_hz(double fwhm_hz);
    void validate() const;
};

struct TimeGrid {
    double t_start = 0.0;
    double dt = 1e-9;
    std::size_t n_samples = 2;

    // Uniform grid covering [t_start, t_end] with spacing no larger than dt_max.
    static TimeGrid spanning(double t_start, double t_end, double dt_max);

    double time(std::size_t i) const { return t_start + dt * static_cast<double>(i); }
    double t_end() const { return time(n_samples - 1); }
    double duration() const { return t_end() - t_start; }
    void validate() const;
};

double to_angular(double f_hz);
double to_hertz(double omega);

// Photons in a pulse of the given energy (J) at the given wavelength (m).
double photon_number(double energy, double wavelength);

// Signal bandwidth marker in Hz, 1/(4 pi tau_s).
double signal_bandwidth(double tau_s);

// Photon flux (1/s) of a Gaussian pulse; integrates to pulse.n_ph.
double gaussian_flux(double t, const SignalPulse& pulse);

}  // namespace xpm
