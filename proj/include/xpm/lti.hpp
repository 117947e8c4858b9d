#pragma once

// Linear time-invariant abstraction of EIT-enhanced cross-phase modulation.
//
// The probe phase is the output of a causal linear system driven by the signal
// photon flux. Its impulse response is h(t) = (phi0 / tau) exp(-t / tau) for
// t >= 0, so the time integral of the phase equals phi0 * n_ph.

#include <vector>

#include "xpm/model.hpp"
#include "xpm/trace.hpp"

namespace xpm::lti {

struct LtiKernel {
    double phi0 = 0.0;  // integrated phase per photon, rad s
    double tau = 1e-6;  // decay constant, s

    void validate() const;
};

struct XpmSummary {
    double peak_phase = 0.0;        // rad
    double peak_time = 0.0;         // s
    double integrated_phase = 0.0;  // rad s
    double rise_time = 0.0;         // s, 10-90 % rise / 2.563
    double fall_time = 0.0;         // s
};

// Ratio between the 10-90 % rise interval of an error-function edge and its
// Gaussian RMS width.
inline constexpr double kRiseIntervalPerSigma = 2.5631031310892007;

// Decay constant of the medium response:
//   [1 + d0/4 (1 - 2 gamma / Delta)] * 2 / Delta.
// Throws DomainError when Delta <= 2 gamma.
double response_time(const SpectralWindow& window, const MediumParams& medium);

// C / Delta * (1 - 2 gamma / Delta). Maximal at Delta = 4 gamma and negative
// below 2 gamma (unphysical regime, returned as is).
double integrated_phase_per_photon(const SpectralWindow& window, const MediumParams& medium,
                                   double coupling_const);

// Coupling constant C for a signal detuned by delta_s whose peak Rabi
// frequency scales as rabi_per_sqrt_watt * sqrt(P). Follows from the
// steady-state dispersion slope d0/Delta (1 - 2 gamma/Delta) multiplied by the
// Stark shift Omega_s^2 / (4 delta_s) per unit photon flux.
double dispersive_coupling_constant(const MediumParams& medium, double delta_s,
                                    double rabi_per_sqrt_watt, double wavelength);

LtiKernel make_kernel(const SpectralWindow& window, const MediumParams& medium,
                      double coupling_const);

// Closed-form response to a Gaussian pulse, evaluated without overflow for
// any tau_s / tau.
double phase_profile(double t, const LtiKernel& kernel, const SignalPulse& pulse);
PhaseTrace phase_profile(const TimeGrid& grid, const LtiKernel& kernel, const SignalPulse& pulse);

std::vector<double> sampled_flux(const TimeGrid& grid, const SignalPulse& pulse);

// Causal convolution of an arbitrary sampled flux (zero before the grid) with
// the exponential kernel. The flux is treated as piecewise cubic and each
// interval is integrated exactly against the exponential. A note is attached
// when dt exceeds 1/20 of the kernel or flux time scale.
PhaseTrace phase_profile_numeric(const LtiKernel& kernel, const TimeGrid& grid,
                                 const std::vector<double>& flux);

XpmSummary summarize(const LtiKernel& kernel, const SignalPulse& pulse);

}  // namespace xpm::lti
