#pragma once

// Calibration procedures: EIT window width from a two-photon detuning scan
// and the AC Stark shift of the transparency centre under a CW signal.

#include <vector>

#include "xpm/model.hpp"

namespace xpm::spectro {

struct ScanCurve {
    std::vector<double> detuning;      // two-photon detuning, rad/s, strictly increasing
    std::vector<double> transmission;  // intensity transmission
    std::vector<double> phase;         // rad

    void validate() const;
};

// Steady-state probe transmission versus two-photon detuning. The probe
// one-photon detuning stays at fields.delta_p (the coupling frequency is
// swept), so the off-resonant absorption floor is flat.
ScanCurve transmission_scan(const MediumParams& medium, const FieldParams& fields,
                            double omega_s_cw, double delta_lo, double delta_hi,
                            std::size_t n_points);

// FWHM of the transparency feature measured in optical depth, -ln T, against
// the absorption floor far from two-photon resonance. The floor is the
// asymptote of a Lorentzian tail fitted to the outer samples, so it does not
// depend on how far the scan extends.
SpectralWindow window_fwhm(const ScanCurve& curve);

// Location of the transmission maximum by parabolic interpolation.
double transparency_center(const ScanCurve& curve);

// Displacement of the transparency centre caused by a CW signal of Rabi
// frequency omega_s_cw. Requires |delta_s| >= 5 omega_s_cw.
double stark_shift(const MediumParams& medium, const FieldParams& fields, double omega_s_cw);

// Weak-probe estimate of the window, 2 gamma + (Oc^2 + Op^2) / Gamma3.
double expected_window(const MediumParams& medium, const FieldParams& fields);

// Coupling Rabi frequency whose measured window equals target.delta_eit,
// refined by secant steps on Oc^2 starting from the weak-probe estimate.
double coupling_for_window(const MediumParams& medium, const FieldParams& fields,
                           const SpectralWindow& target);

}  // namespace xpm::spectro
