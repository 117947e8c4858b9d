#include "xpm/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "xpm/errors.hpp"
#include "xpm/trace.hpp"

namespace xpm {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidParameter(what);
}

}  // namespace

double signal_rabi_per_sqrt_watt() {
    return constants::signal_rabi_at_reference / std::sqrt(constants::signal_reference_power);
}

void MediumParams::validate() const {
    require(std::isfinite(d0) && d0 >= 0.0, "d0 must be >= 0");
    require(std::isfinite(gamma) && gamma >= 0.0, "gamma must be >= 0");
    require(std::isfinite(Gamma3) && Gamma3 > 0.0, "Gamma3 must be > 0");
    require(std::isfinite(Gamma4) && Gamma4 > 0.0, "Gamma4 must be > 0");
    require(branch3 >= 0.0 && branch3 <= 1.0, "branch3 must lie in [0, 1]");
}

void FieldParams::validate() const {
    require(std::isfinite(omega_p) && omega_p >= 0.0, "omega_p must be >= 0");
    require(std::isfinite(omega_c) && omega_c >= 0.0, "omega_c must be >= 0");
    require(std::isfinite(delta_p) && std::isfinite(delta_2ph) && std::isfinite(delta_s),
            "detunings must be finite");
}

SignalPulse SignalPulse::from_energy(double energy, double tau_s, double t0, double wavelength) {
    SignalPulse p;
    p.tau_s = tau_s;
    p.t0 = t0;
    p.wavelength = wavelength;
    p.n_ph = photon_number(energy, wavelength);
    p.validate();
    return p;
}

SignalPulse SignalPulse::from_peak_power(double power, double tau_s, double t0, double wavelength) {
    require(power >= 0.0, "peak power must be >= 0");
    require(tau_s > 0.0, "tau_s must be > 0");
    const double energy = power * tau_s * std::sqrt(2.0 * std::numbers::pi);
    SignalPulse p = from_energy(energy, tau_s, t0, wavelength);
    p.peak_power = power;
    return p;
}

double SignalPulse::photon_energy() const {
    return constants::planck * constants::speed_of_light / wavelength;
}

double SignalPulse::energy() const { return n_ph * photon_energy(); }

double SignalPulse::resolved_peak_power() const {
    if (peak_power) return *peak_power;
    return energy() / (tau_s * std::sqrt(2.0 * std::numbers::pi));
}

void SignalPulse::validate() const {
    require(std::isfinite(tau_s) && tau_s > 0.0, "tau_s must be > 0");
    require(std::isfinite(n_ph) && n_ph >= 0.0, "n_ph must be >= 0");
    require(std::isfinite(t0), "t0 must be finite");
    require(wavelength > 0.0, "wavelength must be > 0");
    if (peak_power) {
        require(*peak_power >= 0.0, "peak power must be >= 0");
        const double from_power = *peak_power * tau_s * std::sqrt(2.0 * std::numbers::pi);
        const double e = energy();
        require(std::abs(from_power - e) <= 1e-6 * std::max(e, from_power) + 1e-30,
                fmt::format("pulse energy {} J inconsistent with peak power {} W", e, *peak_power));
    }
}

SpectralWindow SpectralWindow::from_hz(double fwhm_hz) {
    SpectralWindow w{to_angular(fwhm_hz)};
    w.validate();
    return w;
}

void SpectralWindow::validate() const {
    require(std::isfinite(delta_eit) && delta_eit > 0.0, "EIT window must be > 0");
}

TimeGrid TimeGrid::spanning(double t_start, double t_end, double dt_max) {
    require(t_end > t_start, "grid end must exceed start");
    require(dt_max > 0.0, "grid spacing must be > 0");
    const auto intervals = static_cast<std::size_t>(std::ceil((t_end - t_start) / dt_max - 1e-9));
    TimeGrid g;
    g.t_start = t_start;
    g.n_samples = std::max<std::size_t>(intervals, 1) + 1;
    g.dt = (t_end - t_start) / static_cast<double>(g.n_samples - 1);
    return g;
}

void TimeGrid::validate() const {
    require(std::isfinite(t_start), "grid start must be finite");
    require(std::isfinite(dt) && dt > 0.0, "grid dt must be > 0");
    require(n_samples >= 2, "grid needs at least two samples");
}

double to_angular(double f_hz) { return constants::two_pi * f_hz; }

double to_hertz(double omega) { return omega / constants::two_pi; }

double photon_number(double energy, double wavelength) {
    if (!(wavelength > 0.0)) throw InvalidParameter("wavelength must be > 0");
    if (!(energy >= 0.0)) throw InvalidParameter("energy must be >= 0");
    return energy * wavelength / (constants::planck * constants::speed_of_light);
}

double signal_bandwidth(double tau_s) {
    if (!(tau_s > 0.0)) throw InvalidParameter("tau_s must be > 0");
    return 1.0 / (4.0 * std::numbers::pi * tau_s);
}

double gaussian_flux(double t, const SignalPulse& pulse) {
    const double u = (t - pulse.t0) / pulse.tau_s;
    return pulse.n_ph / (std::sqrt(2.0 * std::numbers::pi) * pulse.tau_s) * std::exp(-0.5 * u * u);
}

void PhaseTrace::validate() const {
    grid.validate();
    require(phase.size() == grid.n_samples, "phase samples do not match grid");
    require(stderr_rad.empty() || stderr_rad.size() == grid.n_samples,
            "stderr samples do not match grid");
    require(transmission.empty() || transmission.size() == grid.n_samples,
            "transmission samples do not match grid");
    for (double v : phase) require(std::isfinite(v), "non-finite phase sample");
}

double interpolate(const TimeGrid& grid, const std::vector<double>& values, double t) {
    const double x = (t - grid.t_start) / grid.dt;
    if (x <= 0.0) return values.front();
    const auto last = values.size() - 1;
    if (x >= static_cast<double>(last)) return values.back();
    const auto i = static_cast<std::size_t>(x);
    const double f = x - static_cast<double>(i);
    return values[i] + f * (values[i + 1] - values[i]);
}

}  // namespace xpm
