#include "xpm/lti.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>

#include "xpm/errors.hpp"
#include "xpm/special.hpp"

namespace xpm::lti {

void LtiKernel::validate() const {
    if (!(std::isfinite(tau) && tau > 0.0)) throw InvalidParameter("kernel tau must be > 0");
    if (!std::isfinite(phi0)) throw InvalidParameter("kernel phi0 must be finite");
}

double response_time(const SpectralWindow& window, const MediumParams& medium) {
    window.validate();
    const double delta = window.delta_eit;
    if (delta <= 2.0 * medium.gamma)
        throw DomainError(fmt::format("window narrower than dephasing limit ({} <= 2 x {} rad/s)",
                                      delta, medium.gamma));
    return (1.0 + medium.d0 / 4.0 * (1.0 - 2.0 * medium.gamma / delta)) * 2.0 / delta;
}

double integrated_phase_per_photon(const SpectralWindow& window, const MediumParams& medium,
                                   double coupling_const) {
    window.validate();
    const double delta = window.delta_eit;
    return coupling_const / delta * (1.0 - 2.0 * medium.gamma / delta);
}

double dispersive_coupling_constant(const MediumParams& medium, double delta_s,
                                    double rabi_per_sqrt_watt, double wavelength) {
    if (delta_s == 0.0) throw InvalidParameter("signal detuning must be nonzero");
    const double photon_energy = constants::planck * constants::speed_of_light / wavelength;
    // Stark shift per unit photon flux, times the DC gain numerator d0.
    return medium.d0 * rabi_per_sqrt_watt * rabi_per_sqrt_watt * photon_energy / (4.0 * delta_s);
}

LtiKernel make_kernel(const SpectralWindow& window, const MediumParams& medium,
                      double coupling_const) {
    return LtiKernel{integrated_phase_per_photon(window, medium, coupling_const),
                     response_time(window, medium)};
}

double phase_profile(double t, const LtiKernel& kernel, const SignalPulse& pulse) {
    if (pulse.n_ph == 0.0 || kernel.phi0 == 0.0) return 0.0;
    const double u = t - pulse.t0;
    const double ts = pulse.tau_s;
    const double tau = kernel.tau;
    const double scale = kernel.phi0 * pulse.n_ph / (2.0 * tau);
    const double x = u / (std::numbers::sqrt2 * ts) - ts / (std::numbers::sqrt2 * tau);
    if (x < 0.0) {
        // 1 + erf(x) = erfcx(-x) exp(-x^2) and the exponents combine to -u^2/(2 ts^2).
        return scale * std::exp(-0.5 * u * u / (ts * ts)) * erfcx(-x);
    }
    // Here u >= ts^2/tau, so the exponent is at most -ts^2/(2 tau^2).
    const double exponent = 0.5 * ts * ts / (tau * tau) - u / tau;
    return scale * std::exp(exponent) * (1.0 + std::erf(x));
}

PhaseTrace phase_profile(const TimeGrid& grid, const LtiKernel& kernel, const SignalPulse& pulse) {
    grid.validate();
    PhaseTrace out;
    out.grid = grid;
    out.phase.resize(grid.n_samples);
    for (std::size_t i = 0; i < grid.n_samples; ++i)
        out.phase[i] = phase_profile(grid.time(i), kernel, pulse);
    return out;
}

std::vector<double> sampled_flux(const TimeGrid& grid, const SignalPulse& pulse) {
    std::vector<double> flux(grid.n_samples);
    for (std::size_t i = 0; i < grid.n_samples; ++i) flux[i] = gaussian_flux(grid.time(i), pulse);
    return flux;
}

namespace {

// Weights w[m] such that the integral over one step of h(dt - s) f(s) equals
// sum_m w[m] f(node_m), for f the cubic through nodes at offsets
// (first + m) * dt, m = 0..3, relative to the interval start.
std::array<double, 4> cubic_step_weights(const LtiKernel& kernel, double dt, int first) {
    std::array<double, 4> nodes{};
    for (int m = 0; m < 4; ++m) nodes[m] = (first + m) * dt;
    std::array<double, 4> w{};
    for (int m = 0; m < 4; ++m) {
        auto integrand = [&](double s) {
            double basis = 1.0;
            for (int k = 0; k < 4; ++k)
                if (k != m) basis *= (s - nodes[k]) / (nodes[m] - nodes[k]);
            return kernel.phi0 / kernel.tau * std::exp(-(dt - s) / kernel.tau) * basis;
        };
        w[m] = boost::math::quadrature::gauss<double, 10>::integrate(integrand, 0.0, dt);
    }
    return w;
}

std::array<double, 2> linear_step_weights(const LtiKernel& kernel, double dt) {
    std::array<double, 2> w{};
    for (int m = 0; m < 2; ++m) {
        auto integrand = [&](double s) {
            const double basis = m == 0 ? 1.0 - s / dt : s / dt;
            return kernel.phi0 / kernel.tau * std::exp(-(dt - s) / kernel.tau) * basis;
        };
        w[m] = boost::math::quadrature::gauss<double, 10>::integrate(integrand, 0.0, dt);
    }
    return w;
}

double flux_rms_width(const TimeGrid& grid, const std::vector<double>& flux) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < flux.size(); ++i) {
        const double t = grid.time(i);
        const double f = std::abs(flux[i]);
        s0 += f;
        s1 += f * t;
        s2 += f * t * t;
    }
    if (s0 == 0.0) return std::numeric_limits<double>::infinity();
    const double mean = s1 / s0;
    return std::sqrt(std::max(s2 / s0 - mean * mean, 0.0));
}

}  // namespace

PhaseTrace phase_profile_numeric(const LtiKernel& kernel, const TimeGrid& grid,
                                 const std::vector<double>& flux) {
    kernel.validate();
    grid.validate();
    if (flux.size() != grid.n_samples) throw InvalidParameter("flux samples do not match grid");

    PhaseTrace out;
    out.grid = grid;
    out.phase.assign(grid.n_samples, 0.0);

    const double dt = grid.dt;
    const double time_scale = std::min(kernel.tau, flux_rms_width(grid, flux));
    if (dt > time_scale / 20.0)
        out.notes.push_back(fmt::format(
            "accuracy warning: dt = {:.4g} s exceeds 1/20 of the shortest time scale {:.4g} s", dt,
            time_scale));

    const double decay = std::exp(-dt / kernel.tau);
    const std::size_t n = grid.n_samples;
    if (n < 4) {
        const auto w = linear_step_weights(kernel, dt);
        for (std::size_t i = 0; i + 1 < n; ++i)
            out.phase[i + 1] = decay * out.phase[i] + w[0] * flux[i] + w[1] * flux[i + 1];
        return out;
    }

    const auto w_first = cubic_step_weights(kernel, dt, 0);
    const auto w_inner = cubic_step_weights(kernel, dt, -1);
    const auto w_last = cubic_step_weights(kernel, dt, -2);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::array<double, 4>* w = &w_inner;
        std::size_t j = i - 1;
        if (i == 0) {
            w = &w_first;
            j = 0;
        } else if (i + 2 >= n) {
            w = &w_last;
            j = n - 4;
        }
        double drive = 0.0;
        for (int m = 0; m < 4; ++m) drive += (*w)[m] * flux[j + m];
        out.phase[i + 1] = decay * out.phase[i] + drive;
    }
    return out;
}

XpmSummary summarize(const LtiKernel& kernel, const SignalPulse& pulse) {
    kernel.validate();
    pulse.validate();
    XpmSummary s;
    s.fall_time = kernel.tau;
    if (pulse.n_ph == 0.0 || kernel.phi0 == 0.0) return s;

    s.integrated_phase = kernel.phi0 * pulse.n_ph;
    const auto grid = TimeGrid::spanning(pulse.t0 - 5.0 * pulse.tau_s,
                                         pulse.t0 + 10.0 * kernel.tau, 1.0);
    TimeGrid dense = grid;
    dense.n_samples = 2000;
    dense.dt = (grid.t_end() - grid.t_start) / 1999.0;
    const auto trace = phase_profile(dense, kernel, pulse);

    const auto sign = kernel.phi0 > 0.0 ? 1.0 : -1.0;
    std::size_t imax = 0;
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (sign * trace.phase[i] > sign * trace.phase[imax]) imax = i;

    // Golden-section refinement on the bracketing samples.
    auto f = [&](double t) { return sign * phase_profile(t, kernel, pulse); };
    double a = dense.time(imax == 0 ? 0 : imax - 1);
    double b = dense.time(std::min(imax + 1, dense.n_samples - 1));
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 80 && (b - a) > 1e-15 * std::max(std::abs(a), std::abs(b)) + 1e-20; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    s.peak_time = 0.5 * (a + b);
    s.peak_phase = phase_profile(s.peak_time, kernel, pulse);

    // 10-90 % rise on the leading edge.
    auto crossing = [&](double level) {
        for (std::size_t i = 1; i <= imax; ++i) {
            const double y0 = sign * trace.phase[i - 1], y1 = sign * trace.phase[i];
            if (y0 < level && y1 >= level)
                return dense.time(i - 1) + dense.dt * (level - y0) / (y1 - y0);
        }
        return dense.t_start;
    };
    const double peak = sign * s.peak_phase;
    s.rise_time = (crossing(0.9 * peak) - crossing(0.1 * peak)) / kRiseIntervalPerSigma;
    return s;
}

}  // namespace xpm::lti
