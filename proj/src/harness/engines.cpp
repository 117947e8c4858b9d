#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "xpm/bloch.hpp"
#include "xpm/errors.hpp"
#include "xpm/harness.hpp"
#include "xpm/lti.hpp"
#include "xpm/spectroscopy.hpp"

namespace xpm::harness {

namespace {

constexpr double kOutputStep = 1e-9;

PhaseTrace decimate(const PhaseTrace& in, double target_dt) {
    const auto k = static_cast<std::size_t>(std::max(1.0, std::floor(target_dt / in.grid.dt)));
    if (k == 1) return in;
    PhaseTrace out;
    out.grid = TimeGrid{in.grid.t_start, in.grid.dt * static_cast<double>(k), (in.size() - 1) / k + 1};
    out.notes = in.notes;
    for (std::size_t i = 0; i < in.size(); i += k) {
        out.phase.push_back(in.phase[i]);
        if (in.has_transmission()) out.transmission.push_back(in.transmission[i]);
        if (in.has_stderr()) out.stderr_rad.push_back(in.stderr_rad[i]);
    }
    return out;
}

void note_diagnostics(PhaseTrace& trace, const bloch::StateDiagnostics& d) {
    if (!d.physical())
        trace.notes.push_back(fmt::format(
            "state diagnostics: trace error {:.3g}, hermiticity error {:.3g}, min eigenvalue {:.3g}, "
            "{} positivity violations",
            d.max_trace_error, d.max_hermiticity_error, d.min_eigenvalue, d.positivity_violations));
}

}  // namespace

PointSetup setup_point(const ScenarioConfig& config, std::size_t index) {
    if (index >= config.sweep_values.size()) throw InvalidParameter("sweep index out of range");
    const double value = config.sweep_values[index];
    const double window_hz = config.sweep_axis == SweepAxis::window ? value : config.window_hz;
    const double tau_s = config.sweep_axis == SweepAxis::tau_s ? value : config.pulse.tau_s;

    PointSetup s;
    s.medium = config.medium;
    s.window = SpectralWindow::from_hz(window_hz);
    s.pulse = config.pulse.resolve(tau_s);
    s.fields = config.fields;

    const double tau = lti::response_time(s.window, s.medium);
    const double ratio2 = config.probe_ratio * config.probe_ratio;
    const double oc0 = std::sqrt(s.medium.Gamma3 * (s.window.delta_eit - 2.0 * s.medium.gamma) /
                                 (1.0 + ratio2));
    s.fields.omega_c = oc0;
    s.fields.omega_p = config.probe_ratio * oc0;
    if (config.engine != EngineKind::lti && config.refine_coupling)
        s.fields.omega_c = spectro::coupling_for_window(s.medium, s.fields, s.window);

    const double t0 = s.pulse.t0;
    const double before = std::max(0.5e-6, 6.0 * tau_s + 0.4e-6);
    const double after = std::max({8.0 * tau, 10.0 * tau_s, 2.5e-6});
    double dt = std::min(kOutputStep, tau_s / 20.0);
    if (config.engine != EngineKind::lti)
        dt = std::min(dt, 0.999 * bloch::max_grid_step(s.medium, s.fields));
    s.grid = TimeGrid::spanning(t0 - before, t0 + after, dt);
    return s;
}

PhaseTrace run_engine(const ScenarioConfig& config, const PointSetup& s) {
    const double kappa = signal_rabi_per_sqrt_watt();
    switch (config.engine) {
        case EngineKind::lti: {
            const double c = lti::dispersive_coupling_constant(s.medium, s.fields.delta_s, kappa,
                                                               s.pulse.wavelength);
            return lti::phase_profile(s.grid, lti::make_kernel(s.window, s.medium, c), s.pulse);
        }
        case EngineKind::bloch: {
            const auto rho0 = bloch::steady_state(s.medium, s.fields, 0.0);
            const auto coh = bloch::evolve(s.medium, s.fields, s.pulse, s.grid, rho0, kappa);
            const auto calib = bloch::calibrate_thin_medium(s.medium, s.fields);
            auto trace = bloch::probe_response(coh, calib, s.fields);
            note_diagnostics(trace, coh.diagnostics);
            return decimate(trace, kOutputStep);
        }
        case EngineKind::bloch_slabs: {
            auto result = bloch::propagate_slabs(s.medium, s.fields, s.pulse, s.grid, config.n_slabs,
                                                 kappa);
            note_diagnostics(result.trace, result.diagnostics);
            return decimate(result.trace, kOutputStep);
        }
    }
    throw InvalidParameter("unknown engine");
}

}  // namespace xpm::harness
