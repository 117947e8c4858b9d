#include <fmt/format.h>

#include "xpm/errors.hpp"
#include "xpm/harness.hpp"

namespace xpm::harness {

namespace {

ScenarioConfig window_sweep_base() {
    ScenarioConfig c;
    c.engine = EngineKind::lti;
    c.medium = MediumParams{};
    c.fields = FieldParams{};
    c.sweep_axis = SweepAxis::window;
    c.detection = detect::DetectionParams{};
    c.detection.rng_seed = c.seed;
    return c;
}

ScenarioConfig fig2() {
    auto c = window_sweep_base();
    c.id = "fig2";
    c.description = "XPM traces for a 40 ns, 0.8 uW signal at OD 3 across EIT windows 0.38-4 MHz";
    c.medium.d0 = 3.0;
    c.pulse.tau_s = 40e-9;
    c.pulse.peak_power = 0.8e-6;
    c.sweep_values = {0.38e6, 0.6e6, 1.0e6, 2.0e6, 4.0e6};
    return c;
}

ScenarioConfig fig3() {
    auto c = fig2();
    c.id = "fig3";
    c.derived_from = "fig2";
    c.description = "Peak and integrated phase versus EIT window, from the fig2 traces";
    return c;
}

ScenarioConfig fig4() {
    auto c = window_sweep_base();
    c.id = "fig4";
    c.description = "Rise and fall times for a 140 ns, 160 nW signal at OD 1.8 across EIT windows";
    c.medium.d0 = 1.8;
    c.pulse.tau_s = 140e-9;
    c.pulse.peak_power = 160e-9;
    c.sweep_values = {0.2e6, 0.3e6, 0.5e6, 1.0e6, 2.0e6};
    return c;
}

ScenarioConfig fig5() {
    auto c = window_sweep_base();
    c.id = "fig5";
    c.description = "XPM traces at a 600 kHz window and OD 3 for 75 fJ pulses of 20-255 ns";
    c.medium.d0 = 3.0;
    c.window_hz = 600e3;
    c.pulse.tau_s = 40e-9;
    c.pulse.energy = 75e-15;
    c.sweep_axis = SweepAxis::tau_s;
    c.sweep_values = {20e-9, 40e-9, 70e-9, 140e-9, 255e-9};
    return c;
}

ScenarioConfig fig6() {
    auto c = fig5();
    c.id = "fig6";
    c.derived_from = "fig5";
    c.description = "Rise and fall times versus signal duration, from the fig5 traces";
    return c;
}

ScenarioConfig validation() {
    auto c = fig2();
    c.id = "validation-lti-vs-bloch";
    c.description = "Weak-signal cross-check: sliced Bloch propagation against the LTI profile";
    c.engine = EngineKind::bloch_slabs;
    c.pulse.peak_power = 0.2e-6;
    c.n_slabs = 12;
    c.detection_enabled = false;
    return c;
}

}  // namespace

std::vector<PresetInfo> list_presets() {
    std::vector<PresetInfo> out;
    for (const auto& c : {fig2(), fig3(), fig4(), fig5(), fig6(), validation()})
        out.push_back(PresetInfo{c.id, c.description, c.derived_from});
    return out;
}

ScenarioConfig preset(std::string_view id) {
    if (id == "fig2") return fig2();
    if (id == "fig3") return fig3();
    if (id == "fig4") return fig4();
    if (id == "fig5") return fig5();
    if (id == "fig6") return fig6();
    if (id == "validation-lti-vs-bloch") return validation();
    throw InvalidParameter(fmt::format("unknown preset '{}'", id));
}

}  // namespace xpm::harness
