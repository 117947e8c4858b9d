#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "xpm/errors.hpp"
#include "xpm/harness.hpp"

namespace xpm::harness {

using nlohmann::json;

std::string engine_name(EngineKind kind) {
    switch (kind) {
        case EngineKind::lti: return "lti";
        case EngineKind::bloch: return "bloch";
        case EngineKind::bloch_slabs: return "bloch-slabs";
    }
    return "lti";
}

EngineKind parse_engine(std::string_view name) {
    if (name == "lti") return EngineKind::lti;
    if (name == "bloch") return EngineKind::bloch;
    if (name == "bloch-slabs") return EngineKind::bloch_slabs;
    throw InvalidParameter(fmt::format("unknown engine '{}' (lti, bloch, bloch-slabs)", name));
}

std::string axis_name(SweepAxis axis) { return axis == SweepAxis::window ? "window" : "tau_s"; }

SweepAxis parse_axis(std::string_view name) {
    if (name == "window") return SweepAxis::window;
    if (name == "tau_s") return SweepAxis::tau_s;
    throw InvalidParameter(fmt::format("unknown sweep axis '{}' (window, tau_s)", name));
}

SignalPulse PulseSpec::resolve(double tau_s_value) const {
    validate();
    if (peak_power) return SignalPulse::from_peak_power(*peak_power, tau_s_value, t0);
    return SignalPulse::from_energy(*energy, tau_s_value, t0);
}

void PulseSpec::validate() const {
    if (peak_power.has_value() == energy.has_value())
        throw InvalidParameter("pulse needs exactly one of peak_power and energy");
    if (!(tau_s > 0.0)) throw InvalidParameter("pulse tau_s must be > 0");
    if (peak_power && !(*peak_power >= 0.0)) throw InvalidParameter("peak_power must be >= 0");
    if (energy && !(*energy >= 0.0)) throw InvalidParameter("energy must be >= 0");
}

void ScenarioConfig::validate() const {
    if (id.empty()) throw InvalidParameter("scenario id is empty");
    medium.validate();
    fields.validate();
    pulse.validate();
    if (sweep_values.empty()) throw InvalidParameter("sweep has no values");
    for (double v : sweep_values)
        if (!(std::isfinite(v) && v > 0.0)) throw InvalidParameter("sweep values must be > 0");
    if (sweep_axis == SweepAxis::tau_s && !(window_hz > 0.0))
        throw InvalidParameter("window_hz must be > 0");
    if (detection_enabled) detection.validate();
    if (n_slabs < 1) throw InvalidParameter("n_slabs must be >= 1");
    if (!(probe_ratio > 0.0 && probe_ratio < 0.2))
        throw InvalidParameter("probe_ratio must lie in (0, 0.2) for a weak probe");
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

template <class T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json to_json(const ScenarioConfig& c) {
    json j;
    j["id"] = c.id;
    j["description"] = c.description;
    j["derived_from"] = c.derived_from;
    j["engine"] = engine_name(c.engine);
    j["medium"] = {{"d0", c.medium.d0},
                   {"gamma", c.medium.gamma},
                   {"Gamma3", c.medium.Gamma3},
                   {"Gamma4", c.medium.Gamma4},
                   {"branch3", c.medium.branch3}};
    j["fields"] = {{"omega_p", c.fields.omega_p},
                   {"omega_c", c.fields.omega_c},
                   {"delta_p", c.fields.delta_p},
                   {"delta_2ph", c.fields.delta_2ph},
                   {"delta_s", c.fields.delta_s}};
    j["window_hz"] = c.window_hz;
    j["pulse"] = {{"tau_s", c.pulse.tau_s},
                  {"peak_power", optional_number(c.pulse.peak_power)},
                  {"energy", optional_number(c.pulse.energy)},
                  {"t0", c.pulse.t0}};
    j["sweep_axis"] = axis_name(c.sweep_axis);
    j["sweep_values"] = c.sweep_values;
    j["detection_enabled"] = c.detection_enabled;
    j["detection"] = {{"f_beat", c.detection.f_beat},
                      {"sampling_period", c.detection.sampling_period},
                      {"n_shots", c.detection.n_shots},
                      {"atom_fluct_rms", c.detection.atom_fluct_rms},
                      {"detector_noise_rms", c.detection.detector_noise_rms},
                      {"reference_amplitude", c.detection.reference_amplitude},
                      {"probe_amplitude", c.detection.probe_amplitude}};
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["n_slabs"] = c.n_slabs;
    j["probe_ratio"] = c.probe_ratio;
    j["refine_coupling"] = c.refine_coupling;
    return j;
}

ScenarioConfig config_from_json(const json& j) {
    ScenarioConfig c;
    try {
        c.id = j.at("id").get<std::string>();
        read_if(j, "description", c.description);
        read_if(j, "derived_from", c.derived_from);
        if (j.contains("engine")) c.engine = parse_engine(j.at("engine").get<std::string>());
        if (j.contains("medium")) {
            const auto& m = j.at("medium");
            read_if(m, "d0", c.medium.d0);
            read_if(m, "gamma", c.medium.gamma);
            read_if(m, "Gamma3", c.medium.Gamma3);
            read_if(m, "Gamma4", c.medium.Gamma4);
            read_if(m, "branch3", c.medium.branch3);
        }
        if (j.contains("fields")) {
            const auto& f = j.at("fields");
            read_if(f, "omega_p", c.fields.omega_p);
            read_if(f, "omega_c", c.fields.omega_c);
            read_if(f, "delta_p", c.fields.delta_p);
            read_if(f, "delta_2ph", c.fields.delta_2ph);
            read_if(f, "delta_s", c.fields.delta_s);
        }
        read_if(j, "window_hz", c.window_hz);
        if (j.contains("pulse")) {
            const auto& p = j.at("pulse");
            read_if(p, "tau_s", c.pulse.tau_s);
            read_if(p, "t0", c.pulse.t0);
            c.pulse.peak_power = read_optional(p, "peak_power");
            c.pulse.energy = read_optional(p, "energy");
        }
        if (j.contains("sweep_axis")) c.sweep_axis = parse_axis(j.at("sweep_axis").get<std::string>());
        read_if(j, "sweep_values", c.sweep_values);
        read_if(j, "detection_enabled", c.detection_enabled);
        if (j.contains("detection")) {
            const auto& d = j.at("detection");
            read_if(d, "f_beat", c.detection.f_beat);
            read_if(d, "sampling_period", c.detection.sampling_period);
            read_if(d, "n_shots", c.detection.n_shots);
            read_if(d, "atom_fluct_rms", c.detection.atom_fluct_rms);
            read_if(d, "detector_noise_rms", c.detection.detector_noise_rms);
            read_if(d, "reference_amplitude", c.detection.reference_amplitude);
            read_if(d, "probe_amplitude", c.detection.probe_amplitude);
        }
        read_if(j, "seed", c.seed);
        read_if(j, "output_dir", c.output_dir);
        read_if(j, "n_slabs", c.n_slabs);
        read_if(j, "probe_ratio", c.probe_ratio);
        read_if(j, "refine_coupling", c.refine_coupling);
    } catch (const json::exception& e) {
        throw InvalidParameter(fmt::format("bad scenario config: {}", e.what()));
    }
    c.detection.rng_seed = c.seed;
    c.validate();
    return c;
}

std::string config_hash(const ScenarioConfig& config) {
    auto j = to_json(config);
    j.erase("output_dir");
    const std::string text = j.dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return fmt::format("{:016x}", h);
}

ScenarioConfig load_config(const std::string& preset_or_path) {
    for (const auto& info : list_presets())
        if (info.id == preset_or_path) return preset(preset_or_path);
    std::ifstream in(preset_or_path);
    if (!in) throw InvalidParameter(fmt::format("'{}' is neither a preset nor a readable file",
                                                preset_or_path));
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidParameter(fmt::format("cannot parse {}: {}", preset_or_path, e.what()));
    }
    return config_from_json(j);
}

}  // namespace xpm::harness
