#pragma once

// Scenario configuration, presets, engines, the sweep runner and file export.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xpm/detection.hpp"
#include "xpm/model.hpp"
#include "xpm/trace.hpp"

namespace xpm::harness {

enum class EngineKind { lti, bloch, bloch_slabs };
std::string engine_name(EngineKind kind);
EngineKind parse_engine(std::string_view name);

enum class SweepAxis { window, tau_s };
std::string axis_name(SweepAxis axis);
SweepAxis parse_axis(std::string_view name);

// Exactly one of peak_power and energy is set.
struct PulseSpec {
    double tau_s = 40e-9;
    std::optional<double> peak_power;  // W
    std::optional<double> energy;      // J
    double t0 = 0.0;

    SignalPulse resolve(double tau_s_value) const;
    void validate() const;
};

struct ScenarioConfig {
    std::string id;
    std::string description;
    std::string derived_from;
    EngineKind engine = EngineKind::lti;
    MediumParams medium;
    FieldParams fields;             // detunings; Rabi frequencies follow from the window
    double window_hz = 600e3;       // FWHM used when the sweep axis is tau_s
    PulseSpec pulse;                // tau_s used when the sweep axis is window
    SweepAxis sweep_axis = SweepAxis::window;
    std::vector<double> sweep_values;  // window FWHM in Hz, or tau_s in s
    bool detection_enabled = true;
    detect::DetectionParams detection;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    int n_slabs = 12;
    double probe_ratio = 0.05;      // Omega_p / Omega_c for the Bloch engines
    bool refine_coupling = true;    // match the measured window, not the weak-probe estimate

    void validate() const;
};

nlohmann::json to_json(const ScenarioConfig& config);
ScenarioConfig config_from_json(const nlohmann::json& j);

// FNV-1a 64 of the canonical JSON with output_dir removed, as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

struct PresetInfo {
    std::string id;
    std::string description;
    std::string derived_from;
};
std::vector<PresetInfo> list_presets();
ScenarioConfig preset(std::string_view id);
// A preset id or the path of a JSON config file.
ScenarioConfig load_config(const std::string& preset_or_path);

// Everything an engine needs for one sweep point.
struct PointSetup {
    MediumParams medium;
    FieldParams fields;
    SpectralWindow window;
    SignalPulse pulse;
    TimeGrid grid;
};
PointSetup setup_point(const ScenarioConfig& config, std::size_t index);
PhaseTrace run_engine(const ScenarioConfig& config, const PointSetup& setup);

struct Provenance {
    std::string scenario;
    std::string config_hash;
    std::string code_version;
    std::uint64_t seed = 0;
};
Provenance provenance_for(const ScenarioConfig& config);
std::string code_version();

struct ResultRow {
    double sweep_value = 0.0;
    double window = 0.0;   // rad/s
    double tau_s = 0.0;    // s, pulse RMS width
    double n_ph = 0.0;
    bool ok = false;
    std::string error;
    double peak_phase = 0.0, peak_phase_sigma = 0.0;
    double integrated_phase = 0.0, integrated_phase_sigma = 0.0;  // rad s
    double rise = 0.0, rise_sigma = 0.0;
    double fall = 0.0, fall_sigma = 0.0;
    double direct_fall = 0.0;   // 1/e crossing of the measured trace
    double t0 = 0.0, baseline = 0.0, residual_rms = 0.0;
    double clean_peak_phase = 0.0, clean_integrated_phase = 0.0;
    double model_fall = 0.0;      // response time of the medium from the window
    std::vector<std::string> notes;
};

struct ResultTable {
    ScenarioConfig config;
    Provenance provenance;
    std::vector<ResultRow> rows;

    bool all_ok() const;
};

struct PointOutput {
    ResultRow row;
    PhaseTrace clean;
    PhaseTrace measured;
};

// Engine, detection and fit for one sweep point. Module errors are caught and
// recorded in the row.
PointOutput run_point(const ScenarioConfig& config, std::size_t index);

struct ScenarioRun {
    ResultTable table;
    std::vector<PointOutput> points;
    std::vector<std::string> files;
};

// Runs every sweep point on the worker pool and, when write_files is set,
// writes traces, summary CSV/JSON and plot data under config.output_dir.
ScenarioRun run_scenario(const ScenarioConfig& config, bool write_files = true);

struct PlotData {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    double c_fit = 0.0;       // least-squares C in C (1/D)(1 - 2 gamma/D)
    double r_squared = 0.0;
};
PlotData export_plotdata(const ResultTable& table);

std::string summary_csv(const ResultTable& table);
nlohmann::json summary_json(const ResultTable& table);
std::string plot_csv(const PlotData& plot, const Provenance& provenance);

std::string trace_csv(const PhaseTrace& trace, const Provenance& provenance);
void write_text(const std::string& path, const std::string& content);
PhaseTrace read_trace_csv(const std::string& path);
PhaseTrace parse_trace_csv(std::string_view content);

}  // namespace xpm::harness
