#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include <fmt/format.h>

#include "xpm/errors.hpp"
#include "xpm/fit.hpp"
#include "xpm/harness.hpp"
#include "xpm/lti.hpp"
#include "xpm/parallel.hpp"

#ifndef XPM_VERSION
#define XPM_VERSION "unknown"
#endif

namespace xpm::harness {

std::string code_version() { return XPM_VERSION; }

Provenance provenance_for(const ScenarioConfig& config) {
    return Provenance{config.id, config_hash(config), code_version(), config.seed};
}

bool ResultTable::all_ok() const {
    return std::all_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.ok; });
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void clean_metrics(const PhaseTrace& clean, ResultRow& row) {
    const double base = clean.phase.front();
    double peak = 0.0, area = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const double v = clean.phase[i] - base;
        if (std::abs(v) > std::abs(peak)) peak = v;
        if (i > 0) area += 0.5 * clean.grid.dt * (v + clean.phase[i - 1] - base);
    }
    row.clean_peak_phase = peak;
    row.clean_integrated_phase = area;
}

}  // namespace

PointOutput run_point(const ScenarioConfig& config, std::size_t index) {
    PointOutput out;
    ResultRow& row = out.row;
    row.sweep_value = config.sweep_values.at(index);
    try {
        const auto setup = setup_point(config, index);
        row.window = setup.window.delta_eit;
        row.tau_s = setup.pulse.tau_s;
        row.n_ph = setup.pulse.n_ph;
        row.model_fall = lti::response_time(setup.window, setup.medium);

        out.clean = run_engine(config, setup);
        clean_metrics(out.clean, row);

        if (config.detection_enabled) {
            auto params = config.detection;
            params.rng_seed = config.seed + (static_cast<std::uint64_t>(index) << 32);
            out.measured = detect::run_shots(out.clean, params);
        } else {
            out.measured = out.clean;
            out.measured.transmission.clear();
        }
        row.notes = out.measured.notes;

        const auto fit = fit::fit_phase_profile(out.measured);
        for (const auto& w : fit.warnings) row.notes.push_back(w);
        row.t0 = fit.t0;
        row.baseline = fit.baseline;
        row.residual_rms = fit.residual_rms;
        row.integrated_phase = fit.amplitude;
        row.integrated_phase_sigma = fit.sigma(fit::kAmplitude);
        const auto rf = fit::rise_fall_times(fit);
        row.rise = rf.rise;
        row.rise_sigma = rf.rise_sigma;
        row.fall = rf.fall;
        row.fall_sigma = rf.fall_sigma;

        SignalPulse unit;
        unit.tau_s = fit.tau_s;
        unit.n_ph = 1.0;
        unit.t0 = fit.t0;
        const auto summary = lti::summarize(lti::LtiKernel{fit.amplitude, fit.tau}, unit);
        row.peak_phase = summary.peak_phase;
        row.peak_phase_sigma = fit.amplitude != 0.0
                                   ? std::abs(summary.peak_phase / fit.amplitude) * row.integrated_phase_sigma
                                   : 0.0;
        try {
            row.direct_fall = fit::direct_decay_time(out.measured, fit.baseline);
        } catch (const ShapeError& e) {
            row.direct_fall = kNaN;
            row.notes.push_back(e.what());
        }
        row.ok = true;
    } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
    }
    return out;
}

ScenarioRun run_scenario(const ScenarioConfig& config, bool write_files) {
    config.validate();
    ScenarioRun run;
    run.table.config = config;
    run.table.provenance = provenance_for(config);
    const std::size_t n = config.sweep_values.size();
    run.points.resize(n);
    parallel_for(n, [&](std::size_t i) { run.points[i] = run_point(config, i); });
    for (const auto& p : run.points) run.table.rows.push_back(p.row);

    if (write_files) {
        namespace fs = std::filesystem;
        const fs::path dir(config.output_dir);
        fs::create_directories(dir);
        auto emit = [&](const std::string& name, const std::string& text) {
            const auto path = (dir / name).string();
            write_text(path, text);
            run.files.push_back(path);
        };
        for (std::size_t i = 0; i < n; ++i) {
            if (run.points[i].measured.size() == 0) continue;
            emit(fmt::format("{}_trace_{:02d}.csv", config.id, i),
                 trace_csv(run.points[i].measured, run.table.provenance));
        }
        emit(config.id + "_summary.csv", summary_csv(run.table));
        emit(config.id + "_summary.json", summary_json(run.table).dump(2) + "\n");
        emit(config.id + "_plot.csv", plot_csv(export_plotdata(run.table), run.table.provenance));
    }
    return run;
}

}  // namespace xpm::harness
