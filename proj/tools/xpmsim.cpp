// Command-line front end: run presets or config files, list presets, fit a
// trace file, and run the LTI-versus-Bloch cross-check.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "xpm/errors.hpp"
#include "xpm/fit.hpp"
#include "xpm/harness.hpp"

using namespace xpm;

namespace {

int cmd_list() {
    for (const auto& p : harness::list_presets()) {
        fmt::print("{:<26} {}", p.id, p.description);
        if (!p.derived_from.empty()) fmt::print(" (derived-from: {})", p.derived_from);
        fmt::print("\n");
    }
    return 0;
}

void print_rows(const harness::ResultTable& table) {
    fmt::print("{:>12} {:>11} {:>11} {:>11} {:>11} {:>11}  status\n", "sweep", "peak rad",
               "int rad s", "rise ns", "fall ns", "model ns");
    for (const auto& r : table.rows) {
        fmt::print("{:>12.4g} {:>11.4g} {:>11.4g} {:>11.1f} {:>11.1f} {:>11.1f}  {}\n", r.sweep_value,
                   r.peak_phase, r.integrated_phase, r.rise * 1e9, r.fall * 1e9, r.model_fall * 1e9,
                   r.ok ? "ok" : "FAILED: " + r.error);
    }
}

int cmd_run(const std::string& target, const std::optional<std::string>& out,
            const std::optional<std::uint64_t>& seed, const std::optional<std::string>& engine,
            const std::optional<std::size_t>& shots) {
    auto config = harness::load_config(target);
    if (out) config.output_dir = *out;
    if (seed) {
        config.seed = *seed;
        config.detection.rng_seed = *seed;
    }
    if (engine) config.engine = harness::parse_engine(*engine);
    if (shots) {
        config.detection_enabled = *shots > 0;
        if (*shots > 0) config.detection.n_shots = *shots;
    }
    const auto run = harness::run_scenario(config);
    fmt::print("scenario {} (engine {}, config hash {})\n", config.id,
               harness::engine_name(config.engine), run.table.provenance.config_hash);
    print_rows(run.table);
    for (const auto& f : run.files) fmt::print("wrote {}\n", f);
    return run.table.all_ok() ? 0 : 1;
}

int cmd_fit(const std::string& path) {
    const auto trace = harness::read_trace_csv(path);
    const auto result = fit::fit_phase_profile(trace);
    for (const auto& w : result.warnings) fmt::print("warning: {}\n", w);
    fmt::print("converged   {} after {} iterations\n", result.converged, result.n_iterations);
    fmt::print("amplitude   {:.6g} +/- {:.3g} rad s\n", result.amplitude, result.sigma(fit::kAmplitude));
    fmt::print("tau_s       {:.6g} +/- {:.3g} s\n", result.tau_s, result.sigma(fit::kTauS));
    fmt::print("tau         {:.6g} +/- {:.3g} s\n", result.tau, result.sigma(fit::kTau));
    fmt::print("t0          {:.6g} +/- {:.3g} s\n", result.t0, result.sigma(fit::kT0));
    fmt::print("baseline    {:.6g} +/- {:.3g} rad\n", result.baseline, result.sigma(fit::kBaseline));
    fmt::print("residual    {:.6g} rad RMS\n", result.residual_rms);
    try {
        fmt::print("1/e decay   {:.6g} s (direct crossing)\n",
                   fit::direct_decay_time(trace, result.baseline));
    } catch (const ShapeError& e) {
        fmt::print("1/e decay   n/a ({})\n", e.what());
    }
    return result.converged ? 0 : 1;
}

int cmd_validate(const std::optional<std::string>& out) {
    auto bloch_cfg = harness::preset("validation-lti-vs-bloch");
    if (out) bloch_cfg.output_dir = *out;
    auto lti_cfg = bloch_cfg;
    lti_cfg.engine = harness::EngineKind::lti;
    const auto bloch_run = harness::run_scenario(bloch_cfg);
    const auto lti_run = harness::run_scenario(lti_cfg, false);

    bool ok = bloch_run.table.all_ok() && lti_run.table.all_ok();
    fmt::print("{:>10} {:>13} {:>13} {:>9} {:>12}\n", "window MHz", "bloch rad s", "lti rad s",
               "rel diff", "fit rms/pk");
    for (std::size_t i = 0; i < bloch_run.table.rows.size(); ++i) {
        const auto& b = bloch_run.table.rows[i];
        const auto& l = lti_run.table.rows[i];
        const double rel = std::abs(b.clean_integrated_phase / l.clean_integrated_phase - 1.0);
        const double rms = b.residual_rms / std::abs(b.clean_peak_phase);
        const bool point_ok = b.ok && l.ok && rel < 0.10 && rms < 0.10;
        ok = ok && point_ok;
        fmt::print("{:>10.3f} {:>13.5g} {:>13.5g} {:>8.2f}% {:>11.2f}%  {}\n", b.sweep_value / 1e6,
                   b.clean_integrated_phase, l.clean_integrated_phase, 100 * rel, 100 * rms,
                   point_ok ? "ok" : "FAILED " + b.error + l.error);
    }
    for (const auto& f : bloch_run.files) fmt::print("wrote {}\n", f);
    fmt::print("{}\n", ok ? "validation passed" : "validation FAILED");
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-phase modulation simulator"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "List scenario presets");

    auto* run = app.add_subcommand("run", "Run a preset or a JSON scenario config");
    std::string target;
    std::optional<std::string> out, engine;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> shots;
    run->add_option("target", target, "Preset id or path to config.json")->required();
    run->add_option("--out", out, "Output directory");
    run->add_option("--seed", seed, "RNG seed");
    run->add_option("--engine", engine, "lti, bloch or bloch-slabs")
        ->check(CLI::IsMember({"lti", "bloch", "bloch-slabs"}));
    run->add_option("--shots", shots, "Shots per trace (0 disables detection)");

    auto* fitcmd = app.add_subcommand("fit", "Fit the temporal profile to a trace CSV");
    std::string trace_path;
    fitcmd->add_option("trace", trace_path, "Trace CSV (time_s,phase_rad[,stderr_rad])")
        ->required()
        ->check(CLI::ExistingFile);

    auto* validate = app.add_subcommand("validate", "Cross-check LTI against sliced Bloch traces");
    std::optional<std::string> vout;
    validate->add_option("--out", vout, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list) return cmd_list();
        if (*run) return cmd_run(target, out, seed, engine, shots);
        if (*fitcmd) return cmd_fit(trace_path);
        if (*validate) return cmd_validate(vout);
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return 0;
}
