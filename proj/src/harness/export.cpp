#include <cmath>

#include <fmt/format.h>

#include "xpm/harness.hpp"

namespace xpm::harness {

namespace {

std::string provenance_line(const Provenance& p) {
    return fmt::format("# scenario={} config_hash={} code_version={} seed={}\n", p.scenario,
                       p.config_hash, p.code_version, p.seed);
}

std::string num(double v) { return fmt::format("{:.12g}", v); }

std::string quoted(std::string s) {
    for (char& c : s)
        if (c == '"' || c == '\n') c = '\'';
    return "\"" + s + "\"";
}

}  // namespace

std::string summary_csv(const ResultTable& table) {
    std::string out = provenance_line(table.provenance);
    out += fmt::format(
        "# sweep_axis={} engine={}\n", axis_name(table.config.sweep_axis),
        engine_name(table.config.engine));
    out +=
        "sweep_value,window_hz,tau_s,n_ph,status,peak_phase_rad,peak_phase_sigma_rad,"
        "integrated_phase_rad_s,integrated_phase_sigma_rad_s,rise_s,rise_sigma_s,fall_s,"
        "fall_sigma_s,direct_fall_s,model_fall_s,t0_s,baseline_rad,residual_rms_rad,"
        "clean_peak_phase_rad,clean_integrated_phase_rad_s,error\n";
    for (const auto& r : table.rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                           num(r.sweep_value), num(to_hertz(r.window)), num(r.tau_s), num(r.n_ph),
                           r.ok ? "ok" : "failed", num(r.peak_phase), num(r.peak_phase_sigma),
                           num(r.integrated_phase), num(r.integrated_phase_sigma), num(r.rise),
                           num(r.rise_sigma), num(r.fall), num(r.fall_sigma), num(r.direct_fall),
                           num(r.model_fall), num(r.t0), num(r.baseline), num(r.residual_rms),
                           num(r.clean_peak_phase), num(r.clean_integrated_phase), quoted(r.error));
    }
    return out;
}

nlohmann::json summary_json(const ResultTable& table) {
    nlohmann::json j;
    const auto& p = table.provenance;
    j["provenance"] = {{"scenario", p.scenario},
                       {"config_hash", p.config_hash},
                       {"code_version", p.code_version},
                       {"seed", p.seed}};
    auto config = to_json(table.config);
    config.erase("output_dir");
    j["config"] = config;
    auto rows = nlohmann::json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"sweep_value", r.sweep_value},
                        {"window_hz", to_hertz(r.window)},
                        {"tau_s", r.tau_s},
                        {"n_ph", r.n_ph},
                        {"ok", r.ok},
                        {"error", r.error},
                        {"peak_phase", r.peak_phase},
                        {"peak_phase_sigma", r.peak_phase_sigma},
                        {"integrated_phase", r.integrated_phase},
                        {"integrated_phase_sigma", r.integrated_phase_sigma},
                        {"rise", r.rise},
                        {"rise_sigma", r.rise_sigma},
                        {"fall", r.fall},
                        {"fall_sigma", r.fall_sigma},
                        {"direct_fall", r.direct_fall},
                        {"model_fall", r.model_fall},
                        {"t0", r.t0},
                        {"baseline", r.baseline},
                        {"residual_rms", r.residual_rms},
                        {"clean_peak_phase", r.clean_peak_phase},
                        {"clean_integrated_phase", r.clean_integrated_phase},
                        {"notes", r.notes}});
    }
    j["rows"] = rows;
    j["all_ok"] = table.all_ok();
    return j;
}

PlotData export_plotdata(const ResultTable& table) {
    PlotData plot;
    const double gamma = table.config.medium.gamma;
    plot.columns = {table.config.sweep_axis == SweepAxis::window ? "delta_eit_hz" : "tau_s",
                    "peak_phase_rad",
                    "integrated_phase_rad_s",
                    "rise_s",
                    "fall_s",
                    "model_fall_s",
                    "cfit_integrated_rad_s",
                    "gamma0_reference_rad_s"};

    auto shape = [&](double delta) { return (1.0 - 2.0 * gamma / delta) / delta; };
    double sfy = 0.0, sff = 0.0;
    for (const auto& r : table.rows) {
        if (!r.ok) continue;
        const double f = shape(r.window);
        sfy += f * r.integrated_phase;
        sff += f * f;
    }
    plot.c_fit = sff > 0.0 ? sfy / sff : 0.0;

    double mean = 0.0, n_ok = 0.0;
    for (const auto& r : table.rows)
        if (r.ok) {
            mean += r.integrated_phase;
            n_ok += 1.0;
        }
    if (n_ok > 0.0) mean /= n_ok;
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& r : table.rows) {
        if (!r.ok) continue;
        const double d = r.integrated_phase - plot.c_fit * shape(r.window);
        ss_res += d * d;
        ss_tot += (r.integrated_phase - mean) * (r.integrated_phase - mean);
    }
    plot.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);

    for (const auto& r : table.rows) {
        const double x = table.config.sweep_axis == SweepAxis::window ? r.sweep_value : r.tau_s;
        plot.rows.push_back({x, r.peak_phase, r.integrated_phase, r.rise, r.fall, r.model_fall,
                             plot.c_fit * shape(r.window), plot.c_fit / r.window});
    }
    return plot;
}

std::string plot_csv(const PlotData& plot, const Provenance& provenance) {
    std::string out = provenance_line(provenance);
    out += fmt::format("# c_fit={} r_squared={}\n", num(plot.c_fit), num(plot.r_squared));
    for (std::size_t i = 0; i < plot.columns.size(); ++i)
        out += (i ? "," : "") + plot.columns[i];
    out += "\n";
    for (const auto& row : plot.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + num(row[i]);
        out += "\n";
    }
    return out;
}

std::string trace_csv(const PhaseTrace& trace, const Provenance& provenance) {
    std::string out = provenance_line(provenance);
    out += "time_s,phase_rad,stderr_rad\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
        out += fmt::format("{},{},{}\n", num(trace.time(i)), num(trace.phase[i]),
                           num(trace.has_stderr() ? trace.stderr_rad[i] : 0.0));
    return out;
}

}  // namespace xpm::harness
