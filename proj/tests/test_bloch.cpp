#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "xpm/bloch.hpp"
#include "xpm/errors.hpp"
#include "xpm/fit.hpp"
#include "xpm/harness.hpp"
#include "xpm/lti.hpp"
#include "xpm/spectroscopy.hpp"

using namespace xpm;
using oracle::kTwoPi;
using bloch::cplx;

namespace {

MediumParams medium(double gamma_hz = 75e3, double d0 = 3.0) {
    MediumParams m;
    m.d0 = d0;
    m.gamma = kTwoPi * gamma_hz;
    return m;
}

FieldParams fields(double omega_c = kTwoPi * 3e6, double ratio = 0.05) {
    FieldParams f;
    f.omega_c = omega_c;
    f.omega_p = ratio * omega_c;
    return f;
}

cplx response(const MediumParams& m, const FieldParams& f, double omega_s = 0.0) {
    return bloch::normalized_response(bloch::steady_state(m, f, omega_s), cplx(f.omega_p, 0.0));
}

SignalPulse pulse(double tau_s, double power, double t0) {
    return SignalPulse::from_peak_power(power, tau_s, t0);
}

}  // namespace

TEST(SteadyState, physical_state) {
    for (double os : {0.0, kTwoPi * 2e6, kTwoPi * 6e6}) {
        const auto rho = bloch::steady_state(medium(), fields(), os);
        EXPECT_NEAR(std::abs(rho.trace() - 1.0), 0.0, 1e-9);
        EXPECT_LT((rho - rho.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
        Eigen::SelfAdjointEigenSolver<bloch::DensityMatrix4> es(rho);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9);
        const auto liou = bloch::Liouvillian::build(medium(), fields());
        const bloch::StateVector r = liou.at(cplx(fields().omega_p, 0.0), os) * bloch::vectorize(rho);
        EXPECT_LT(r.cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(SteadyState, two_level_limit) {
    auto m = medium(0.0);
    m.branch3 = 1.0;
    FieldParams f;
    f.omega_p = 1e-3 * m.Gamma3;
    for (double dp : {0.0, 0.3 * m.Gamma3, -1.7 * m.Gamma3}) {
        f.delta_p = dp;
        const cplx r = response(m, f);
        const cplx ref = oracle::lambda_response(m.Gamma3, 0.0, 0.0, dp, 0.0);
        EXPECT_LT(std::abs(r - ref), 1e-5 * std::abs(ref)) << dp;
    }
    f.delta_p = 0.0;
    const auto rho = bloch::steady_state(m, f, 0.0);
    EXPECT_NEAR(rho(2, 0).imag(), f.omega_p / m.Gamma3, 1e-5 * f.omega_p / m.Gamma3);
}

TEST(SteadyState, perfect_eit_dark_state) {
    auto f = fields(kTwoPi * 3e6, 0.01);
    const auto m = medium(0.0);
    const auto rho = bloch::steady_state(m, f, 0.0);
    const double two_level = f.omega_p / m.Gamma3;
    EXPECT_LT(std::abs(rho(2, 0).imag()), 1e-6 * two_level);
}

TEST(SteadyState, lambda_susceptibility) {
    const auto m = medium(75e3);
    const auto f0 = fields(kTwoPi * 3e6, 0.001);
    for (double d2 : {0.0, kTwoPi * 50e3, -kTwoPi * 400e3, kTwoPi * 2e6}) {
        for (double dp : {0.0, kTwoPi * 1e6}) {
            auto f = f0;
            f.delta_2ph = d2;
            f.delta_p = dp;
            const cplx ref = oracle::lambda_response(m.Gamma3, m.gamma, f.omega_c, dp, d2);
            EXPECT_LT(std::abs(response(m, f) - ref), 1e-3 * std::abs(ref)) << d2 << " " << dp;
        }
    }
}

TEST(SteadyState, residual_absorption_scales_with_dephasing) {
    const auto f = fields(kTwoPi * 3e6, 0.001);
    std::vector<double> ratio;
    for (double g_hz : {7.5e3, 15e3, 30e3, 45e3, 75e3}) {
        const auto m = medium(g_hz);
        const double rel = response(m, f).imag() * m.Gamma3;  // relative to the two-level value
        ratio.push_back(rel / (m.gamma / (m.gamma + f.omega_c * f.omega_c / m.Gamma3)));
    }
    const double mid = ratio[2];
    for (double r : ratio) EXPECT_NEAR(r / mid, 1.0, 0.05);
}

TEST(SteadyState, symmetric_under_two_photon_detuning) {
    const auto m = medium(0.0);
    const auto calib = bloch::calibrate_thin_medium(m, fields());
    for (double d2 : {kTwoPi * 20e3, kTwoPi * 300e3, kTwoPi * 3e6}) {
        auto fp = fields();
        auto fm = fields();
        fp.delta_2ph = d2;
        fm.delta_2ph = -d2;
        const cplx rp = response(m, fp), rm = response(m, fm);
        const double pp = bloch::probe_phase(rp, calib), pm = bloch::probe_phase(rm, calib);
        EXPECT_NEAR(pp, -pm, 1e-9 * std::abs(pp) + 1e-12);
        EXPECT_NEAR(bloch::probe_transmission(rp, calib), bloch::probe_transmission(rm, calib), 1e-9);
    }
}

TEST(SteadyState, stark_phase_matches_dispersion_slope) {
    const auto m = medium();
    const auto f = fields();
    const double os = kTwoPi * 2e6;
    const auto calib = bloch::calibrate_thin_medium(m, f);
    const double h = kTwoPi * 1e3;
    auto phase_at = [&](double d2, double omega_s) {
        auto g = f;
        g.delta_2ph = d2;
        return bloch::probe_phase(response(m, g, omega_s), calib);
    };
    const double slope = (phase_at(h, 0.0) - phase_at(-h, 0.0)) / (2 * h);
    const double shift = spectro::stark_shift(m, f, os);
    const double expect = -slope * shift;
    const double got = phase_at(0.0, os) - phase_at(0.0, 0.0);
    EXPECT_GT(got, 0.0);
    EXPECT_NEAR(got, expect, 0.1 * std::abs(expect));
}

TEST(Calibration, optical_density) {
    auto m = medium();
    m.branch3 = 1.0;
    FieldParams bare;
    bare.omega_p = 1e-3 * m.Gamma3;
    const auto calib = bloch::calibrate_thin_medium(m, bare);
    EXPECT_NEAR(bloch::probe_transmission(response(m, bare), calib), std::exp(-3.0), 1e-6);
    EXPECT_NEAR(std::exp(-3.0), 0.0498, 1e-4);

    auto m2 = m;
    m2.d0 = 6.0;
    EXPECT_NEAR(bloch::calibrate_thin_medium(m2, bare).scale, 2.0 * calib.scale, 1e-9 * calib.scale);
    m2.d0 = 0.0;
    EXPECT_EQ(bloch::calibrate_thin_medium(m2, bare).scale, 0.0);

    EXPECT_EQ(bloch::probe_phase(cplx(0.0, 0.0), calib), 0.0);
    EXPECT_EQ(bloch::probe_transmission(cplx(0.0, 0.0), calib), 1.0);

    FieldParams dark;
    EXPECT_THROW(bloch::calibrate_thin_medium(medium(), dark), CalibrationError);
}

TEST(Evolve, no_pulse_stays_in_steady_state) {
    const auto m = medium();
    const auto f = fields();
    const auto rho0 = bloch::steady_state(m, f, 0.0);
    SignalPulse none;
    none.n_ph = 0.0;
    none.t0 = 1e-6;
    const auto grid = TimeGrid::spanning(0.0, 2e-6, bloch::max_grid_step(m, f));
    const auto tr = bloch::evolve(m, f, none, grid, rho0);
    for (const cplx& c : tr.rho31) EXPECT_LT(std::abs(c - rho0(2, 0)), 1e-8);
}

TEST(Evolve, invariants_hold_during_pulse) {
    const auto m = medium();
    const auto f = fields();
    const auto rho0 = bloch::steady_state(m, f, 0.0);
    const auto p = pulse(40e-9, 3.2e-6, 0.5e-6);
    const auto grid = TimeGrid::spanning(0.0, 2e-6, bloch::max_grid_step(m, f));
    const auto tr = bloch::evolve(m, f, p, grid, rho0);
    EXPECT_TRUE(tr.diagnostics.physical());
    EXPECT_LT(tr.diagnostics.max_trace_error, 1e-8);
    EXPECT_LT(tr.diagnostics.max_hermiticity_error, 1e-12);
    EXPECT_EQ(tr.diagnostics.positivity_violations, 0u);
    EXPECT_GE(tr.diagnostics.min_eigenvalue, -1e-9);
    EXPECT_LE(tr.diagnostics.max_coherence, 0.5 + 1e-6);
    EXPECT_EQ(tr.rho31.size(), grid.n_samples);
}

TEST(Evolve, relaxes_to_steady_state) {
    const auto m = medium();
    const auto f = fields();
    const auto liou = bloch::Liouvillian::build(m, f);
    Eigen::ComplexEigenSolver<bloch::Superop> es(liou.at(cplx(f.omega_p, 0.0), 0.0));
    double slowest = INFINITY;
    for (int i = 0; i < 16; ++i) {
        const double rate = -es.eigenvalues()(i).real();
        if (rate > 1e-6 * m.Gamma3) slowest = std::min(slowest, rate);
    }
    ASSERT_TRUE(std::isfinite(slowest));

    bloch::DensityMatrix4 start = bloch::DensityMatrix4::Zero();
    start(0, 0) = 1.0;
    SignalPulse none;
    none.n_ph = 0.0;
    const double dt = bloch::max_grid_step(m, f);
    const auto grid = TimeGrid{0.0, dt, static_cast<std::size_t>(std::ceil(10.0 / slowest / dt)) + 1};
    const auto tr = bloch::evolve(m, f, none, grid, start);
    const auto ss = bloch::steady_state(m, f, 0.0);
    EXPECT_LT((tr.final_state - ss).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Evolve, coarse_grid_rejected) {
    const auto m = medium();
    const auto f = fields();
    const auto grid = TimeGrid::spanning(0.0, 1e-6, 10.0 * bloch::max_grid_step(m, f));
    EXPECT_THROW(bloch::evolve(m, f, pulse(40e-9, 1e-6, 0.5e-6), grid, bloch::steady_state(m, f, 0.0)),
                 PreconditionError);
}

TEST(Evolve, long_weak_pulse_matches_lti_profile) {
    const auto m = medium(75e3, 0.1);
    const SpectralWindow window = SpectralWindow::from_hz(2e6);
    auto f = fields(std::sqrt(m.Gamma3 * (window.delta_eit - 2 * m.gamma)), 0.05);
    f.omega_c = spectro::coupling_for_window(m, f, window);
    f.omega_p = 0.05 * f.omega_c;
    const double tau = lti::response_time(window, m);
    const auto p = pulse(5.0 * tau, 0.2e-6, 0.0);
    const auto grid = TimeGrid::spanning(-6 * p.tau_s, 6 * p.tau_s + 8 * tau, bloch::max_grid_step(m, f));
    const auto tr = bloch::probe_response(bloch::evolve(m, f, p, grid, bloch::steady_state(m, f, 0.0)),
                                          bloch::calibrate_thin_medium(m, f), f);
    double area = 0.0, peak = 0.0;
    const double base = tr.phase.front();
    for (std::size_t i = 1; i < tr.size(); ++i) area += 0.5 * grid.dt * (tr.phase[i] + tr.phase[i - 1] - 2 * base);
    for (double v : tr.phase) peak = std::max(peak, v - base);
    const lti::LtiKernel k{area / p.n_ph, tau};
    double ss = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i)
        ss += std::pow(tr.phase[i] - base - lti::phase_profile(grid.time(i), k, p), 2);
    EXPECT_LT(std::sqrt(ss / static_cast<double>(tr.size())), 0.1 * peak);
}

TEST(Slabs, single_thin_slab_matches_evolve) {
    const auto m = medium(75e3, 1e-3);
    const auto f = fields();
    const auto p = pulse(40e-9, 0.8e-6, 0.3e-6);
    const auto grid = TimeGrid::spanning(0.0, 1.5e-6, bloch::max_grid_step(m, f));
    const auto thin = bloch::probe_response(bloch::evolve(m, f, p, grid, bloch::steady_state(m, f, 0.0)),
                                            bloch::calibrate_thin_medium(m, f), f);
    const auto slab = bloch::propagate_slabs(m, f, p, grid, 1);
    double peak = 0.0;
    for (double v : thin.phase) peak = std::max(peak, std::abs(v - thin.phase.front()));
    ASSERT_GT(peak, 0.0);
    for (std::size_t i = 0; i < grid.n_samples; ++i)
        ASSERT_NEAR(slab.trace.phase[i], thin.phase[i], 1e-6 * peak + 1e-6 * std::abs(thin.phase[i]));
    EXPECT_TRUE(slab.diagnostics.physical());
}

TEST(Slabs, optical_depth_per_slab_limit) {
    const auto m = medium(75e3, 3.0);
    const auto f = fields();
    const auto grid = TimeGrid::spanning(0.0, 1e-7, bloch::max_grid_step(m, f));
    EXPECT_THROW(bloch::propagate_slabs(m, f, pulse(40e-9, 1e-6, 0.0), grid, 5), AccuracyError);
    EXPECT_THROW(bloch::propagate_slabs(m, f, pulse(40e-9, 1e-6, 0.0), grid, 0), InvalidParameter);
}

namespace {

harness::ScenarioConfig slab_config(double d0, std::vector<double> windows, harness::EngineKind engine) {
    auto c = harness::preset("validation-lti-vs-bloch");
    c.engine = engine;
    c.medium.d0 = d0;
    c.n_slabs = std::max(1, static_cast<int>(std::ceil(d0 / 0.25)));
    c.sweep_values = std::move(windows);
    c.pulse.tau_s = 40e-9;
    c.pulse.peak_power = 0.2e-6;
    c.detection_enabled = false;
    return c;
}

}  // namespace

TEST(Slabs, optical_density_slows_the_response) {
    const auto dense = harness::run_scenario(slab_config(3.0, {0.6e6}, harness::EngineKind::bloch_slabs), false);
    const auto thin = harness::run_scenario(slab_config(0.02, {0.6e6}, harness::EngineKind::bloch_slabs), false);
    ASSERT_TRUE(dense.table.all_ok()) << dense.table.rows[0].error;
    ASSERT_TRUE(thin.table.all_ok()) << thin.table.rows[0].error;
    const auto m = medium();
    const double w = kTwoPi * 0.6e6;
    const double bracket = 1.0 + m.d0 / 4.0 * (1.0 - 2.0 * m.gamma / w);
    EXPECT_NEAR(dense.table.rows[0].fall / thin.table.rows[0].fall, bracket, 0.25 * bracket);
}

TEST(Slabs, integrated_phase_linear_in_small_od) {
    std::vector<double> per_od;
    for (double d0 : {0.25, 0.5, 1.0}) {
        const auto run = harness::run_scenario(slab_config(d0, {1.0e6}, harness::EngineKind::bloch_slabs), false);
        ASSERT_TRUE(run.table.all_ok()) << run.table.rows[0].error;
        per_od.push_back(run.table.rows[0].clean_integrated_phase / d0);
    }
    for (double v : per_od) EXPECT_NEAR(v / per_od[0], 1.0, 0.10);
}

TEST(Evolve, rise_follows_the_pulse_not_the_window) {
    auto c = slab_config(3.0, {0.4e6, 0.8e6, 1.5e6, 4.0e6}, harness::EngineKind::bloch);
    const auto run = harness::run_scenario(c, false);
    ASSERT_TRUE(run.table.all_ok());
    double lo = INFINITY, hi = 0.0;
    for (const auto& r : run.table.rows) {
        lo = std::min(lo, r.rise);
        hi = std::max(hi, r.rise);
    }
    EXPECT_LT((hi - lo) / lo, 0.20) << lo << " " << hi;
    EXPECT_GT(run.table.rows.front().fall, 4.0 * run.table.rows.back().fall);
}
