#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "xpm/detection.hpp"
#include "xpm/errors.hpp"
#include "xpm/lti.hpp"

using namespace xpm;
using oracle::kTwoPi;

namespace {

PhaseTrace constant_trace(double phi, double t_end = 2e-6, double dt = 1e-9) {
    PhaseTrace tr;
    tr.grid = TimeGrid::spanning(0.0, t_end, dt);
    tr.phase.assign(tr.grid.n_samples, phi);
    return tr;
}

// Closed-form-shaped profile with a 50 mrad scale.
PhaseTrace profile(double tau_s = 40e-9, double tau = 1.1e-6) {
    SignalPulse p;
    p.tau_s = tau_s;
    p.n_ph = 1.0;
    p.t0 = 0.5e-6;
    const lti::LtiKernel k{0.05 * tau, tau};
    return lti::phase_profile(TimeGrid::spanning(0.0, 0.5e-6 + 3.0 * tau, 1e-9), k, p);
}

detect::DetectionParams quiet() {
    detect::DetectionParams d;
    d.atom_fluct_rms = 0.0;
    d.detector_noise_rms = 0.0;
    return d;
}

double peak_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST(Beat, pure_sinusoid) {
    auto d = quiet();
    d.reference_amplitude = 1.3;
    d.probe_amplitude = 0.7;
    const auto raw = detect::synthesize_beat(constant_trace(0.0), {}, d, 2);
    ASSERT_DOUBLE_EQ(raw.dt, 0.5e-9);
    for (std::size_t i = 0; i < raw.samples.size(); i += 7) {
        const double t = raw.time(i);
        const double expect = 1.69 + 0.49 + 2 * 1.3 * 0.7 * std::cos(kTwoPi * d.f_beat * t);
        EXPECT_NEAR(raw.samples[i], expect, 1e-9);
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < 2000; ++i) mean += raw.samples[i];
    EXPECT_NEAR(mean / 2000.0, 1.69 + 0.49, 1e-9);
}

TEST(Beat, constant_phase_offset) {
    const auto d = quiet();
    const auto raw = detect::synthesize_beat(constant_trace(0.1), {}, d, 1);
    for (std::size_t i = 0; i < raw.samples.size(); i += 11)
        EXPECT_NEAR(raw.samples[i], 2.0 + 2.0 * std::cos(kTwoPi * d.f_beat * raw.time(i) + 0.1), 1e-9);
    const auto out = detect::demodulate(raw, d);
    ASSERT_GT(out.size(), 10u);
    for (double v : out.phase) EXPECT_NEAR(v, 0.1, 1e-3);
}

TEST(Beat, transmission_scales_beat_amplitude) {
    const auto d = quiet();
    auto tr = constant_trace(0.0, 0.2e-6);
    const std::vector<double> t(tr.size(), 0.25);
    const auto raw = detect::synthesize_beat(tr, t, d, 1);
    EXPECT_NEAR(raw.samples[0], 1.0 + 0.25 + 2.0 * 0.5, 1e-12);
}

TEST(Beat, sampling_error) {
    const auto d = quiet();
    EXPECT_THROW(detect::synthesize_beat(constant_trace(0.0, 1e-6, 5e-9), {}, d, 1), SamplingError);
    EXPECT_NO_THROW(detect::synthesize_beat(constant_trace(0.0, 1e-6, 5e-9), {}, d, 4));
}

TEST(Demodulate, resolution_error) {
    auto d = quiet();
    const auto raw = detect::synthesize_beat(constant_trace(0.0), {}, d, 1);
    d.sampling_period = 20e-9;
    EXPECT_THROW(detect::demodulate(raw, d), ResolutionError);
    const auto tiny = detect::synthesize_beat(constant_trace(0.0, 30e-9), {}, quiet(), 1);
    EXPECT_THROW(detect::demodulate(tiny, quiet()), ResolutionError);
}

TEST(Demodulate, round_trip_profile) {
    const auto d = quiet();
    const auto in = profile();
    const auto out = detect::demodulate(detect::synthesize_beat(in, {}, d, 1), d);
    double ss = 0.0;
    for (std::size_t b = 0; b < out.size(); ++b) {
        // Bin average of the input.
        const double c = out.time(b);
        double avg = 0.0;
        const int m = 67;
        for (int k = 0; k < m; ++k)
            avg += interpolate(in.grid, in.phase, c - 0.5 * d.sampling_period + (k + 0.5) * d.sampling_period / m);
        avg /= m;
        ss += std::pow(out.phase[b] - avg, 2);
    }
    EXPECT_LT(std::sqrt(ss / static_cast<double>(out.size())), 0.02 * peak_of(in.phase));
}

TEST(Demodulate, step_rise_within_two_bins) {
    const auto d = quiet();
    auto in = constant_trace(0.0, 3e-6);
    for (std::size_t i = 0; i < in.size(); ++i)
        if (in.time(i) >= 1.23e-6) in.phase[i] = 0.5;
    const auto out = detect::demodulate(detect::synthesize_beat(in, {}, d, 1), d);
    auto crossing = [&](double level) {
        for (std::size_t b = 1; b < out.size(); ++b)
            if (out.phase[b - 1] < level && out.phase[b] >= level)
                return out.time(b - 1) + out.grid.dt * (level - out.phase[b - 1]) / (out.phase[b] - out.phase[b - 1]);
        return std::nan("");
    };
    const double rise = crossing(0.45) - crossing(0.05);
    EXPECT_GT(rise, 0.0);
    EXPECT_LE(rise, 2.0 * d.sampling_period);
}

TEST(Demodulate, lowpass_taps_shape) {
    const auto h = detect::lowpass_taps(25e6, 1e9);
    EXPECT_EQ(h.size() % 2, 1u);
    double sum = 0.0;
    for (double v : h) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(h[i], h[h.size() - 1 - i], 1e-15);
    // Response at 2 f_beat and at DC offset by f_beat (the unmixed term).
    for (double f : {100e6, 200e6}) {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            re += h[i] * std::cos(kTwoPi * f * i * 1e-9);
            im += h[i] * std::sin(kTwoPi * f * i * 1e-9);
        }
        EXPECT_LT(std::hypot(re, im), 1e-3) << f;
    }
}

TEST(Shots, zero_noise_single_shot_equals_demodulation) {
    auto d = quiet();
    d.n_shots = 1;
    const auto in = profile();
    const auto direct = detect::demodulate(detect::synthesize_beat(in, {}, d, 1), d);
    const auto shot = detect::run_shots(in, d);
    ASSERT_EQ(shot.phase.size(), direct.phase.size());
    for (std::size_t i = 0; i < direct.size(); ++i) EXPECT_EQ(shot.phase[i], direct.phase[i]);
    EXPECT_DOUBLE_EQ(shot.grid.t_start, direct.grid.t_start);
}

TEST(Shots, deterministic_and_independent_of_workers) {
    auto d = detect::DetectionParams{};
    d.n_shots = 40;
    d.rng_seed = 77;
    const auto in = profile();
    setenv("XPM_WORKERS", "1", 1);
    const auto a = detect::run_shots(in, d);
    setenv("XPM_WORKERS", "3", 1);
    const auto b = detect::run_shots(in, d);
    unsetenv("XPM_WORKERS");
    EXPECT_EQ(a.phase, b.phase);
    EXPECT_EQ(a.stderr_rad, b.stderr_rad);
    d.rng_seed = 78;
    EXPECT_NE(detect::run_shots(in, d).phase, a.phase);
}

TEST(Shots, mean_equals_average_of_shots) {
    auto d = detect::DetectionParams{};
    d.n_shots = 5;
    const auto in = profile();
    const auto mean = detect::run_shots(in, d);
    std::vector<double> acc(mean.size(), 0.0);
    for (std::size_t s = 0; s < d.n_shots; ++s) {
        const auto shot = detect::simulate_shot(in, d, s);
        for (std::size_t b = 0; b < acc.size(); ++b) acc[b] += shot.phase[b];
    }
    for (std::size_t b = 0; b < acc.size(); ++b) EXPECT_NEAR(acc[b] / 5.0, mean.phase[b], 1e-15);
}

TEST(Shots, atom_noise_averages_out) {
    auto d = quiet();
    d.atom_fluct_rms = 0.15;
    d.n_shots = 2500;
    const auto in = profile();
    const auto clean = detect::demodulate(detect::synthesize_beat(in, {}, d, 1), d);
    const auto mean = detect::run_shots(in, d);
    const double peak = peak_of(clean.phase);
    for (std::size_t b = 0; b < clean.size(); ++b) EXPECT_NEAR(mean.phase[b], clean.phase[b], 0.01 * peak);
}

TEST(Shots, standard_error_scales_with_shots) {
    auto d = detect::DetectionParams{};
    const auto in = profile();
    auto mean_err = [&](std::size_t n) {
        d.n_shots = n;
        const auto tr = detect::run_shots(in, d);
        double s = 0.0;
        for (double e : tr.stderr_rad) s += e;
        return s / static_cast<double>(tr.size());
    };
    const double e625 = mean_err(625);
    const double e2500 = mean_err(2500);
    EXPECT_NEAR(e625 / e2500, 2.0, 0.2);
}
