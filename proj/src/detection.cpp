#include "xpm/detection.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "xpm/errors.hpp"
#include "xpm/parallel.hpp"

namespace xpm::detect {

void DetectionParams::validate() const {
    if (!(std::isfinite(f_beat) && f_beat > 0.0)) throw InvalidParameter("f_beat must be > 0");
    if (!(std::isfinite(sampling_period) && sampling_period > 0.0))
        throw InvalidParameter("sampling_period must be > 0");
    if (n_shots < 1) throw InvalidParameter("n_shots must be >= 1");
    if (!(atom_fluct_rms >= 0.0)) throw InvalidParameter("atom_fluct_rms must be >= 0");
    if (!(detector_noise_rms >= 0.0)) throw InvalidParameter("detector_noise_rms must be >= 0");
    if (!(reference_amplitude > 0.0 && probe_amplitude > 0.0))
        throw InvalidParameter("beam amplitudes must be > 0");
}

std::vector<double> lowpass_taps(double cutoff_hz, double sample_rate_hz) {
    const double fc = cutoff_hz / sample_rate_hz;
    if (!(fc > 0.0 && fc < 0.5)) throw InvalidParameter("low-pass cutoff must lie below Nyquist");
    // Blackman transition width is about 5.5 / N in normalized frequency; the
    // stop band starts at 4 fc, where the unmixed DC term lands.
    const double transition = std::min(3.0 * fc, 0.5 - fc);
    auto n = static_cast<std::size_t>(std::ceil(5.5 / std::max(transition, 1e-3)));
    n |= 1u;
    std::vector<double> h(n);
    const double mid = 0.5 * static_cast<double>(n - 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double k = static_cast<double>(i) - mid;
        const double sinc = k == 0.0 ? 2.0 * fc
                                     : std::sin(2.0 * std::numbers::pi * fc * k) / (std::numbers::pi * k);
        const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1);
        const double w = 0.42 - 0.5 * std::cos(a) + 0.08 * std::cos(2.0 * a);
        h[i] = sinc * w;
        sum += h[i];
    }
    for (double& v : h) v /= sum;
    return h;
}

namespace {

// Everything about a readout that does not change from shot to shot.
struct Plan {
    double t_start = 0.0;
    double dt = 0.0;
    std::vector<double> phase;   // clean phase on the raw grid
    std::vector<double> log_t;   // clean ln T on the raw grid
    std::vector<double> carrier; // 2 pi f t
};

Plan make_plan(const PhaseTrace& trace, const std::vector<double>& transmission,
               const DetectionParams& params, double dt_raw, std::size_t n_raw) {
    Plan p;
    p.t_start = trace.grid.t_start;
    p.dt = dt_raw;
    p.phase.resize(n_raw);
    p.log_t.assign(n_raw, 0.0);
    p.carrier.resize(n_raw);
    std::vector<double> log_t;
    if (!transmission.empty()) {
        log_t.resize(transmission.size());
        for (std::size_t i = 0; i < transmission.size(); ++i) {
            if (!(transmission[i] > 0.0)) throw InvalidParameter("transmission must be > 0");
            log_t[i] = std::log(transmission[i]);
        }
    }
    for (std::size_t i = 0; i < n_raw; ++i) {
        const double t = p.t_start + dt_raw * static_cast<double>(i);
        p.phase[i] = interpolate(trace.grid, trace.phase, t);
        if (!log_t.empty()) p.log_t[i] = interpolate(trace.grid, log_t, t);
        p.carrier[i] = 2.0 * std::numbers::pi * params.f_beat * (t - p.t_start);
    }
    return p;
}

RawSeries render(const Plan& plan, const DetectionParams& params, double scale,
                 std::mt19937_64* rng) {
    RawSeries raw;
    raw.t_start = plan.t_start;
    raw.dt = plan.dt;
    raw.samples.resize(plan.phase.size());
    std::normal_distribution<double> noise(0.0, params.detector_noise_rms);
    const double er = params.reference_amplitude;
    const double ep = params.probe_amplitude;
    for (std::size_t i = 0; i < raw.samples.size(); ++i) {
        double phi = scale * plan.phase[i];
        if (rng && params.detector_noise_rms > 0.0) phi += noise(*rng);
        const double t_amp = std::exp(scale * plan.log_t[i]);
        raw.samples[i] = er * er + ep * ep * t_amp +
                         2.0 * er * ep * std::sqrt(t_amp) * std::cos(plan.carrier[i] + phi);
    }
    return raw;
}

// Raw step for a trace: an integer subdivision of a coarse grid, or an
// integer multiple of a fine one, so raw samples land on grid points.
std::pair<double, std::size_t> raw_sampling(const TimeGrid& grid, const DetectionParams& params) {
    const double dt_max = 1.0 / (kRawSamplesPerBeat * params.f_beat);
    double dt;
    if (grid.dt > dt_max) {
        dt = grid.dt / std::ceil(grid.dt / dt_max * (1.0 - 1e-12));
    } else {
        dt = grid.dt * std::floor(dt_max / grid.dt * (1.0 + 1e-12));
    }
    const auto n = static_cast<std::size_t>(std::floor(grid.duration() / dt * (1.0 + 1e-12))) + 1;
    return {dt, n};
}

}  // namespace

RawSeries synthesize_beat(const PhaseTrace& phase, const std::vector<double>& transmission,
                          const DetectionParams& params, std::size_t oversample) {
    phase.validate();
    params.validate();
    if (!transmission.empty() && transmission.size() != phase.size())
        throw InvalidParameter("transmission samples do not match grid");
    if (oversample < 1) throw InvalidParameter("oversample must be >= 1");
    const double rate = static_cast<double>(oversample) / phase.grid.dt;
    if (rate < kRawSamplesPerBeat * params.f_beat * (1.0 - 1e-9))
        throw SamplingError(fmt::format(
            "raw rate {:.4g} Hz is below {} x beat frequency {:.4g} Hz", rate,
            kRawSamplesPerBeat, params.f_beat));
    const double dt = phase.grid.dt / static_cast<double>(oversample);
    const std::size_t n = (phase.size() - 1) * oversample + 1;
    return render(make_plan(phase, transmission, params, dt, n), params, 1.0, nullptr);
}

PhaseTrace demodulate(const RawSeries& raw, const DetectionParams& params) {
    params.validate();
    if (!(raw.dt > 0.0) || raw.samples.size() < 2) throw InvalidParameter("raw series is empty");
    const double beats_per_bin = params.sampling_period * params.f_beat;
    if (beats_per_bin < 3.0)
        throw ResolutionError(fmt::format(
            "{:.3g} beat periods per {:.4g} s bin; at least 3 are needed", beats_per_bin,
            params.sampling_period));
    const double fs = 1.0 / raw.dt;
    if (fs < 2.5 * params.f_beat)
        throw SamplingError("raw series is sampled too coarsely for the beat frequency");

    const std::size_t n = raw.samples.size();
    const auto taps = lowpass_taps(params.f_beat / 4.0, fs);
    const std::size_t half = taps.size() / 2;
    // Bins cover only samples where the filter has full support.
    if (n < 2 * half + 2) throw ResolutionError("raw series is shorter than the low-pass filter");
    const std::size_t first = half;
    const std::size_t usable = n - 2 * half;
    const std::size_t n_bins = static_cast<std::size_t>(
        std::floor(static_cast<double>(usable) * raw.dt / params.sampling_period * (1.0 + 1e-12)));
    if (n_bins < 1) throw ResolutionError("raw series is shorter than one sampling period");

    std::vector<std::complex<double>> mixed(n);
    const double w = 2.0 * std::numbers::pi * params.f_beat;
    for (std::size_t i = 0; i < n; ++i) {
        const double arg = w * raw.dt * static_cast<double>(i);
        mixed[i] = raw.samples[i] * std::complex<double>(std::cos(arg), -std::sin(arg));
    }

    std::vector<double> bin_sum(n_bins, 0.0);
    std::vector<double> bin_ref(n_bins, 0.0);
    std::vector<std::size_t> bin_count(n_bins, 0);
    for (std::size_t i = first; i + half < n; ++i) {
        const auto bin = static_cast<std::size_t>(
            std::floor(static_cast<double>(i - first) * raw.dt / params.sampling_period));
        if (bin >= n_bins) break;
        std::complex<double> acc = 0.0;
        for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * mixed[i + half - k];
        double phi = std::arg(acc);
        if (bin_count[bin] == 0) {
            bin_ref[bin] = phi;
        } else {
            phi = bin_ref[bin] + std::remainder(phi - bin_ref[bin], 2.0 * std::numbers::pi);
        }
        bin_sum[bin] += phi;
        ++bin_count[bin];
    }

    PhaseTrace out;
    out.grid = TimeGrid{raw.time(first) + 0.5 * params.sampling_period, params.sampling_period, n_bins};
    out.phase.resize(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        double v = bin_sum[b] / static_cast<double>(bin_count[b]);
        if (b > 0) v = out.phase[b - 1] + std::remainder(v - out.phase[b - 1], 2.0 * std::numbers::pi);
        out.phase[b] = v;
    }
    return out;
}

namespace {

PhaseTrace shot_from_plan(const Plan& plan, const DetectionParams& params, std::size_t shot) {
    std::seed_seq seq{static_cast<std::uint32_t>(params.rng_seed),
                      static_cast<std::uint32_t>(params.rng_seed >> 32),
                      static_cast<std::uint32_t>(shot), static_cast<std::uint32_t>(shot >> 32)};
    std::mt19937_64 rng(seq);
    double scale = 1.0;
    if (params.atom_fluct_rms > 0.0) {
        std::normal_distribution<double> atoms(0.0, params.atom_fluct_rms);
        scale += atoms(rng);
    }
    return demodulate(render(plan, params, scale, &rng), params);
}

Plan plan_for(const PhaseTrace& clean, const DetectionParams& params) {
    clean.validate();
    params.validate();
    const auto [dt, n] = raw_sampling(clean.grid, params);
    return make_plan(clean, clean.transmission, params, dt, n);
}

}  // namespace

PhaseTrace simulate_shot(const PhaseTrace& clean, const DetectionParams& params, std::size_t shot) {
    return shot_from_plan(plan_for(clean, params), params, shot);
}

PhaseTrace run_shots(const PhaseTrace& clean, const DetectionParams& params) {
    const auto plan = plan_for(clean, params);
    const std::size_t n = params.n_shots;
    std::vector<PhaseTrace> shots(n);
    parallel_for(n, [&](std::size_t s) { shots[s] = shot_from_plan(plan, params, s); });

    PhaseTrace out;
    out.grid = shots.front().grid;
    const std::size_t bins = out.grid.n_samples;
    std::vector<double> sum(bins, 0.0);
    for (const auto& s : shots)
        for (std::size_t b = 0; b < bins; ++b) sum[b] += s.phase[b];
    out.phase.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) out.phase[b] = sum[b] / static_cast<double>(n);

    out.stderr_rad.assign(bins, 0.0);
    if (n > 1) {
        for (std::size_t b = 0; b < bins; ++b) {
            double ss = 0.0;
            for (const auto& s : shots) {
                const double d = s.phase[b] - out.phase[b];
                ss += d * d;
            }
            out.stderr_rad[b] = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
        }
    }
    out.notes = clean.notes;
    return out;
}

}  // namespace xpm::detect
