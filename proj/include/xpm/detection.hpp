#pragma once

// Beat-note readout: reference + probe interference, demodulation at the beat
// frequency, boxcar sampling and multi-shot averaging.

#include <cstdint>
#include <vector>

#include "xpm/trace.hpp"

namespace xpm::detect {

struct DetectionParams {
    double f_beat = 100e6;             // Hz
    double sampling_period = 67e-9;    // s
    std::size_t n_shots = 2500;
    double atom_fluct_rms = 0.15;      // fractional
    double detector_noise_rms = 0.1;   // rad per raw sample
    std::uint64_t rng_seed = 1;
    double reference_amplitude = 1.0;
    double probe_amplitude = 1.0;

    void validate() const;
};

// Detector voltage on a uniform raw grid.
struct RawSeries {
    double t_start = 0.0;
    double dt = 0.0;
    std::vector<double> samples;

    double time(std::size_t i) const { return t_start + dt * static_cast<double>(i); }
};

// Raw samples per beat period used by run_shots.
inline constexpr double kRawSamplesPerBeat = 8.0;

// V(t) = |Er exp(-i 2 pi f t) + Ep sqrt(T) exp(i phi)|^2 sampled at
// grid.dt / oversample, phase and transmission interpolated linearly.
// An empty transmission means T = 1.
RawSeries synthesize_beat(const PhaseTrace& phase, const std::vector<double>& transmission,
                          const DetectionParams& params, std::size_t oversample);

// Quadrature mixing, zero-phase windowed-sinc low-pass at f_beat/4, arg, then
// boxcar bins of sampling_period; bins are stamped at their centres.
PhaseTrace demodulate(const RawSeries& raw, const DetectionParams& params);

// Blackman-windowed sinc, unit DC gain, odd length.
std::vector<double> lowpass_taps(double cutoff_hz, double sample_rate_hz);

// One noisy shot: phase (and optical depth) scaled by 1 + eps, white phase
// noise on every raw sample. The random stream depends only on (seed, shot).
PhaseTrace simulate_shot(const PhaseTrace& clean, const DetectionParams& params, std::size_t shot);

// Pointwise mean over n_shots with per-bin standard error of the mean.
// Shots run in parallel and are summed in shot order.
PhaseTrace run_shots(const PhaseTrace& clean, const DetectionParams& params);

}  // namespace xpm::detect
