#pragma once

// Least-squares fit of the exponential-convolved Gaussian profile
//   phi(t) = baseline + amplitude * g(t - t0; tau_s, tau)
// where g is the unit-area response of a causal exponential (time constant
// tau) to a Gaussian flux of RMS width tau_s.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xpm/trace.hpp"

namespace xpm::fit {

enum Param : int { kAmplitude = 0, kTauS = 1, kTau = 2, kT0 = 3, kBaseline = 4 };
inline constexpr int kNumParams = 5;

using Params = std::array<double, kNumParams>;
using Covariance = Eigen::Matrix<double, kNumParams, kNumParams>;

struct FitResult {
    double amplitude = 0.0;  // rad s
    double tau_s = 0.0;      // s
    double tau = 0.0;        // s
    double t0 = 0.0;         // s
    double baseline = 0.0;   // rad
    Covariance covariance = Covariance::Zero();
    double residual_rms = 0.0;  // rad
    bool converged = false;
    int n_iterations = 0;
    std::vector<std::string> warnings;

    Params params() const { return {amplitude, tau_s, tau, t0, baseline}; }
    double sigma(Param p) const;
};

struct InitialGuess {
    Params params{};
    std::vector<std::string> warnings;
};

// Unit-area profile g and its partial derivatives with respect to
// (amplitude, tau_s, tau, t0, baseline) of the full model.
double model(double t, const Params& p);
Params model_gradient(double t, const Params& p);

// Heuristic start: t0 one bin before the peak, tau from a log-linear fit of
// the late tail, tau_s from the 10-90 % rise, amplitude from the area and the
// baseline from the bins before the rise.
InitialGuess initial_guess(const PhaseTrace& trace);

// Weighted fit. Weights default to 1/stderr^2 when the trace carries standard
// errors (floored at 10 % of the largest), otherwise uniform. Throws
// FlatTraceError for a trace with no feature.
FitResult fit_phase_profile(const PhaseTrace& trace,
                            const std::optional<std::vector<double>>& weights = std::nullopt,
                            const std::optional<Params>& init = std::nullopt);

struct RiseFall {
    double rise = 0.0;
    double rise_sigma = 0.0;
    double fall = 0.0;
    double fall_sigma = 0.0;
};

// (tau_s, tau) with 1-sigma errors. Throws FitNotConverged for a failed fit.
RiseFall rise_fall_times(const FitResult& fit);

// Time from the peak of (phase - baseline) to its first fall below 1/e of the
// peak, by linear interpolation. Throws ShapeError if the trace never decays.
double direct_decay_time(const PhaseTrace& trace, double baseline);

}  // namespace xpm::fit
