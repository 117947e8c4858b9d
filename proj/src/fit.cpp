#include "xpm/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "xpm/errors.hpp"
#include "xpm/lti.hpp"

namespace xpm::fit {

double FitResult::sigma(Param p) const {
    return std::sqrt(std::max(covariance(p, p), 0.0));
}

namespace {

double unit_profile(double u, double tau_s, double tau) {
    SignalPulse pulse;
    pulse.tau_s = tau_s;
    pulse.n_ph = 1.0;
    pulse.t0 = 0.0;
    return lti::phase_profile(u, lti::LtiKernel{1.0, tau}, pulse);
}

double unit_gaussian(double u, double tau_s) {
    return std::exp(-0.5 * u * u / (tau_s * tau_s)) / (std::sqrt(2.0 * std::numbers::pi) * tau_s);
}

}  // namespace

double model(double t, const Params& p) {
    return p[kBaseline] + p[kAmplitude] * unit_profile(t - p[kT0], p[kTauS], p[kTau]);
}

Params model_gradient(double t, const Params& p) {
    const double u = t - p[kT0];
    const double ts = p[kTauS];
    const double tau = p[kTau];
    const double a = p[kAmplitude];
    const double g = unit_profile(u, ts, tau);
    const double G = unit_gaussian(u, ts);
    Params d{};
    d[kAmplitude] = g;
    d[kTauS] = a * (g * ts / (tau * tau) - G * (u / (ts * tau) + ts / (tau * tau)));
    d[kTau] = a * (g * (u / (tau * tau) - ts * ts / (tau * tau * tau) - 1.0 / tau) +
                   G * ts * ts / (tau * tau * tau));
    d[kT0] = a * (g - G) / tau;
    d[kBaseline] = 1.0;
    return d;
}

namespace {

void require_non_flat(const PhaseTrace& trace) {
    const auto [lo, hi] = std::minmax_element(trace.phase.begin(), trace.phase.end());
    const double scale = std::max(std::abs(*lo), std::abs(*hi));
    if (!(*hi - *lo > 1e-12 * scale) || scale == 0.0)
        throw FlatTraceError("trace has no phase excursion to fit");
}

// Index of the largest excursion from the first sample and its sign.
std::pair<std::size_t, double> extremum(const std::vector<double>& y, double ref) {
    std::size_t imax = 0;
    for (std::size_t i = 1; i < y.size(); ++i)
        if (std::abs(y[i] - ref) > std::abs(y[imax] - ref)) imax = i;
    return {imax, y[imax] >= ref ? 1.0 : -1.0};
}

}  // namespace

namespace {

// Edge and tail heuristics on an excursion r(i) = sign (y_i - baseline).
struct Shape {
    std::size_t ip = 0;
    double rise = 0.0;  // 10-90 % interval / kRiseIntervalPerSigma
    double tail = 0.0;  // log-linear decay constant, 0 when unusable
};

Shape measure_shape(const std::vector<double>& y, const TimeGrid& grid, double baseline,
                    double sign, std::size_t ip) {
    Shape s;
    s.ip = ip;
    const std::size_t n = y.size();
    const double dt = grid.dt;
    auto rel = [&](std::size_t i) { return sign * (y[i] - baseline); };
    const double peak = rel(ip);
    auto first_crossing = [&](double level) {
        for (std::size_t i = 1; i <= ip; ++i) {
            const double y0 = rel(i - 1), y1 = rel(i);
            if (y0 < level && y1 >= level) return grid.time(i - 1) + dt * (level - y0) / (y1 - y0);
        }
        return grid.time(0);
    };
    s.rise = (first_crossing(0.9 * peak) - first_crossing(0.1 * peak)) / lti::kRiseIntervalPerSigma;

    // Log-linear fit on the last 60 % of the decay, which ends where the
    // excursion first falls below 10 % of the peak.
    std::size_t decay_end = ip;
    while (decay_end + 1 < n && rel(decay_end + 1) > 0.1 * peak) ++decay_end;
    const std::size_t start =
        ip + static_cast<std::size_t>(std::ceil(0.4 * static_cast<double>(decay_end - ip)));
    double s0 = 0, st = 0, sl = 0, stt = 0, stl = 0;
    for (std::size_t i = std::max(start, ip + 1); i <= decay_end; ++i) {
        const double v = rel(i);
        if (!(v > 0.0)) continue;
        const double t = grid.time(i), l = std::log(v);
        s0 += 1;
        st += t;
        sl += l;
        stt += t * t;
        stl += t * l;
    }
    const double det = s0 * stt - st * st;
    if (s0 >= 3 && det > 0.0) {
        const double slope = (s0 * stl - st * sl) / det;
        if (slope < 0.0) s.tail = -1.0 / slope;
    }
    return s;
}

}  // namespace

InitialGuess initial_guess(const PhaseTrace& trace) {
    trace.validate();
    require_non_flat(trace);
    InitialGuess out;
    const auto& y = trace.phase;
    const std::size_t n = y.size();
    const double dt = trace.grid.dt;

    auto [ip, sign] = extremum(y, y.front());
    auto rel = [&](std::size_t i, double base) { return sign * (y[i] - base); };

    double baseline = 0.0;
    {
        const double peak0 = rel(ip, y.front());
        std::size_t i10 = 0;
        while (i10 < ip && rel(i10, y.front()) < 0.1 * peak0) ++i10;
        const std::size_t n_pre = i10 > 0 ? i10 - 1 : 0;
        if (n_pre < 5) {
            out.warnings.push_back(fmt::format(
                "baseline estimation: only {} pre-pulse bins; baseline initialized to 0", n_pre));
        } else {
            for (std::size_t i = 0; i < n_pre; ++i) baseline += y[i];
            baseline /= static_cast<double>(n_pre);
        }
    }

    const Shape data = measure_shape(y, trace.grid, baseline, sign, ip);
    double tau_s = data.rise > 0.0 ? data.rise : 0.5 * dt;
    double tau = data.tail;
    double t0 = trace.time(ip) - dt;
    if (!(tau > 0.0)) {
        out.warnings.push_back("tail fit: no usable decay after the peak");
        tau = std::max(trace.grid.t_end() - trace.time(ip), 2.0 * dt) / 3.0;
    } else if (data.rise > 0.0) {
        // The heuristics are exact only for tau >> tau_s (rise) and
        // tau_s << tau (tail). Apply them to the model at the current guess
        // and rescale until they reproduce the data.
        for (int it = 0; it < 6; ++it) {
            std::vector<double> m(n);
            const Params unit{1.0, tau_s, tau, t0, 0.0};
            for (std::size_t i = 0; i < n; ++i) m[i] = model(trace.time(i), unit);
            const auto [im, msign] = extremum(m, 0.0);
            if (im == 0 || im + 1 >= n) break;
            const Shape ms = measure_shape(m, trace.grid, 0.0, 1.0, im);
            if (!(ms.rise > 0.0 && ms.tail > 0.0)) break;
            tau_s *= std::clamp(data.rise / ms.rise, 0.5, 2.0);
            tau *= std::clamp(data.tail / ms.tail, 0.5, 2.0);
            t0 += trace.time(ip) - trace.time(im);
        }
    }

    double area = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        area += 0.5 * dt * (rel(i, baseline) + rel(i + 1, baseline));
    area += std::max(rel(n - 1, baseline), 0.0) * tau;

    out.params = {sign * area, tau_s, tau, t0, baseline};
    return out;
}

FitResult fit_phase_profile(const PhaseTrace& trace, const std::optional<std::vector<double>>& weights,
                            const std::optional<Params>& init) {
    trace.validate();
    const std::size_t m = trace.size();
    if (m < 30) throw InvalidParameter(fmt::format("fit needs at least 30 bins, got {}", m));
    require_non_flat(trace);

    std::vector<double> w(m, 1.0);
    if (weights) {
        if (weights->size() != m) throw InvalidParameter("weights do not match trace");
        w = *weights;
    } else if (trace.has_stderr()) {
        // Floor at 10 % of the largest error so bins with vanishing scatter
        // cannot dominate the fit.
        const double floor =
            0.1 * *std::max_element(trace.stderr_rad.begin(), trace.stderr_rad.end());
        if (floor > 0.0)
            for (std::size_t i = 0; i < m; ++i) {
                const double s = std::max(trace.stderr_rad[i], floor);
                w[i] = 1.0 / (s * s);
            }
    }

    FitResult result;
    Params p;
    if (init) {
        p = *init;
    } else {
        auto guess = initial_guess(trace);
        p = guess.params;
        result.warnings = std::move(guess.warnings);
    }
    if (!(p[kTau] > 0.0 && p[kTauS] > 0.0)) throw InvalidParameter("initial tau and tau_s must be > 0");

    double y_scale = 0.0;
    for (double v : trace.phase) y_scale = std::max(y_scale, std::abs(v));
    auto param_scale = [&](const Params& q) {
        Params s{};
        s[kAmplitude] = std::abs(q[kAmplitude]);
        s[kTauS] = q[kTauS];
        s[kTau] = q[kTau];
        s[kT0] = q[kTauS] + q[kTau];
        s[kBaseline] = y_scale;
        return s;
    };

    using Jac = Eigen::Matrix<double, Eigen::Dynamic, kNumParams>;
    Jac J(m, kNumParams);
    Eigen::VectorXd r(m);
    auto evaluate = [&](const Params& q, Eigen::VectorXd& res) {
        double cost = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            res[static_cast<Eigen::Index>(i)] = trace.phase[i] - model(trace.time(i), q);
            cost += w[i] * res[static_cast<Eigen::Index>(i)] * res[static_cast<Eigen::Index>(i)];
        }
        return cost;
    };
    auto jacobian = [&](const Params& q) {
        for (std::size_t i = 0; i < m; ++i) {
            const auto d = model_gradient(trace.time(i), q);
            for (int k = 0; k < kNumParams; ++k) J(static_cast<Eigen::Index>(i), k) = d[k];
        }
    };
    const Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(m));

    double cost = evaluate(p, r);
    double lambda = 1e-3;
    Eigen::VectorXd r_try(m);
    int it = 0;
    bool converged = cost == 0.0;
    for (; it < 500 && !converged; ++it) {
        jacobian(p);
        const Eigen::Matrix<double, kNumParams, kNumParams> A = J.transpose() * wv.asDiagonal() * J;
        const Eigen::Matrix<double, kNumParams, 1> g = J.transpose() * (wv.array() * r.array()).matrix();
        bool accepted = false;
        while (!accepted) {
            Eigen::Matrix<double, kNumParams, kNumParams> M = A;
            for (int k = 0; k < kNumParams; ++k) M(k, k) += lambda * std::max(A(k, k), 1e-300);
            const Eigen::Matrix<double, kNumParams, 1> delta = M.ldlt().solve(g);
            Params q = p;
            for (int k = 0; k < kNumParams; ++k) q[k] += delta[k];

            const auto s = param_scale(p);
            double step = 0.0;
            for (int k = 0; k < kNumParams; ++k)
                if (s[k] > 0.0) step = std::max(step, std::abs(delta[k]) / s[k]);
            if (!std::isfinite(step)) {
                lambda *= 10.0;
                if (lambda > 1e30) break;
                continue;
            }

            double c_try = std::numeric_limits<double>::infinity();
            if (q[kTau] > 0.0 && q[kTauS] > 0.0) c_try = evaluate(q, r_try);
            if (c_try < cost) {
                const double rel_change = (cost - c_try) / cost;
                p = q;
                r = r_try;
                cost = c_try;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (rel_change < 1e-10 || step < 1e-12 || cost == 0.0) converged = true;
            } else {
                lambda *= 10.0;
                if (step < 1e-12) {
                    converged = true;
                    break;
                }
                if (lambda > 1e30) break;
            }
        }
        if (!accepted && !converged) {
            ++it;
            break;
        }
    }

    result.amplitude = p[kAmplitude];
    result.tau_s = p[kTauS];
    result.tau = p[kTau];
    result.t0 = p[kT0];
    result.baseline = p[kBaseline];
    result.n_iterations = it;
    result.converged = converged && p[kTau] > 0.0 && p[kTauS] > 0.0;
    result.residual_rms = std::sqrt(r.squaredNorm() / static_cast<double>(m));
    if (!result.converged)
        result.warnings.push_back(fmt::format("fit did not converge after {} iterations", it));

    jacobian(p);
    const Eigen::Matrix<double, kNumParams, kNumParams> A = J.transpose() * wv.asDiagonal() * J;
    const double dof = static_cast<double>(m) - kNumParams;
    Eigen::Matrix<double, kNumParams, kNumParams> cov =
        A.completeOrthogonalDecomposition().pseudoInverse() * (cost / dof);
    result.covariance = 0.5 * (cov + cov.transpose());
    return result;
}

RiseFall rise_fall_times(const FitResult& fit) {
    if (!fit.converged) throw FitNotConverged("rise and fall times need a converged fit");
    return RiseFall{fit.tau_s, fit.sigma(kTauS), fit.tau, fit.sigma(kTau)};
}

double direct_decay_time(const PhaseTrace& trace, double baseline) {
    trace.validate();
    const auto [ip, sign] = extremum(trace.phase, baseline);
    const double peak = sign * (trace.phase[ip] - baseline);
    if (!(peak > 0.0)) throw ShapeError("trace has no excursion from the baseline");
    const double level = peak / std::numbers::e;
    for (std::size_t i = ip + 1; i < trace.size(); ++i) {
        const double y0 = sign * (trace.phase[i - 1] - baseline);
        const double y1 = sign * (trace.phase[i] - baseline);
        if (y1 <= level) {
            const double t = trace.time(i - 1) + trace.grid.dt * (y0 - level) / (y0 - y1);
            return t - trace.time(ip);
        }
    }
    throw ShapeError("trace does not fall below 1/e of its peak");
}

}  // namespace xpm::fit
