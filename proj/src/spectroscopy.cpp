#include "xpm/spectroscopy.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "xpm/bloch.hpp"
#include "xpm/errors.hpp"
#include "xpm/parallel.hpp"

namespace xpm::spectro {

void ScanCurve::validate() const {
    if (detuning.size() < 5) throw InvalidParameter("scan needs at least 5 points");
    if (transmission.size() != detuning.size() || phase.size() != detuning.size())
        throw InvalidParameter("scan arrays differ in length");
    for (std::size_t i = 1; i < detuning.size(); ++i)
        if (!(detuning[i] > detuning[i - 1]))
            throw InvalidParameter("scan detunings must be strictly increasing");
    for (double t : transmission)
        if (!(std::isfinite(t) && t > 0.0)) throw InvalidParameter("transmission must be > 0");
}

ScanCurve transmission_scan(const MediumParams& medium, const FieldParams& fields,
                            double omega_s_cw, double delta_lo, double delta_hi,
                            std::size_t n_points) {
    medium.validate();
    fields.validate();
    if (n_points < 51) throw InvalidParameter("scan needs at least 51 points");
    if (!(delta_hi > delta_lo)) throw InvalidParameter("scan range is empty");
    if (omega_s_cw < 0.0) throw InvalidParameter("signal Rabi frequency must be >= 0");

    const auto calib = bloch::calibrate_thin_medium(medium, fields);
    ScanCurve curve;
    curve.detuning.resize(n_points);
    curve.transmission.resize(n_points);
    curve.phase.resize(n_points);
    const double step = (delta_hi - delta_lo) / static_cast<double>(n_points - 1);
    parallel_for(n_points, [&](std::size_t i) {
        FieldParams f = fields;
        f.delta_2ph = delta_lo + step * static_cast<double>(i);
        bloch::DensityMatrix4 rho;
        try {
            rho = bloch::steady_state(medium, f, omega_s_cw);
        } catch (const SolverError& e) {
            throw SolverError(fmt::format("{} (two-photon detuning {:.6g} rad/s)", e.what(),
                                          f.delta_2ph),
                              e.condition);
        }
        const auto r = bloch::normalized_response(rho, bloch::cplx(f.omega_p, 0.0));
        curve.detuning[i] = f.delta_2ph;
        curve.transmission[i] = bloch::probe_transmission(r, calib);
        curve.phase[i] = bloch::probe_phase(r, calib);
    });
    return curve;
}

namespace {

std::vector<double> optical_depth(const ScanCurve& curve) {
    std::vector<double> od(curve.transmission.size());
    std::transform(curve.transmission.begin(), curve.transmission.end(), od.begin(),
                   [](double t) { return -std::log(t); });
    return od;
}

std::size_t deepest(const std::vector<double>& od) {
    return static_cast<std::size_t>(std::min_element(od.begin(), od.end()) - od.begin());
}

double parabolic_vertex(const std::vector<double>& x, const std::vector<double>& y, std::size_t i) {
    if (i == 0 || i + 1 >= x.size()) return x[i];
    const double h = x[i + 1] - x[i];
    const double hl = x[i] - x[i - 1];
    // Vertex of the parabola through three (possibly uneven) points.
    const double d1 = (y[i] - y[i - 1]) / hl;
    const double d2 = (y[i + 1] - y[i]) / h;
    const double curv = (d2 - d1) / (0.5 * (h + hl));
    if (curv == 0.0) return x[i];
    return 0.5 * (x[i] + x[i - 1]) - d1 / curv;
}

// Half-maximum crossings of depth(x) = floor - od(x), searched outward from i0.
std::pair<double, double> half_width_crossings(const ScanCurve& curve, const std::vector<double>& od,
                                               double floor, std::size_t i0) {
    const auto& x = curve.detuning;
    const double half = 0.5 * (floor - od[i0]);
    auto depth = [&](std::size_t i) { return floor - od[i]; };
    std::size_t l = i0;
    while (l > 0 && depth(l - 1) > half) --l;
    std::size_t r = i0;
    while (r + 1 < x.size() && depth(r + 1) > half) ++r;
    if (l == 0 || r + 1 == x.size())
        throw ShapeError("transparency feature is not resolved inside the scan range");
    auto cross = [&](std::size_t a, std::size_t b) {
        const double ya = depth(a), yb = depth(b);
        return x[a] + (x[b] - x[a]) * (half - ya) / (yb - ya);
    };
    return {cross(l - 1, l), cross(r, r + 1)};
}

}  // namespace

SpectralWindow window_fwhm(const ScanCurve& curve) {
    curve.validate();
    const auto od = optical_depth(curve);
    const auto& x = curve.detuning;
    const std::size_t n = x.size();
    const std::size_t i0 = deepest(od);
    const double od_max = *std::max_element(od.begin(), od.end());
    if (i0 == 0 || i0 + 1 == n || !(od_max - od[i0] > 1e-9 * std::max(1.0, od_max)))
        throw ShapeError("no transparency feature in scan");

    const std::size_t n_edge = std::max<std::size_t>(2, n / 5);
    double floor = 0.0;
    for (std::size_t i = 0; i < n_edge; ++i) floor += od[i] + od[n - 1 - i];
    floor /= 2.0 * static_cast<double>(n_edge);

    // Fit od = F - K / (1 + ((x - xc)/h)^2) on the edge samples, re-estimating h.
    const double xc = parabolic_vertex(x, od, i0);
    for (int it = 0; it < 4; ++it) {
        if (!(floor > od[i0])) break;
        const auto [lo, hi] = half_width_crossings(curve, od, floor, i0);
        const double h = 0.5 * (hi - lo);
        double s_g = 0, s_gg = 0, s_y = 0, s_gy = 0, m = 0;
        for (std::size_t k = 0; k < 2 * n_edge; ++k) {
            const std::size_t i = k < n_edge ? k : n - 1 - (k - n_edge);
            const double u = (x[i] - xc) / h;
            const double g = 1.0 / (1.0 + u * u);
            s_g += g;
            s_gg += g * g;
            s_y += od[i];
            s_gy += g * od[i];
            m += 1.0;
        }
        const double det = m * s_gg - s_g * s_g;
        if (!(std::abs(det) > 1e-14 * m * s_gg)) break;
        floor = (s_y * s_gg - s_g * s_gy) / det;
    }
    if (!(floor > od[i0])) throw ShapeError("no transparency feature above the absorption floor");
    const auto [lo, hi] = half_width_crossings(curve, od, floor, i0);
    return SpectralWindow{hi - lo};
}

double transparency_center(const ScanCurve& curve) {
    curve.validate();
    const auto od = optical_depth(curve);
    const std::size_t i0 = deepest(od);
    if (i0 == 0 || i0 + 1 == od.size())
        throw ShapeError("transmission maximum lies on the scan edge");
    return parabolic_vertex(curve.detuning, od, i0);
}

double expected_window(const MediumParams& medium, const FieldParams& fields) {
    return 2.0 * medium.gamma +
           (fields.omega_c * fields.omega_c + fields.omega_p * fields.omega_p) / medium.Gamma3;
}

namespace {

double locate_center(const MediumParams& medium, const FieldParams& fields, double omega_s,
                     double half_range) {
    auto coarse = transmission_scan(medium, fields, omega_s, -half_range, half_range, 201);
    const double c0 = transparency_center(coarse);
    const double step = coarse.detuning[1] - coarse.detuning[0];
    auto fine = transmission_scan(medium, fields, omega_s, c0 - 5.0 * step, c0 + 5.0 * step, 51);
    return transparency_center(fine);
}

}  // namespace

double stark_shift(const MediumParams& medium, const FieldParams& fields, double omega_s_cw) {
    if (omega_s_cw < 0.0) throw InvalidParameter("signal Rabi frequency must be >= 0");
    if (std::abs(fields.delta_s) < 5.0 * omega_s_cw)
        throw PreconditionError(fmt::format(
            "signal detuning {:.4g} rad/s is below 5 x signal Rabi frequency {:.4g} rad/s",
            std::abs(fields.delta_s), omega_s_cw));
    if (omega_s_cw == 0.0) return 0.0;
    const double approx = omega_s_cw * omega_s_cw / (4.0 * std::abs(fields.delta_s));
    const double half_range = 0.5 * expected_window(medium, fields) + 2.0 * approx;
    return locate_center(medium, fields, omega_s_cw, half_range) -
           locate_center(medium, fields, 0.0, half_range);
}

double coupling_for_window(const MediumParams& medium, const FieldParams& fields,
                           const SpectralWindow& target) {
    target.validate();
    const double delta = target.delta_eit;
    const double excess = delta - 2.0 * medium.gamma;
    if (!(excess > 0.0))
        throw DomainError(fmt::format("window {:.4g} rad/s is not above the dephasing limit {:.4g}",
                                      delta, 2.0 * medium.gamma));

    auto measure = [&](double oc2) {
        FieldParams f = fields;
        f.omega_c = std::sqrt(oc2);
        const double w = std::max(4.0 * delta, 4.0 * expected_window(medium, f));
        return window_fwhm(transmission_scan(medium, f, 0.0, -w, w, 241)).delta_eit;
    };

    double x0 = std::max(medium.Gamma3 * excess - fields.omega_p * fields.omega_p,
                         0.25 * medium.Gamma3 * excess);
    double f0 = measure(x0) - delta;
    double x1 = x0 * (1.0 - 0.2 * f0 / delta);
    x1 = std::max(x1, 0.05 * x0);
    for (int it = 0; it < 12; ++it) {
        const double f1 = measure(x1) - delta;
        if (std::abs(f1) < 1e-5 * delta || f1 == f0) {
            x0 = x1;
            break;
        }
        double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        x2 = std::clamp(x2, 0.2 * x1, 5.0 * x1);
        x0 = x1;
        f0 = f1;
        x1 = x2;
        if (it == 11) x0 = x1;
    }
    return std::sqrt(x0);
}

}  // namespace xpm::spectro
