#include "xpm/bloch.hpp"

#include <algorithm>
#include <cmath>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "xpm/errors.hpp"

namespace xpm::bloch {

namespace {

using Op = Eigen::Matrix4cd;
using State = std::vector<cplx>;

constexpr cplx kI{0.0, 1.0};

Op ket_bra(int i, int j) {
    Op m = Op::Zero();
    m(i, j) = 1.0;
    return m;
}

// vec(A X B) = (B^T kron A) vec(X), column-major vec.
Superop kron(const Op& a, const Op& b) {
    Superop out;
    for (int ar = 0; ar < 4; ++ar)
        for (int ac = 0; ac < 4; ++ac)
            for (int br = 0; br < 4; ++br)
                for (int bc = 0; bc < 4; ++bc) out(4 * ar + br, 4 * ac + bc) = a(ar, ac) * b(br, bc);
    return out;
}

Superop commutator(const Op& h) {
    const Op id = Op::Identity();
    return -kI * (kron(id, h) - kron(h.transpose(), id));
}

Superop dissipator(const Op& l) {
    const Op id = Op::Identity();
    const Op ldl = l.adjoint() * l;
    return kron(l.conjugate(), l) - 0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id);
}

template <class Rhs, class Observer>
void integrate_on_grid(Rhs rhs, State& x, const TimeGrid& grid, const IntegratorOptions& opt,
                       Observer observer) {
    namespace odeint = boost::numeric::odeint;
    std::vector<double> times(grid.n_samples);
    for (std::size_t i = 0; i < grid.n_samples; ++i) times[i] = grid.time(i);
    auto stepper = odeint::make_dense_output(opt.abs_tol, opt.rel_tol,
                                             odeint::runge_kutta_dopri5<State>());
    try {
        odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), grid.dt, observer);
    } catch (const odeint::odeint_error& e) {
        throw StiffnessError(fmt::format(
            "integration stalled ({}); loosen the tolerance or shorten the grid step", e.what()));
    }
}

}  // namespace

void StateDiagnostics::absorb(const DensityMatrix4& rho, bool full_spectrum) {
    max_trace_error = std::max(max_trace_error, std::abs(rho.trace() - 1.0));
    max_hermiticity_error = std::max(max_hermiticity_error, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) max_coherence = std::max(max_coherence, std::abs(rho(i, j)));
    const DensityMatrix4 herm = 0.5 * (rho + rho.adjoint());
    Eigen::LLT<DensityMatrix4> llt(herm + 1e-9 * DensityMatrix4::Identity());
    const bool psd = llt.info() == Eigen::Success;
    if (!psd) ++positivity_violations;
    if (full_spectrum || !psd) {
        Eigen::SelfAdjointEigenSolver<DensityMatrix4> es(herm, Eigen::EigenvaluesOnly);
        min_eigenvalue = std::min(min_eigenvalue, es.eigenvalues().minCoeff());
    }
}

void StateDiagnostics::merge(const StateDiagnostics& o) {
    max_trace_error = std::max(max_trace_error, o.max_trace_error);
    max_hermiticity_error = std::max(max_hermiticity_error, o.max_hermiticity_error);
    min_eigenvalue = std::min(min_eigenvalue, o.min_eigenvalue);
    positivity_violations += o.positivity_violations;
    max_coherence = std::max(max_coherence, o.max_coherence);
}

bool StateDiagnostics::physical() const {
    return max_trace_error < 1e-8 && max_hermiticity_error < 1e-12 && positivity_violations == 0 &&
           min_eigenvalue >= -1e-9 && max_coherence <= 0.5 + 1e-6;
}

Liouvillian Liouvillian::build(const MediumParams& medium, const FieldParams& fields) {
    medium.validate();
    fields.validate();
    Op h = Op::Zero();
    h(1, 1) = -fields.delta_2ph;
    h(2, 2) = -fields.delta_p;
    h(3, 3) = -(fields.delta_2ph + fields.delta_s);
    h(2, 1) = h(1, 2) = -0.5 * fields.omega_c;

    Superop fixed = commutator(h);
    fixed += dissipator(std::sqrt(medium.branch3 * medium.Gamma3) * ket_bra(0, 2));
    fixed += dissipator(std::sqrt((1.0 - medium.branch3) * medium.Gamma3) * ket_bra(1, 2));
    fixed += dissipator(std::sqrt(medium.Gamma4) * ket_bra(1, 3));
    fixed += dissipator(std::sqrt(0.5 * medium.gamma) * (ket_bra(0, 0) - ket_bra(1, 1)));

    Op hp_re = -0.5 * (ket_bra(2, 0) + ket_bra(0, 2));
    Op hp_im = -0.5 * kI * (ket_bra(2, 0) - ket_bra(0, 2));
    Op hs = -0.5 * (ket_bra(3, 1) + ket_bra(1, 3));
    return Liouvillian{fixed, commutator(hp_re), commutator(hp_im), commutator(hs)};
}

Superop Liouvillian::at(cplx omega_p, double omega_s) const {
    return fixed + omega_p.real() * probe_re + omega_p.imag() * probe_im + omega_s * signal;
}

double max_grid_step(const MediumParams& medium, const FieldParams& fields) {
    const double fastest = std::max({medium.Gamma3, medium.Gamma4, std::abs(fields.delta_s), fields.omega_c});
    return 0.05 / fastest;
}

double signal_peak_rabi(const SignalPulse& pulse, double rabi_per_sqrt_watt) {
    return rabi_per_sqrt_watt * std::sqrt(pulse.resolved_peak_power());
}

double signal_rabi(double t, const SignalPulse& pulse, double peak_rabi) {
    const double u = t - pulse.t0;
    return peak_rabi * std::exp(-u * u / (4.0 * pulse.tau_s * pulse.tau_s));
}

DensityMatrix4 steady_state(const MediumParams& medium, const FieldParams& fields,
                            double omega_s_cw) {
    return steady_state(medium, fields, cplx(fields.omega_p, 0.0), omega_s_cw);
}

// Solves L rho = 0. When the kernel is degenerate (a level decoupled from all
// fields and decay feeding), returns the long-time limit reached from the
// prepared state |1><1|: the kernel projection along the range of L, fixed by
// the conserved functionals (left null vectors).
DensityMatrix4 steady_state(const MediumParams& medium, const FieldParams& fields, cplx omega_p,
                            double omega_s_cw) {
    const auto liou = Liouvillian::build(medium, fields);
    const Superop l = liou.at(omega_p, omega_s_cw);
    const double norm = l.cwiseAbs().maxCoeff();
    Eigen::JacobiSVD<Superop> svd(l / norm, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();  // descending

    int nullity = 0;
    for (int i = 15; i >= 0 && sv(i) < 1e-11 * sv(0); --i) ++nullity;
    if (nullity == 0) {
        if (sv(15) > 1e-7 * sv(0))
            throw SolverError("no steady state: generator is not singular", sv(0) / sv(15));
        nullity = 1;
    }
    const double condition = nullity < 16 ? sv(0) / sv(15 - nullity) : INFINITY;
    if (!(condition < 1e14))
        throw SolverError(fmt::format("ill-conditioned steady-state system (cond ~ {:.3g})", condition),
                          condition);

    const auto right = svd.matrixV().rightCols(nullity);
    const auto left = svd.matrixU().rightCols(nullity);
    const Eigen::MatrixXcd overlap = left.adjoint() * right;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(overlap);
    if (!lu.isInvertible())
        throw SolverError("degenerate steady-state kernel is not diagonalizable", condition);
    StateVector rho0 = StateVector::Zero();
    rho0(0) = 1.0;
    const Eigen::VectorXcd coeffs = lu.solve(left.adjoint() * rho0);
    StateVector v = right * coeffs;
    DensityMatrix4 rho = unvectorize(v);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace();
    return rho;
}

CoherenceTrace evolve(const MediumParams& medium, const FieldParams& fields,
                      const SignalPulse& pulse, const TimeGrid& grid,
                      const DensityMatrix4& initial, double rabi_per_sqrt_watt,
                      const IntegratorOptions& options) {
    pulse.validate();
    grid.validate();
    if (!fields.weak_probe()) throw PreconditionError("probe must satisfy omega_p < omega_c / 5");
    const double dt_max = max_grid_step(medium, fields);
    if (grid.dt > dt_max * (1.0 + 1e-12))
        throw PreconditionError(
            fmt::format("grid step {:.3g} s does not resolve the fastest rate (need <= {:.3g} s)",
                        grid.dt, dt_max));

    const auto liou = Liouvillian::build(medium, fields);
    const Superop base = liou.at(cplx(fields.omega_p, 0.0), 0.0);
    const double peak = signal_peak_rabi(pulse, rabi_per_sqrt_watt);

    auto rhs = [&](const State& x, State& dxdt, double t) {
        dxdt.resize(16);
        Eigen::Map<const StateVector> xv(x.data());
        Eigen::Map<StateVector> dv(dxdt.data());
        const double os = signal_rabi(t, pulse, peak);
        dv.noalias() = base * xv;
        if (os != 0.0) dv.noalias() += os * (liou.signal * xv);
    };

    CoherenceTrace out;
    out.grid = grid;
    out.rho31.reserve(grid.n_samples);
    out.rho21.reserve(grid.n_samples);
    std::size_t sample = 0;
    auto observer = [&](const State& x, double) {
        const DensityMatrix4 rho = Eigen::Map<const DensityMatrix4>(x.data());
        out.rho31.push_back(rho(2, 0));
        out.rho21.push_back(rho(1, 0));
        out.diagnostics.absorb(rho, sample % 64 == 0);
        ++sample;
    };
    State x(initial.data(), initial.data() + 16);
    integrate_on_grid(rhs, x, grid, options, observer);
    out.final_state = Eigen::Map<const DensityMatrix4>(x.data());
    return out;
}

ThinMediumCalibration calibrate_thin_medium(const MediumParams& medium, const FieldParams& fields) {
    medium.validate();
    if (medium.d0 == 0.0) return ThinMediumCalibration{0.0};
    if (!(fields.omega_p > 0.0))
        throw CalibrationError("zero absorptive response: probe Rabi frequency is zero");
    MediumParams closed = medium;
    closed.branch3 = 1.0;
    FieldParams bare = fields;
    bare.omega_c = 0.0;
    bare.delta_p = 0.0;
    bare.delta_2ph = 0.0;
    const auto rho = steady_state(closed, bare, 0.0);
    const double absorptive = normalized_response(rho, cplx(fields.omega_p, 0.0)).imag();
    if (!(absorptive > 0.0)) throw CalibrationError("zero absorptive response in the two-level limit");
    return ThinMediumCalibration{medium.d0 / (2.0 * absorptive)};
}

cplx normalized_response(const DensityMatrix4& rho, cplx omega_p) { return rho(2, 0) / omega_p; }

double probe_phase(cplx response, const ThinMediumCalibration& calib) {
    return -calib.scale * response.real();
}

double probe_transmission(cplx response, const ThinMediumCalibration& calib) {
    return std::exp(-2.0 * calib.scale * response.imag());
}

PhaseTrace probe_response(const CoherenceTrace& trace, const ThinMediumCalibration& calib,
                          const FieldParams& fields) {
    PhaseTrace out;
    out.grid = trace.grid;
    out.phase.resize(trace.rho31.size());
    out.transmission.resize(trace.rho31.size());
    if (fields.omega_p == 0.0) {
        std::fill(out.transmission.begin(), out.transmission.end(), 1.0);
        return out;
    }
    for (std::size_t i = 0; i < trace.rho31.size(); ++i) {
        const cplx r = trace.rho31[i] / fields.omega_p;
        out.phase[i] = probe_phase(r, calib);
        out.transmission[i] = probe_transmission(r, calib);
    }
    return out;
}

SlabResult propagate_slabs(const MediumParams& medium, const FieldParams& fields,
                           const SignalPulse& pulse, const TimeGrid& grid, int n_slabs,
                           double rabi_per_sqrt_watt, const IntegratorOptions& options) {
    if (n_slabs < 1) throw InvalidParameter("n_slabs must be >= 1");
    if (medium.d0 / n_slabs > 0.5)
        throw AccuracyError(fmt::format("per-slab OD {:.3g} exceeds 0.5; use more slabs",
                                        medium.d0 / n_slabs));
    pulse.validate();
    grid.validate();
    if (!fields.weak_probe()) throw PreconditionError("probe must satisfy omega_p < omega_c / 5");
    const double dt_max = max_grid_step(medium, fields);
    if (grid.dt > dt_max * (1.0 + 1e-12))
        throw PreconditionError(
            fmt::format("grid step {:.3g} s does not resolve the fastest rate (need <= {:.3g} s)",
                        grid.dt, dt_max));

    const auto calib = calibrate_thin_medium(medium, fields);
    const double slab_scale = calib.scale / n_slabs;
    const auto liou = Liouvillian::build(medium, fields);
    const Superop base = liou.at(cplx(0.0, 0.0), 0.0);
    const double peak = signal_peak_rabi(pulse, rabi_per_sqrt_watt);
    const cplx probe_in(fields.omega_p, 0.0);
    const auto n = static_cast<std::size_t>(n_slabs);

    // Initial steady states, cascading the probe through the slices.
    State x(16 * n);
    {
        cplx probe = probe_in;
        for (std::size_t k = 0; k < n; ++k) {
            const auto rho = steady_state(medium, fields, probe, 0.0);
            std::copy(rho.data(), rho.data() + 16, x.begin() + 16 * k);
            probe *= std::exp(kI * slab_scale * normalized_response(rho, probe));
        }
    }

    auto rhs = [&](const State& s, State& ds, double t) {
        ds.resize(s.size());
        const double os = signal_rabi(t, pulse, peak);
        cplx probe = probe_in;
        for (std::size_t k = 0; k < n; ++k) {
            Eigen::Map<const StateVector> xv(s.data() + 16 * k);
            Eigen::Map<StateVector> dv(ds.data() + 16 * k);
            dv.noalias() = base * xv;
            dv.noalias() += probe.real() * (liou.probe_re * xv);
            dv.noalias() += probe.imag() * (liou.probe_im * xv);
            if (os != 0.0) dv.noalias() += os * (liou.signal * xv);
            probe *= std::exp(kI * slab_scale * (s[16 * k + 2] / probe));
        }
    };

    SlabResult out;
    out.trace.grid = grid;
    out.trace.phase.reserve(grid.n_samples);
    out.trace.transmission.reserve(grid.n_samples);
    std::size_t sample = 0;
    auto observer = [&](const State& s, double) {
        cplx accumulated{0.0, 0.0};  // sum of scale_k * rho31_k / probe_k
        cplx probe = probe_in;
        for (std::size_t k = 0; k < n; ++k) {
            const cplx r = s[16 * k + 2] / probe;
            accumulated += slab_scale * r;
            probe *= std::exp(kI * slab_scale * r);
            const DensityMatrix4 rho = Eigen::Map<const DensityMatrix4>(s.data() + 16 * k);
            out.diagnostics.absorb(rho, sample % 64 == 0);
        }
        const ThinMediumCalibration unit{1.0};
        out.trace.phase.push_back(probe_phase(accumulated, unit));
        out.trace.transmission.push_back(probe_transmission(accumulated, unit));
        ++sample;
    };
    integrate_on_grid(rhs, x, grid, options, observer);
    return out;
}

}  // namespace xpm::bloch
