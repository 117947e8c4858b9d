#pragma once

// Four-level N-scheme master equation.
//
// Basis: |1> = F=2 ground, |2> = F=3 ground, |3> = F'=2 excited (probe and
// coupling share it), |4> = F'=4 excited (signal). Rotating frame at the
// probe, coupling and signal carriers (RWA), hbar = 1:
//
//   H = -d2 |2><2| - dp |3><3| - (d2 + ds) |4><4|
//       - (Op/2)|3><1| - (Oc/2)|3><2| - (Os/2)|4><2| + h.c.
//
// Decay: |3> -> |1> at branch3 * Gamma3, |3> -> |2> at the rest, |4> -> |2>
// at Gamma4. Ground dephasing uses L = sqrt(gamma/2)(|1><1| - |2><2|), which
// damps rho12 at gamma.

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "xpm/model.hpp"
#include "xpm/trace.hpp"

namespace xpm::bloch {

using cplx = std::complex<double>;
using DensityMatrix4 = Eigen::Matrix4cd;
using Superop = Eigen::Matrix<cplx, 16, 16>;
using StateVector = Eigen::Matrix<cplx, 16, 1>;

struct IntegratorOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
};

// Worst-case invariant violations seen over a run.
struct StateDiagnostics {
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
    double min_eigenvalue = 1.0;   // sampled; positivity is checked on every sample
    std::size_t positivity_violations = 0;
    double max_coherence = 0.0;    // max |rho_ij|, i != j

    void absorb(const DensityMatrix4& rho, bool full_spectrum);
    void merge(const StateDiagnostics& other);
    bool physical() const;
};

struct CoherenceTrace {
    TimeGrid grid;
    std::vector<cplx> rho31;
    std::vector<cplx> rho21;
    DensityMatrix4 final_state = DensityMatrix4::Zero();
    StateDiagnostics diagnostics;
};

// Converts the normalized probe response rho31 / Omega_p into phase and
// log-amplitude: ln(E_out / E_in) = i * scale * rho31 / Omega_p.
struct ThinMediumCalibration {
    double scale = 0.0;
};

// Superoperator pieces; the full generator is
//   fixed + Re(Op) probe_re + Im(Op) probe_im + Os signal.
struct Liouvillian {
    Superop fixed;
    Superop probe_re;
    Superop probe_im;
    Superop signal;

    static Liouvillian build(const MediumParams& medium, const FieldParams& fields);
    Superop at(cplx omega_p, double omega_s) const;
};

inline StateVector vectorize(const DensityMatrix4& rho) {
    return Eigen::Map<const StateVector>(rho.data());
}
inline DensityMatrix4 unvectorize(const StateVector& v) {
    return Eigen::Map<const DensityMatrix4>(v.data());
}

// Largest grid step evolve() accepts: 0.05 / max(Gamma3, Gamma4, |delta_s|, Omega_c).
double max_grid_step(const MediumParams& medium, const FieldParams& fields);

// Peak signal Rabi frequency for a pulse, rabi_per_sqrt_watt * sqrt(P_peak).
double signal_peak_rabi(const SignalPulse& pulse, double rabi_per_sqrt_watt);

// Rabi envelope whose square (intensity) has RMS width tau_s.
double signal_rabi(double t, const SignalPulse& pulse, double peak_rabi);

DensityMatrix4 steady_state(const MediumParams& medium, const FieldParams& fields,
                            double omega_s_cw);
DensityMatrix4 steady_state(const MediumParams& medium, const FieldParams& fields,
                            cplx omega_p, double omega_s_cw);

CoherenceTrace evolve(const MediumParams& medium, const FieldParams& fields,
                      const SignalPulse& pulse, const TimeGrid& grid,
                      const DensityMatrix4& initial,
                      double rabi_per_sqrt_watt = signal_rabi_per_sqrt_watt(),
                      const IntegratorOptions& options = {});

ThinMediumCalibration calibrate_thin_medium(const MediumParams& medium, const FieldParams& fields);

// Phase (rad) and intensity transmission of the probe after the whole medium,
// treating all atoms as seeing the same fields. The phase sign is that of the
// beat-note readout: a blue-detuned signal gives a positive excursion.
PhaseTrace probe_response(const CoherenceTrace& trace, const ThinMediumCalibration& calib,
                          const FieldParams& fields);

// Same readout for a single density matrix.
cplx normalized_response(const DensityMatrix4& rho, cplx omega_p);
double probe_phase(cplx response, const ThinMediumCalibration& calib);
double probe_transmission(cplx response, const ThinMediumCalibration& calib);

struct SlabResult {
    PhaseTrace trace;
    StateDiagnostics diagnostics;
};

// Splits the medium into n_slabs slices of OD d0/n_slabs. At every instant the
// probe entering slice k is the probe leaving slice k-1 (quasi-static, no
// retardation); the coupling and signal are undepleted.
SlabResult propagate_slabs(const MediumParams& medium, const FieldParams& fields,
                           const SignalPulse& pulse, const TimeGrid& grid, int n_slabs,
                           double rabi_per_sqrt_watt = signal_rabi_per_sqrt_watt(),
                           const IntegratorOptions& options = {});

}  // namespace xpm::bloch
