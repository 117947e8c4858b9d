#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "xpm/errors.hpp"
#include "xpm/model.hpp"

using namespace xpm;

TEST(Model, to_angular_values) {
    EXPECT_EQ(to_angular(0.0), 0.0);
    EXPECT_NEAR(to_angular(1.0 / oracle::kTwoPi), 1.0, 1e-15);
    EXPECT_NEAR(to_angular(0.38e6), 2.3876e6, 1e2);
    for (double x : {1e-3, 2.5, 7e6, -3.3e4}) EXPECT_NEAR(to_angular(to_hertz(x)), x, 1e-15 * std::abs(x) + 1e-300);
}

TEST(Model, photon_number_values) {
    EXPECT_NEAR(photon_number(75e-15, 780.24e-9), 2.95e5, 0.01 * 2.95e5);
    EXPECT_EQ(photon_number(0.0, 780e-9), 0.0);
    const double one = 6.62607015e-34 * 299792458.0 / 780e-9;
    EXPECT_NEAR(photon_number(one, 780e-9), 1.0, 1e-12);
    EXPECT_NEAR(photon_number(2 * 75e-15, 780.24e-9), 2 * photon_number(75e-15, 780.24e-9), 1e-6);
    EXPECT_THROW(photon_number(1e-15, 0.0), InvalidParameter);
}

TEST(Model, signal_bandwidth_values) {
    EXPECT_NEAR(signal_bandwidth(40e-9), 1.99e6, 0.005e6);
    EXPECT_NEAR(signal_bandwidth(80e-9), 0.995e6, 0.003e6);
    EXPECT_LT(signal_bandwidth(1.0), 1e-1);
    EXPECT_THROW(signal_bandwidth(0.0), InvalidParameter);
    EXPECT_THROW(signal_bandwidth(-1e-9), InvalidParameter);
}

TEST(Model, gaussian_flux_shape) {
    SignalPulse p;
    p.tau_s = 40e-9;
    p.n_ph = 2.95e5;
    p.t0 = 1e-6;
    const double peak = p.n_ph / (std::sqrt(oracle::kTwoPi) * p.tau_s);
    EXPECT_NEAR(gaussian_flux(p.t0, p), peak, 1e-12 * peak);
    EXPECT_NEAR(gaussian_flux(p.t0 + 40e-9, p), peak * std::exp(-0.5), 1e-12 * peak);
    EXPECT_DOUBLE_EQ(gaussian_flux(p.t0 + 13e-9, p), gaussian_flux(p.t0 - 13e-9, p));
    EXPECT_GE(gaussian_flux(p.t0 + 50 * p.tau_s, p), 0.0);

    // Simpson over +-8 tau_s.
    const int n = 4000;
    const double a = p.t0 - 8 * p.tau_s, h = 16 * p.tau_s / n;
    double s = gaussian_flux(a, p) + gaussian_flux(a + n * h, p);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * gaussian_flux(a + i * h, p);
    EXPECT_NEAR(s * h / 3.0, p.n_ph, 1e-9 * p.n_ph);
}

TEST(Model, pulse_energy_consistency) {
    const auto p = SignalPulse::from_energy(75e-15, 40e-9);
    EXPECT_NEAR(p.energy(), 75e-15, 1e-25);
    const auto q = SignalPulse::from_peak_power(p.resolved_peak_power(), 40e-9);
    EXPECT_NEAR(q.n_ph, p.n_ph, 1e-9 * p.n_ph);
    EXPECT_NEAR(p.resolved_peak_power() * p.tau_s * std::sqrt(oracle::kTwoPi), 75e-15, 1e-24);
}

TEST(Model, invariants_rejected) {
    MediumParams m;
    m.branch3 = 1.5;
    EXPECT_THROW(m.validate(), InvalidParameter);
    m = MediumParams{};
    m.Gamma3 = 0.0;
    EXPECT_THROW(m.validate(), InvalidParameter);
    SpectralWindow w;
    EXPECT_THROW(w.validate(), InvalidParameter);
    TimeGrid g{0.0, -1.0, 10};
    EXPECT_THROW(g.validate(), InvalidParameter);
    FieldParams f;
    f.omega_c = 1.0;
    f.omega_p = 0.3;
    EXPECT_FALSE(f.weak_probe());
    f.omega_p = 0.1;
    EXPECT_TRUE(f.weak_probe());
}
