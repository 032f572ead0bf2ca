#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kinklab/errors.hpp"
#include "kinklab/grid.hpp"
#include "kinklab/profiles.hpp"
#include "support/common.hpp"

using namespace kinklab;
using namespace testsupport;

namespace {
const Grid G = make_grid(40.0, 0.005);

double wronskian_spread(const GridFn& u, const GridFn& v, double ref, int skip) {
    GridFn du = deriv1_fd6(u), dv = deriv1_fd6(v);
    double worst = 0;
    for (int i = skip; i < G.N - skip; ++i)
        worst = std::max(worst, std::abs(u[i] * dv[i] - du[i] * v[i] - ref));
    return worst;
}
} // namespace

TEST_CASE("closed-form profiles: values and parity tags") {
    GridFn H = special("H", G);
    CHECK(H.parity == Parity::odd);
    CHECK(H[G.N / 2] == 0.0);
    CHECK(std::abs(H[G.N - 1] - 1.0) < 1e-10);

    CHECK(special("Hprime", G).parity == Parity::even);
    CHECK(special("Y0", G).parity == Parity::even);
    CHECK(special("Z0", G).parity == Parity::odd);
    CHECK(special("Y1", G).parity == Parity::odd);
    CHECK(special("Z1", G).parity == Parity::even);
    CHECK(special("psi", G).parity == Parity::odd);
    CHECK(special("psiprime", G).parity == Parity::even);
    CHECK(special("zeta", G).parity == Parity::even);
    CHECK(special("theta", G).parity == Parity::even);
    CHECK_THROWS_AS(special("nope", G), ConfigError);

    GridFn Y0 = special("Y0", G);
    CHECK(Y0[G.N / 2] == 0.5);
    GridFn Z1 = special("Z1", G);
    CHECK(std::abs(Z1[G.N / 2] - 1.0) < 1e-14);
    GridFn psi = special("psi", G);
    CHECK(psi[G.N / 2] == 0.0);
    GridFn pp = special("psiprime", G);
    CHECK(pp[G.N / 2] == 1.0);

    // zeta^2 = psi' pointwise
    GridFn zeta = special("zeta", G);
    double worst = 0;
    for (int i = 0; i < G.N; ++i)
        worst = std::max(worst, std::abs(zeta[i] * zeta[i] - pp[i]));
    CHECK(worst < 1e-15);
}

TEST_CASE("fundamental pairs solve their second-order equations") {
    GridFn Y0 = special("Y0", G), Z0 = special("Z0", G);
    GridFn Y1 = special("Y1", G), Z1 = special("Z1", G);

    CHECK(interior_max_abs(apply_L(Y0), 5) < 1e-10);

    GridFn rY1 = apply_L(Y1) + (-1.5) * Y1;
    CHECK(interior_max_abs(rY1, 5) < 1e-10);

    // growing partners checked with a pointwise relative normalization
    GridFn rZ0 = apply_L(Z0);
    GridFn rZ1 = apply_L(Z1) + (-1.5) * Z1;
    double w0 = 0, w1 = 0;
    for (int i = 5; i < G.N - 5; ++i) {
        w0 = std::max(w0, std::abs(rZ0[i]) / (1.0 + std::abs(Z0[i])));
        w1 = std::max(w1, std::abs(rZ1[i]) / (1.0 + std::abs(Z1[i])));
    }
    CHECK(w0 < 1e-8);
    CHECK(w1 < 1e-8);

    // normalizations at the origin
    GridFn dZ0 = deriv1_fd6(Z0), dZ1 = deriv1_fd6(Z1);
    CHECK(std::abs(dZ0[G.N / 2] - 1.0) < 1e-10);
    CHECK(std::abs(dZ1[G.N / 2]) < 1e-12);
    CHECK(std::abs(integrate(Y1 * Y1) - 1.0) < 1e-9);

    CHECK(wronskian_spread(Y0, Z0, 0.5, 1000) < 1e-8);
    CHECK(wronskian_spread(Y1, Z1, -0.7282376575609849, 1000) < 1e-8);
}

TEST_CASE("oscillatory solution at the edge of the band") {
    ComplexGridFn k = special_k(G);
    GridFn re = re_part(k), im = im_part(k);

    CHECK(std::abs(re[G.N / 2] - 1.5) < 1e-14);
    CHECK(std::abs(im[G.N / 2]) < 1e-14);

    // conjugate symmetry k(-y) = conj(k(y))
    double sym = 0;
    for (int i = 0; i < G.N; ++i)
        sym = std::max(sym, std::abs(k.v[(size_t)i] -
                                     std::conj(k.v[(size_t)(G.N - 1 - i)])));
    CHECK(sym < 1e-12);

    GridFn rre = apply_L(re) + (-6.0) * re;
    GridFn rim = apply_L(im) + (-6.0) * im;
    CHECK(interior_max_abs(rre, 5) < 1e-8);
    CHECK(interior_max_abs(rim, 5) < 1e-8);

    CHECK(wronskian_spread(re, im, 6.0, 200) < 1e-9);
}

TEST_CASE("oscillatory pair off the band edge") {
    // frequency-squared 6 degenerates to the same function
    {
        double mu = std::sqrt(1.5);
        KcircConstants c = kcirc_constants(mu);
        CHECK(std::abs(c.gamma - 2.0) < 1e-13);
        CHECK(std::abs(c.c1 - 1.0) < 1e-13);
        CHECK(std::abs(c.c2 - 1.0) < 1e-13);
        CHECK(std::abs(c.c0 - 6.0) < 1e-12);
        ComplexGridFn kc = kcirc(mu, G);
        ComplexGridFn k = special_k(G);
        double diff = 0;
        for (size_t i = 0; i < kc.v.size(); ++i)
            diff = std::max(diff, std::abs(kc.v[i] - k.v[i]));
        CHECK(diff < 1e-12);
    }

    // generic frequency: equation residual and constant Wronskian
    {
        double mu = std::sqrt(2.0);
        KcircConstants c = kcirc_constants(mu);
        ComplexGridFn kc = kcirc(mu, G);
        GridFn re = re_part(kc), im = im_part(kc);
        GridFn rre = apply_L(re) + (-4.0 * mu * mu) * re;
        GridFn rim = apply_L(im) + (-4.0 * mu * mu) * im;
        CHECK(interior_max_abs(rre, 5) < 1e-8);
        CHECK(interior_max_abs(rim, 5) < 1e-8);
        CHECK(wronskian_spread(re, im, c.c0, 200) < 1e-9);
        CHECK(std::abs(im[G.N / 2]) < 1e-14); // vanishes at the origin
    }

    CHECK_THROWS_AS(kcirc_constants(0.7), RegimeError);
    CHECK_THROWS_AS(kcirc_constants(std::sqrt(0.75)), NumericalError);
}

TEST_CASE("builtin drift family") {
    CHECK(drift_envelope_constant("canonical") == 4.0);
    CHECK_THROWS_AS(drift_envelope_constant("nope"), ConfigError);
    CHECK_THROWS_AS(builtin_drift("nope", 0.02, G), ConfigError);
    CHECK_THROWS_AS(builtin_drift("canonical", 0.2, G), ConfigError);
    CHECK_THROWS_AS(builtin_drift("canonical", -0.01, G), ConfigError);

    {
        DriftProfile d0 = builtin_drift("canonical", 0.0, G);
        CHECK(max_abs(d0.b) == 0.0);
        double pw = 0;
        for (int i = 0; i < G.N; ++i) pw = std::max(pw, std::abs(d0.p[i] - 1.0));
        CHECK(pw == 0.0);
    }

    double delta = 0.05;
    DriftProfile d = builtin_drift("canonical", delta, G);
    CHECK(d.delta == delta);
    CHECK(d.b.parity == Parity::odd);
    CHECK(parity_residual(d.b, Parity::odd) < 1e-13);
    CHECK(parity_residual(d.p, Parity::even) < 1e-13);
    CHECK(d.b[G.N / 2] == 0.0);

    // amplitude normalization max|b| = delta
    double mb = max_abs(d.b);
    CHECK(mb <= delta * (1.0 + 1e-12));
    CHECK(mb >= delta * (1.0 - 5e-5));

    // envelope sup e^{sqrt2|y|} |b| = 4 delta, approached at the boundary
    double env = 0;
    for (int i = 0; i < G.N; ++i)
        env = std::max(env, std::exp(SQ2 * std::abs(G.y(i))) * std::abs(d.b[i]));
    CHECK(env <= 4.0 * delta * (1.0 + 1e-12));
    CHECK(env >= 3.99 * delta);

    // p(0) = 1, log p integrates b, and p - 1 = O(delta)
    CHECK(d.p[G.N / 2] == 1.0);
    GridFn logp = zeros(G, Parity::even);
    for (int i = 0; i < G.N; ++i) logp[i] = std::log(d.p[i]);
    GridFn dlogp = deriv1_fd6(logp);
    double w = 0;
    for (int i = 5; i < G.N - 5; ++i) w = std::max(w, std::abs(dlogp[i] - d.b[i]));
    CHECK(w < 1e-10);
    double pdev = 0;
    for (int i = 0; i < G.N; ++i) pdev = std::max(pdev, std::abs(d.p[i] - 1.0));
    CHECK(pdev <= 1.6 * SQ2 * delta);
    CHECK(pdev >= 0.99 * SQ2 * delta);

    // supplied derivative matches a direct difference of b
    GridFn db = deriv1_fd6(d.b);
    double wd = 0;
    for (int i = 5; i < G.N - 5; ++i) wd = std::max(wd, std::abs(db[i] - d.b_prime[i]));
    CHECK(wd < 1e-12);
}

TEST_CASE("drift built from a wave-speed profile") {
    {
        SpeedProfile flat{[](double) { return 1.0; }, 0.0};
        DriftProfile d = speed_to_drift(flat, G);
        CHECK(max_abs(d.b) == 0.0);
        double pw = 0;
        for (int i = 0; i < G.N; ++i) pw = std::max(pw, std::abs(d.p[i] - 1.0));
        CHECK(pw == 0.0);
    }

    double delta = 0.02;
    SpeedProfile sp{[delta](double x) { return 1.0 + delta * std::exp(-2.0 * x * x); },
                    delta};
    DriftProfile d = speed_to_drift(sp, G);
    CHECK(d.delta == delta);
    CHECK(d.b.parity == Parity::odd);
    CHECK(parity_residual(d.b, Parity::odd) < 1e-12);
    CHECK(d.b[G.N / 2] == 0.0);

    // max |c'| = 2 delta e^{-1/2}, attained at x = 1/2
    double mb = max_abs(d.b);
    double ref = 2.0 * delta * std::exp(-0.5);
    CHECK(std::abs(mb - ref) < 1e-3 * ref);

    // compactly supported speed bump: b vanishes numerically far out
    double far = 0;
    for (int i = 0; i < G.N; ++i)
        if (std::abs(G.y(i)) >= 12.0) far = std::max(far, std::abs(d.b[i]));
    CHECK(far < 1e-12);

    // p is the integrating factor of b
    GridFn logp = zeros(G, Parity::even);
    for (int i = 0; i < G.N; ++i) logp[i] = std::log(d.p[i]);
    GridFn dlogp = deriv1_fd6(logp);
    double w = 0;
    for (int i = 5; i < G.N - 5; ++i) w = std::max(w, std::abs(dlogp[i] - d.b[i]));
    CHECK(w < 1e-7);
    CHECK(parity_residual(d.p, Parity::even) < 1e-12);

    CHECK_THROWS_AS(speed_to_drift(
                        SpeedProfile{[](double x) {
                                         return 1.0 + 0.02 * std::exp(-2.0 * (x - 0.3) * (x - 0.3));
                                     },
                                     0.02},
                        G),
                    ConfigError);
    CHECK_THROWS_AS(speed_to_drift(
                        SpeedProfile{[](double x) { return 1.0 - 1.2 * std::exp(-x * x); },
                                     1.2},
                        G),
                    ConfigError);
}
