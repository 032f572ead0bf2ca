#pragma once
#include <cmath>

#include "kinklab/fredholm.hpp"
#include "kinklab/grid.hpp"

// Fundamental pairs (decaying / growing) of the flat linearization on [0, L],
// sampled with analytic derivatives, plus the inverse kernel they generate.
// Internal helpers shared by the static and spectral solvers.

namespace kinklab::detail {

struct FlatPair {
    Half Y, Z, Yp, Zp;
    double W = 0; // Y Z' - Y' Z, constant in y
};

// zero-frequency channel: Y = sech^2(y/sqrt2)/2, Z normalized so Z'(0) = 1
inline FlatPair flat_even_pair(const Grid& g) {
    const double SQ2 = std::sqrt(2.0);
    int M = g.M();
    FlatPair r;
    r.Y.resize((size_t)M);
    r.Z.resize((size_t)M);
    r.Yp.resize((size_t)M);
    r.Zp.resize((size_t)M);
    for (int i = 0; i < M; ++i) {
        double y = i * g.h;
        double s = 1.0 / std::cosh(y / SQ2), t = std::tanh(y / SQ2);
        double C4 =
            (12.0 * y + 8.0 * SQ2 * std::sinh(SQ2 * y) + SQ2 * std::sinh(2.0 * SQ2 * y)) / 32.0;
        r.Y[(size_t)i] = 0.5 * s * s;
        r.Yp[(size_t)i] = -s * s * t / SQ2;
        r.Z[(size_t)i] = s * s * C4;
        r.Zp[(size_t)i] = -SQ2 * t * s * s * C4 + 1.0 / (s * s);
    }
    r.W = 0.5;
    return r;
}

// bound-mode channel at frequency 3/2: Y = c tanh sech with unit mass,
// Z normalized so Z(0) = 1, Z'(0) = 0
inline FlatPair flat_odd_pair(const Grid& g) {
    const double SQ2 = std::sqrt(2.0);
    const double c1 = std::sqrt(3.0) * std::pow(2.0, -0.75);
    int M = g.M();
    FlatPair r;
    r.Y.resize((size_t)M);
    r.Z.resize((size_t)M);
    r.Yp.resize((size_t)M);
    r.Zp.resize((size_t)M);
    for (int i = 0; i < M; ++i) {
        double y = i * g.h;
        double s = 1.0 / std::cosh(y / SQ2), t = std::tanh(y / SQ2);
        double A = -5.0 + 3.0 * SQ2 * y * t + std::cosh(SQ2 * y);
        double Ap = 3.0 * SQ2 * t + 3.0 * y * s * s + SQ2 * std::sinh(SQ2 * y);
        r.Y[(size_t)i] = c1 * t * s;
        r.Yp[(size_t)i] = c1 * s * (s * s - t * t) / SQ2;
        r.Z[(size_t)i] = -0.25 * s * A;
        r.Zp[(size_t)i] = -0.25 * (-t * s * A / SQ2 + s * Ap);
    }
    r.W = -std::sqrt(3.0) * std::pow(2.0, -1.25);
    return r;
}

// G(y,w) = Y(y>) Z(y<) / W: right inverse of the channel operator with zero
// value at the origin and a decaying outer branch below the diagonal
inline HalfLineKernel flat_green(const Grid& g, const FlatPair& fp) {
    HalfLineKernel k;
    k.grid = g;
    SepTerm t;
    int M = g.M();
    double iw = 1.0 / fp.W;
    t.outer_lo.resize((size_t)M);
    t.outer_lo_d.resize((size_t)M);
    t.outer_hi.resize((size_t)M);
    t.outer_hi_d.resize((size_t)M);
    for (int i = 0; i < M; ++i) {
        t.outer_lo[(size_t)i] = iw * fp.Y[(size_t)i];
        t.outer_lo_d[(size_t)i] = iw * fp.Yp[(size_t)i];
        t.outer_hi[(size_t)i] = iw * fp.Z[(size_t)i];
        t.outer_hi_d[(size_t)i] = iw * fp.Zp[(size_t)i];
    }
    t.inner_lo = fp.Z;
    t.inner_hi = fp.Y;
    k.terms.push_back(std::move(t));
    k.decay_note = "outer decays below the diagonal; zero at the origin";
    return k;
}

} // namespace kinklab::detail
