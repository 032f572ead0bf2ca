#pragma once
#include <cmath>
#include <random>

#include "kinklab/grid.hpp"
#include "kinklab/profiles.hpp"

namespace testsupport {

using namespace kinklab;

inline const double SQ2 = std::sqrt(2.0);

inline double sech(double x) { return 1.0 / std::cosh(x); }

// -d^2 - 1 + 3H^2, applied with the 6th-order stencil
inline GridFn apply_L(const GridFn& f) {
    GridFn r = zeros(f.grid, f.parity);
    GridFn d2 = deriv2_fd6(f);
    for (int i = 0; i < f.size(); ++i) {
        double t = std::tanh(f.grid.y(i) / SQ2);
        r[i] = -d2[i] - f[i] + 3.0 * t * t * f[i];
    }
    return r;
}

// -d^2 + b d - 1 + 3H^2 (drift sign as used by the static construction)
inline GridFn apply_Lb(const GridFn& f, const GridFn& b) {
    GridFn r = zeros(f.grid, Parity::none);
    GridFn d2 = deriv2_fd6(f);
    GridFn d1 = deriv1_fd6(f);
    for (int i = 0; i < f.size(); ++i) {
        double t = std::tanh(f.grid.y(i) / SQ2);
        r[i] = -d2[i] + b[i] * d1[i] - f[i] + 3.0 * t * t * f[i];
    }
    return r;
}

// -d^2 - b d - 1 + 3K^2 (drift sign as used by the perturbation system)
inline GridFn apply_LK(const GridFn& f, const GridFn& K, const GridFn& b) {
    GridFn r = zeros(f.grid, Parity::none);
    GridFn d2 = deriv2_fd6(f);
    GridFn d1 = deriv1_fd6(f);
    for (int i = 0; i < f.size(); ++i)
        r[i] = -d2[i] - b[i] * d1[i] - f[i] + 3.0 * K[i] * K[i] * f[i];
    return r;
}

inline GridFn re_part(const ComplexGridFn& f) {
    GridFn r = zeros(f.grid);
    for (size_t i = 0; i < f.v.size(); ++i) r.v[i] = f.v[i].real();
    return r;
}

inline GridFn im_part(const ComplexGridFn& f) {
    GridFn r = zeros(f.grid);
    for (size_t i = 0; i < f.v.size(); ++i) r.v[i] = f.v[i].imag();
    return r;
}

inline double interior_max_abs(const GridFn& f, int skip) {
    double m = 0;
    for (int i = skip; i < f.size() - skip; ++i) m = std::max(m, std::abs(f[i]));
    return m;
}

// smooth, odd, decaying test function with seeded random coefficients
inline GridFn random_smooth_odd(const Grid& g, std::mt19937_64& rng, double width = 8.0) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double a[6];
    for (double& x : a) x = U(rng);
    return make_fn(g, [&, width](double y) {
        double s = 0;
        for (int k = 0; k < 6; ++k) s += a[k] * std::sin((k + 1) * 0.35 * y);
        return s * std::exp(-y * y / (width * width));
    }, Parity::odd);
}

inline constexpr uint64_t default_seed = 0x5EED;

} // namespace testsupport
