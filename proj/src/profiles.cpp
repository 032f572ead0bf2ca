#include "kinklab/profiles.hpp"

#include <cmath>

namespace kinklab {

namespace {

const double SQ2 = std::sqrt(2.0);

double sech(double x) { return 1.0 / std::cosh(x); }

double fH(double y) { return std::tanh(y / SQ2); }
double fHprime(double y) { double s = sech(y / SQ2); return s * s / SQ2; }
double fY0(double y) { double s = sech(y / SQ2); return 0.5 * s * s; }

// antiderivative of cosh^4(s/sqrt2)
double C4(double y) {
    return (12.0 * y + 8.0 * SQ2 * std::sinh(SQ2 * y) + SQ2 * std::sinh(2.0 * SQ2 * y)) / 32.0;
}
double fZ0(double y) { double s = sech(y / SQ2); return s * s * C4(y); }

double fY1(double y) {
    return std::pow(2.0, -0.75) * std::sqrt(3.0) * std::tanh(y / SQ2) * sech(y / SQ2);
}
double fZ1(double y) {
    return -0.25 * sech(y / SQ2) *
           (-5.0 + 3.0 * SQ2 * y * std::tanh(y / SQ2) + std::cosh(SQ2 * y));
}

const double PSI_SCALE = 8.0 * SQ2;
double fpsi(double y) { return PSI_SCALE * std::tanh(y / PSI_SCALE); }
double fpsiprime(double y) { double s = sech(y / PSI_SCALE); return s * s; }
double fzeta(double y) { return sech(y / PSI_SCALE); }
double ftheta(double y) { return sech(y / (2.0 * SQ2)); }

} // namespace

GridFn special(const std::string& name, const Grid& g) {
    if (name == "H") return make_fn(g, fH, Parity::odd);
    if (name == "Hprime") return make_fn(g, fHprime, Parity::even);
    if (name == "Y0") return make_fn(g, fY0, Parity::even);
    if (name == "Z0") return make_fn(g, fZ0, Parity::odd);
    if (name == "Y1") return make_fn(g, fY1, Parity::odd);
    if (name == "Z1") return make_fn(g, fZ1, Parity::even);
    if (name == "psi") return make_fn(g, fpsi, Parity::odd);
    if (name == "psiprime") return make_fn(g, fpsiprime, Parity::even);
    if (name == "zeta") return make_fn(g, fzeta, Parity::even);
    if (name == "theta") return make_fn(g, ftheta, Parity::even);
    throw ConfigError("special: unknown name '" + name +
                      "' (H, Hprime, Y0, Z0, Y1, Z1, psi, psiprime, zeta, theta)");
}

ComplexGridFn special_k(const Grid& g) {
    return make_cfn(g, [](double y) {
        double s = sech(y / SQ2);
        std::complex<double> amp(1.0 + 0.5 * s * s, SQ2 * std::tanh(y / SQ2));
        return std::exp(std::complex<double>(0.0, 2.0 * y)) * amp;
    });
}

KcircConstants kcirc_constants(double mu) {
    double m2 = mu * mu;
    if (!(4.0 * m2 > 2.0))
        throw RegimeError("kcirc: need mu^2 > 1/2 (oscillatory branch)");
    if (std::abs(4.0 * m2 - 3.0) < 1e-8)
        throw NumericalError("kcirc: coefficient pole at mu^2 = 3/4");
    KcircConstants r;
    r.gamma = std::sqrt(4.0 * m2 - 2.0);
    r.c1 = 3.0 / (4.0 * m2 - 3.0);
    r.c2 = 3.0 * r.gamma / (8.0 * m2 - 6.0);
    double A = 1.0 + r.c1 / 2.0;
    r.c0 = A * (r.c2 + r.gamma * A);
    return r;
}

ComplexGridFn kcirc(double mu, const Grid& g) {
    KcircConstants k = kcirc_constants(mu);
    return make_cfn(g, [k](double y) {
        double s = sech(y / SQ2);
        std::complex<double> amp(1.0 + 0.5 * k.c1 * s * s, k.c2 * SQ2 * std::tanh(y / SQ2));
        return std::exp(std::complex<double>(0.0, k.gamma * y)) * amp;
    });
}

DriftProfile builtin_drift(const std::string& family, double delta, const Grid& g) {
    if (!(delta >= 0.0 && delta <= 0.1))
        throw ConfigError("builtin_drift: delta must lie in [0, 0.1], got " +
                          std::to_string(delta));
    if (family != "canonical")
        throw ConfigError("builtin_drift: unknown family '" + family + "' (canonical)");
    DriftProfile d;
    d.delta = delta;
    // max of tanh*sech is 1/2, so the prefactor 2 normalizes max|b| to delta
    d.b = make_fn(g, [delta](double y) {
        return 2.0 * delta * std::tanh(SQ2 * y) * sech(SQ2 * y);
    }, Parity::odd);
    d.b_prime = make_fn(g, [delta](double y) {
        double s = sech(SQ2 * y), t = std::tanh(SQ2 * y);
        return 2.0 * SQ2 * delta * s * (s * s - t * t);
    }, Parity::even);
    // int_0^y b = sqrt2 * delta * (1 - sech(sqrt2 y))
    d.p = make_fn(g, [delta](double y) {
        return std::exp(SQ2 * delta * (1.0 - sech(SQ2 * y)));
    }, Parity::even);
    return d;
}

double drift_envelope_constant(const std::string& family) {
    if (family == "canonical") return 4.0; // e^{sqrt2 y} * 2 tanh sech -> 4 as y -> inf
    throw ConfigError("drift_envelope_constant: unknown family '" + family + "'");
}

DriftProfile speed_to_drift(const SpeedProfile& sp, const Grid& g) {
    // evenness and positivity of c on the sampled range
    double X = g.L * (1.0 + 2.0 * sp.delta) + 1.0;
    double hx = g.h / 2.0;
    int Mx = (int)std::ceil(X / hx) + 1;
    Half invc((size_t)Mx), cs((size_t)Mx);
    for (int i = 0; i < Mx; ++i) {
        double x = i * hx;
        double cv = sp.c(x);
        if (!(cv > 0))
            throw ConfigError("speed_to_drift: c <= 0 at x = " + std::to_string(x) +
                              " (y(x) not monotone)");
        double mirror = sp.c(-x);
        if (std::abs(mirror - cv) > 1e-10 * std::max(1.0, std::abs(cv)))
            throw ConfigError("speed_to_drift: c is not even at x = " + std::to_string(x));
        cs[(size_t)i] = cv;
        invc[(size_t)i] = 1.0 / cv;
    }
    Half yx = cumint_forward(hx, invc); // y(x_i), strictly increasing
    if (yx.back() < g.L)
        throw ConfigError("speed_to_drift: sampled x-range does not reach y = L");

    // invert y(x) and sample b(y) = c'(x(y)) with a 4th-order difference in x
    auto cprime = [&](double x) {
        double e = hx;
        return (-sp.c(x + 2 * e) + 8 * sp.c(x + e) - 8 * sp.c(x - e) + sp.c(x - 2 * e)) /
               (12.0 * e);
    };
    Half bh((size_t)g.M());
    size_t lo = 0;
    for (int j = 0; j < g.M(); ++j) {
        double y = j * g.h;
        while (lo + 1 < yx.size() && yx[lo + 1] < y) ++lo;
        // local linear inverse; hx = h/2 keeps this within the O(h^2) contract
        double t = (y - yx[lo]) / (yx[lo + 1] - yx[lo]);
        double x = (double)(lo + t) * hx;
        bh[(size_t)j] = cprime(x);
    }
    bh[0] = 0.0; // c even forces c'(0) = 0

    DriftProfile d;
    d.delta = sp.delta;
    d.b = extend_odd(g, bh);
    Half ph = cumint_forward(g.h, bh);
    for (double& v : ph) v = std::exp(v);
    d.p = extend_even(g, ph);
    d.b_prime = deriv1_fd6(d.b);
    return d;
}

} // namespace kinklab
