#pragma once
#include <functional>
#include <string>

#include "kinklab/grid.hpp"

namespace kinklab {

// wave speed c(x) = 1 + c_delta(x), even, uniformly positive
struct SpeedProfile {
    std::function<double(double)> c;
    double delta = 0;
};

// drift b(y) (odd) with amplitude delta, integrating factor p = exp(int_0^y b),
// and b' on the same grid
struct DriftProfile {
    GridFn b;
    GridFn p;
    GridFn b_prime;
    double delta = 0;
};

// families: "canonical" b = 2*delta*tanh(sqrt2 y)*sech(sqrt2 y), max|b| = delta
DriftProfile builtin_drift(const std::string& family, double delta, const Grid& g);
// sup e^{sqrt2 |y|} |b| / delta for a registered family
double drift_envelope_constant(const std::string& family);

// change of variables y = int_0^x 1/c; b(y) = c'(x(y))
DriftProfile speed_to_drift(const SpeedProfile& c, const Grid& g);

// closed forms: H, Hprime, Y0, Z0, Y1, Z1, psi, psiprime, zeta, theta
GridFn special(const std::string& name, const Grid& g);
// k(y) = e^{2iy}(1 + 1/2 sech^2(y/sqrt2) + i sqrt2 tanh(y/sqrt2))
ComplexGridFn special_k(const Grid& g);

struct KcircConstants {
    double gamma, c1, c2, c0;
};
// oscillatory pair at frequency-squared 4 mu^2 (> 2 required)
KcircConstants kcirc_constants(double mu);
ComplexGridFn kcirc(double mu, const Grid& g);

} // namespace kinklab
