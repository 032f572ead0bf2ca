#pragma once
#include "kinklab/fredholm.hpp"
#include "kinklab/grid.hpp"
#include "kinklab/profiles.hpp"

namespace kinklab {

// static profile connecting -1 to +1, written K = H + H_delta
struct KinkProfile {
    GridFn K;
    GridFn H_delta;
    GridFn K_prime;
    GridFn d; // 3K^2 - 3H^2, the potential shift seen by perturbations
    double residual = 0;       // sup-norm defect of the static equation on |y| <= L-1
    double decay_constant = 0; // sup e^{sqrt2|y|} (|H_delta| + |H_delta'|)
    double contraction = 0;    // measured ratio of successive fixed-point steps
};

// fundamental pair of the drift-corrected static linearization on [0, L]:
// Y_b = Y0 + V_b decays, Z_b grows with Z_b(0) = 0, and
// Y_b Z_b' - Y_b' Z_b = p
struct FundamentalPair {
    Grid grid;
    Half Yb, Zb, Yb_prime, Zb_prime;
};
FundamentalPair solve_Vb(const DriftProfile& drift);

// inverse kernel built from the pair; zero boundary value at the origin
HalfLineKernel green_b(const FundamentalPair& fp, const Half& p);

KinkProfile build_kink(const DriftProfile& drift, double tol = 1e-12);

} // namespace kinklab
