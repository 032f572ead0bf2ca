#pragma once
#include <string>
#include <vector>

#include "kinklab/grid.hpp"

namespace kinklab {

// One separable piece of an ordered kernel,
//   G(y,w) = outer_lo(y) inner_lo(w)  for w <= y,
//            outer_hi(y) inner_hi(w)  for w >  y.
// outer_lo_d / outer_hi_d are the y-derivatives of the outers; leave them
// empty when the derivative of the integral operator is not needed.
struct SepTerm {
    Half outer_lo, inner_lo, outer_hi, inner_hi;
    Half outer_lo_d, outer_hi_d;
};

// Sum of separable terms sampled on the nodes of [0, L] (or on the full
// line [-L, L] when full_line is set). The kernel may jump across w = y.
struct HalfLineKernel {
    Grid grid;
    bool full_line = false;
    std::vector<SepTerm> terms;
    std::string decay_note;

    int n() const { return full_line ? grid.N : grid.M(); }
    double node_y(int i) const { return full_line ? -grid.L + i * grid.h : i * grid.h; }
};

double eval_kernel(const HalfLineKernel& k, int i, int j);

// (Gf)(y_i), fourth-order quadrature split at the diagonal
Half apply_kernel(const HalfLineKernel& k, const Half& f);
// d/dy (Gf)(y_i); requires the outer derivatives, accounts for the
// diagonal jump outer_lo*inner_lo - outer_hi*inner_hi
Half apply_kernel_dy(const HalfLineKernel& k, const Half& f);

// sup-norm bound of the integral operator: sup_y int |G(y,w)| dw
double estimate_nu(const HalfLineKernel& k);

struct FredholmReport {
    Half solution;
    double nu = 0;
    int iterations = 0;
    double residual = 0;
};

// f = g + Gf by iteration; requires estimate_nu < 1
FredholmReport neumann_solve(const HalfLineKernel& k, const Half& g,
                             double tol = 1e-12, int cap = 10000);
// dense collocation solve of (I - G)f = g; works for any nu but checks
// conditioning
FredholmReport collocation_solve(const HalfLineKernel& k, const Half& g);

void write_solution_csv(const std::string& path, const HalfLineKernel& k, const Half& f);
std::string report_json(const FredholmReport& r, const std::string& solution_csv_path);

} // namespace kinklab
