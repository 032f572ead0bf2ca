#pragma once
#include <complex>
#include <vector>

#include "kinklab/grid.hpp"
#include "kinklab/kink.hpp"
#include "kinklab/profiles.hpp"

namespace kinklab {

// Discrete modes and resonance data of the p-weighted linearization around
// the kink: L_K u = -(1/p)(p u')' + (3K^2 - 1) u.
struct SpectralData {
    double lambda0 = 0;    // even-channel frequency, 0 when the drift vanishes
    double lambda1 = 0;    // bound-mode frequency, 3/2 when the drift vanishes
    double mu = 0;         // sqrt(lambda1)
    GridFn Ybar0;          // even bound state, positive at the origin
    GridFn Ybar1;          // odd bound state, <Ybar1, Ybar1>_p = 1
    GridFn fbar;           // quadratic mode self-coupling, p-orthogonal to Ybar1
    GridFn q;              // decaying odd solution of L_K q = fbar
    GridFn hbar;           // odd response at frequency 4 mu^2
    GridFn gbar;           // p * hbar
    double a_const = 0;    // resonance constant of the flat problem
    double a0_const = 0;   // drift-corrected resonance constant
    double psi_f_imk = 0;  // resonance denominator; must stay away from zero
    double oracle_gap = 0; // worst eigenvalue disagreement with the dense check
};

// decaying correction at a trial frequency, from the integral fixed point;
// the boundary functional is evaluated by quadrature, never by differencing
struct ShootResult {
    Half U;            // correction on [0, L]
    Half U_prime;      // derivative through the kernel chain
    double boundary;   // U'(0) for the even channel, U(0) for the odd
    double nu = 0;     // norm bound of the contraction that produced U
};

// width of the admissible frequency window around the flat channel value
double lambda_star(const KinkProfile& kink, const DriftProfile& drift);

ShootResult shoot_even(double lambda, const KinkProfile& kink, const DriftProfile& drift);
ShootResult shoot_odd(double lambda, const KinkProfile& kink, const DriftProfile& drift);

struct ModePair {
    double lambda = 0;
    GridFn Ybar;
    double mu = 0; // sqrt(lambda), filled for the bound-mode channel
};

// bisection (plus a secant polish) on the boundary functional
ModePair find_lambda0(const KinkProfile& kink, const DriftProfile& drift, double tol = 1e-10);
ModePair find_lambda1(const KinkProfile& kink, const DriftProfile& drift, double tol = 1e-10);

struct OracleEigen {
    double value = 0;
    Parity parity = Parity::none;
};

// lowest twenty eigenvalues of the symmetrized second-order discretization
// with pinned ends, classified by parity; onset marks the continuum cluster
struct MatrixOracle {
    std::vector<OracleEigen> eigen;
    int continuum_onset = -1;
    double edge = 2.0;
};
MatrixOracle matrix_oracle(const KinkProfile& kink, const DriftProfile& drift);

// inverse of (6 - L) at the edge of the doubled-frequency band, through the
// oscillatory pair k; decays exactly when both pairings vanish
struct ResolventEdge {
    GridFn G;
    GridFn G_prime;
    std::complex<double> pair_k;
    double pair_imk = 0;
};
ResolventEdge resolvent_L6(const GridFn& F);

// fills fbar and q
void build_fbar_q(SpectralData& sd, const KinkProfile& kink, const DriftProfile& drift);

struct GoldenRule {
    double a = 0;
    double a0 = 0;
    double psi_f_imk = 0;
};
// needs sd.fbar and sd.Ybar1
GoldenRule golden_rule_constants(const SpectralData& sd, const DriftProfile& drift);

// fills hbar and gbar; needs fbar, a0_const and mu
void build_hbar_gbar(SpectralData& sd, const KinkProfile& kink, const DriftProfile& drift,
                     double tol = 1e-12);

SpectralData compute_spectral_data(const KinkProfile& kink, const DriftProfile& drift,
                                   double tol = 1e-10);

} // namespace kinklab
