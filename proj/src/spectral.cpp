#include "kinklab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <lapacke.h>

#include "flat_pairs.hpp"
#include "kinklab/errors.hpp"
#include "kinklab/fredholm.hpp"

namespace kinklab {

namespace {

const double SQ2 = std::sqrt(2.0);

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

// kernel of the shooting fixed point at effective frequency lam_eff,
//   U -> int { -d/dw[G(y,w) b(w)] + G(y,w) (lam_eff - d(w)) } U(w) dw,
// integrated by parts once; valid because b(0) = 0 and the data decays
HalfLineKernel shoot_kernel(const Grid& g, const detail::FlatPair& fp, double lam_eff,
                            const Half& b, const Half& bpr, const Half& dd) {
    HalfLineKernel k;
    k.grid = g;
    SepTerm t;
    int M = g.M();
    double iw = 1.0 / fp.W;
    t.outer_lo.resize((size_t)M);
    t.outer_lo_d.resize((size_t)M);
    t.outer_hi.resize((size_t)M);
    t.outer_hi_d.resize((size_t)M);
    t.inner_lo.resize((size_t)M);
    t.inner_hi.resize((size_t)M);
    for (int i = 0; i < M; ++i) {
        size_t j = (size_t)i;
        t.outer_lo[j] = iw * fp.Y[j];
        t.outer_lo_d[j] = iw * fp.Yp[j];
        t.outer_hi[j] = iw * fp.Z[j];
        t.outer_hi_d[j] = iw * fp.Zp[j];
        double m = lam_eff - dd[j];
        t.inner_lo[j] = -(fp.Zp[j] * b[j] + fp.Z[j] * bpr[j]) + fp.Z[j] * m;
        t.inner_hi[j] = -(fp.Yp[j] * b[j] + fp.Y[j] * bpr[j]) + fp.Y[j] * m;
    }
    k.terms.push_back(std::move(t));
    return k;
}

// shared core of both channels: solve the fixed point and push the
// derivative through the same kernels
ShootResult shoot_channel(const detail::FlatPair& fp, double lam_eff, const Grid& g,
                          const KinkProfile& kink, const DriftProfile& drift) {
    int M = g.M();
    Half b = restrict_half(drift.b);
    Half bpr = restrict_half(drift.b_prime);
    Half dd = restrict_half(kink.d);

    HalfLineKernel G = detail::flat_green(g, fp);
    HalfLineKernel K = shoot_kernel(g, fp, lam_eff, b, bpr, dd);

    Half F1((size_t)M);
    for (int i = 0; i < M; ++i) {
        size_t j = (size_t)i;
        F1[j] = b[j] * fp.Yp[j] + (lam_eff - dd[j]) * fp.Y[j];
    }

    FredholmReport rep = neumann_solve(K, apply_kernel(G, F1));

    ShootResult r;
    r.U = std::move(rep.solution);
    r.nu = rep.nu;
    Half kd = apply_kernel_dy(K, r.U);
    Half gd = apply_kernel_dy(G, F1);
    r.U_prime.resize((size_t)M);
    for (int i = 0; i < M; ++i)
        r.U_prime[(size_t)i] = kd[(size_t)i] + gd[(size_t)i];
    // node 0 of the kernel chain is exactly the boundary quadrature:
    // U'(0) = (Z'(0)/W) int Y F_tot for the even pair, and
    // U(0)  = (Z(0)/W)  int Y F_tot for the odd one
    r.boundary = (fp.Z[0] == 0.0) ? r.U_prime[0] : r.U[0];
    return r;
}

struct BracketFn {
    const detail::FlatPair& fp;
    double shift;
    const Grid& g;
    const KinkProfile& kink;
    const DriftProfile& drift;
    double operator()(double lambda) const {
        return shoot_channel(fp, lambda - shift, g, kink, drift).boundary;
    }
};

// bisection to width tol, then two clamped secant steps on the bracket
double root_bisect(const BracketFn& fn, double a, double b, double tol, const char* what) {
    double fa = fn(a), fb = fn(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0))
        throw RegimeError(std::string(what) +
                          ": boundary functional does not change sign across the window "
                          "(endpoint values " +
                          sci(fa) + ", " + sci(fb) + ")");
    while (b - a > tol) {
        double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        double fm = fn(m);
        if (fm == 0.0) return m;
        if ((fm > 0) == (fa > 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    double x0 = a, f0 = fa, x1 = b, f1 = fb;
    for (int it = 0; it < 2; ++it) {
        if (f1 == f0) break;
        double cand = x1 - f1 * (x1 - x0) / (f1 - f0);
        cand = std::clamp(cand, a, b);
        double fc = fn(cand);
        x0 = x1;
        f0 = f1;
        x1 = cand;
        f1 = fc;
        if (fc == 0.0) break;
    }
    return x1;
}

GridFn im_of(const ComplexGridFn& f) {
    GridFn r = zeros(f.grid);
    for (size_t i = 0; i < f.v.size(); ++i) r.v[i] = f.v[i].imag();
    return r;
}

GridFn re_of(const ComplexGridFn& f) {
    GridFn r = zeros(f.grid);
    for (size_t i = 0; i < f.v.size(); ++i) r.v[i] = f.v[i].real();
    return r;
}

} // namespace

double lambda_star(const KinkProfile& kink, const DriftProfile& drift) {
    const Grid& g = kink.K.grid;
    detail::FlatPair fp = detail::flat_even_pair(g);
    Half b = restrict_half(drift.b);
    Half bpr = restrict_half(drift.b_prime);
    Half dd = restrict_half(kink.d);
    int M = g.M();
    Half integrand((size_t)M);
    for (int i = 0; i < M; ++i) {
        size_t j = (size_t)i;
        integrand[j] = std::abs((dd[j] + bpr[j]) * fp.Y[j] + b[j] * fp.Yp[j]);
    }
    double first_order = 5.0 * integrate_half(g, integrand);
    return std::max({1e-3, 5.0 * drift.delta, first_order});
}

ShootResult shoot_even(double lambda, const KinkProfile& kink, const DriftProfile& drift) {
    const Grid& g = kink.K.grid;
    double ls = lambda_star(kink, drift);
    if (std::abs(lambda) > ls)
        throw RegimeError("shoot_even: trial frequency " + sci(lambda) +
                          " outside the admissible window " + sci(ls));
    return shoot_channel(detail::flat_even_pair(g), lambda, g, kink, drift);
}

ShootResult shoot_odd(double lambda, const KinkProfile& kink, const DriftProfile& drift) {
    const Grid& g = kink.K.grid;
    double ls = lambda_star(kink, drift);
    if (std::abs(lambda - 1.5) > ls)
        throw RegimeError("shoot_odd: trial frequency " + sci(lambda) +
                          " outside the admissible window 3/2 +- " + sci(ls));
    return shoot_channel(detail::flat_odd_pair(g), lambda - 1.5, g, kink, drift);
}

ModePair find_lambda0(const KinkProfile& kink, const DriftProfile& drift, double tol) {
    const Grid& g = kink.K.grid;
    double ls = lambda_star(kink, drift);
    detail::FlatPair fp = detail::flat_even_pair(g);
    BracketFn fn{fp, 0.0, g, kink, drift};
    double lam = root_bisect(fn, -ls, ls, tol, "find_lambda0");
    ShootResult s = shoot_channel(fp, lam, g, kink, drift);
    int M = g.M();
    Half tot((size_t)M);
    for (int i = 0; i < M; ++i) tot[(size_t)i] = fp.Y[(size_t)i] + s.U[(size_t)i];
    ModePair out;
    out.lambda = lam;
    out.Ybar = extend_even(g, tot);
    return out;
}

ModePair find_lambda1(const KinkProfile& kink, const DriftProfile& drift, double tol) {
    const Grid& g = kink.K.grid;
    double ls = lambda_star(kink, drift);
    detail::FlatPair fp = detail::flat_odd_pair(g);
    BracketFn fn{fp, 1.5, g, kink, drift};
    double lam = root_bisect(fn, 1.5 - ls, 1.5 + ls, tol, "find_lambda1");
    ShootResult s = shoot_channel(fp, lam - 1.5, g, kink, drift);
    int M = g.M();
    Half tot((size_t)M);
    for (int i = 0; i < M; ++i) tot[(size_t)i] = fp.Y[(size_t)i] + s.U[(size_t)i];
    ModePair out;
    out.lambda = lam;
    out.Ybar = extend_odd(g, tot);
    double n2 = inner_p(out.Ybar, out.Ybar, drift.p);
    if (!(n2 > 0))
        throw NumericalError("find_lambda1: weighted mass of the bound mode is not positive");
    double scale = 1.0 / std::sqrt(n2);
    for (auto& v : out.Ybar.v) v *= scale;
    if (lam <= 0)
        throw RegimeError("find_lambda1: bound-mode frequency " + sci(lam) + " is not positive");
    out.mu = std::sqrt(lam);
    return out;
}

MatrixOracle matrix_oracle(const KinkProfile& kink, const DriftProfile& drift) {
    const Grid& g = kink.K.grid;
    int n = g.N - 2; // pinned ends
    double ih2 = 1.0 / (g.h * g.h);
    std::vector<double> diag((size_t)n), off((size_t)(n - 1));
    for (int i = 1; i <= n; ++i) {
        double K = kink.K[i];
        double b = drift.b[i];
        double Vt = 3.0 * K * K - 1.0 + 0.25 * b * b + 0.5 * drift.b_prime[i];
        diag[(size_t)(i - 1)] = 2.0 * ih2 + Vt;
    }
    for (int i = 0; i < n - 1; ++i) off[(size_t)i] = -ih2;

    const int want = 20;
    std::vector<double> w((size_t)n);
    std::vector<double> z((size_t)n * want);
    std::vector<lapack_int> isuppz(2 * want);
    lapack_int m = 0;
    lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, diag.data(), off.data(), 0.0,
                                     0.0, 1, want, 0.0, &m, w.data(), z.data(), n, isuppz.data());
    if (info != 0)
        throw NumericalError("matrix_oracle: tridiagonal eigensolve failed (info " +
                             std::to_string((long)info) + ")");
    if (m < want)
        throw NumericalError("matrix_oracle: eigensolve returned " + std::to_string((long)m) +
                             " of " + std::to_string(want) + " pairs");

    MatrixOracle out;
    out.eigen.resize(want);
    // the symmetrizing weight sqrt(p) is even, so the eigenvector parity is
    // the eigenfunction parity
    for (int c = 0; c < want; ++c) {
        const double* v = z.data() + (size_t)c * (size_t)n;
        double amp = 0, even_res = 0, odd_res = 0;
        for (int i = 0; i < n; ++i) {
            double mir = v[n - 1 - i];
            amp = std::max(amp, std::abs(v[i]));
            even_res = std::max(even_res, std::abs(v[i] - mir));
            odd_res = std::max(odd_res, std::abs(v[i] + mir));
        }
        Parity p = Parity::none;
        if (amp > 0) {
            if (even_res <= 0.1 * amp) p = Parity::even;
            else if (odd_res <= 0.1 * amp) p = Parity::odd;
        }
        out.eigen[(size_t)c] = {w[(size_t)c], p};
    }
    out.edge = 2.0;
    out.continuum_onset = -1;
    for (int c = 0; c < want; ++c) {
        if (out.eigen[(size_t)c].value >= 2.0 - 1e-2) {
            out.continuum_onset = c;
            break;
        }
    }
    return out;
}

ResolventEdge resolvent_L6(const GridFn& F) {
    const Grid& g = F.grid;
    int N = g.N;
    ComplexGridFn k = special_k(g);
    // analytic derivative of the oscillatory pair
    ComplexGridFn kp = make_cfn(g, [](double y) {
        std::complex<double> I(0.0, 1.0);
        double s = 1.0 / std::cosh(y / SQ2), t = std::tanh(y / SQ2);
        std::complex<double> m = 1.0 + 0.5 * s * s + I * SQ2 * t;
        std::complex<double> mp = -s * s * t / SQ2 + I * s * s;
        return std::exp(2.0 * I * y) * (2.0 * I * m + mp);
    });

    Half lo_re((size_t)N), lo_im((size_t)N), hi_re((size_t)N), hi_im((size_t)N);
    for (int i = 0; i < N; ++i) {
        double kr = k.v[(size_t)i].real(), ki = k.v[(size_t)i].imag();
        double f = F[i];
        lo_re[(size_t)i] = kr * f;  // Re (conj k) F
        lo_im[(size_t)i] = -ki * f; // Im (conj k) F
        hi_re[(size_t)i] = kr * f;  // Re k F
        hi_im[(size_t)i] = ki * f;  // Im k F
    }
    Half Ar = cumint_forward(g.h, lo_re);
    Half Ai = cumint_forward(g.h, lo_im);
    Half Br = cumint_backward(g.h, hi_re);
    Half Bi = cumint_backward(g.h, hi_im);

    ResolventEdge out;
    out.G = zeros(g);
    out.G_prime = zeros(g);
    for (int i = 0; i < N; ++i) {
        size_t j = (size_t)i;
        double kr = k.v[j].real(), ki = k.v[j].imag();
        double krp = kp.v[j].real(), kip = kp.v[j].imag();
        out.G[i] = (kr * Ai[j] + ki * Ar[j] + kr * Bi[j] - ki * Br[j]) / 12.0;
        out.G_prime[i] = (krp * Ai[j] + kip * Ar[j] + krp * Bi[j] - kip * Br[j]) / 12.0;
    }
    // full-line pairings; both must vanish for a decaying output
    GridFn wr = zeros(g), wi = zeros(g);
    for (int i = 0; i < N; ++i) {
        wr[i] = lo_re[(size_t)i];
        wi[i] = lo_im[(size_t)i];
    }
    out.pair_k = {integrate(wr), integrate(wi)};
    GridFn wim = zeros(g);
    for (int i = 0; i < N; ++i) wim[i] = k.v[(size_t)i].imag() * F[i];
    out.pair_imk = integrate(wim);
    return out;
}

void build_fbar_q(SpectralData& sd, const KinkProfile& kink, const DriftProfile& drift) {
    const Grid& g = kink.K.grid;
    int M = g.M();

    GridFn KY2 = kink.K * sd.Ybar1 * sd.Ybar1;
    double c = inner_p(KY2, sd.Ybar1, drift.p);
    sd.fbar = zeros(g, Parity::odd);
    for (int i = 0; i < g.N; ++i)
        sd.fbar[i] = sd.lambda1 * (KY2[i] - c * sd.Ybar1[i]);

    // decaying zero-frequency branch and its growing partner; the weighted
    // Wronskian p (w+ wd' - w+' wd) is exactly 1 by construction
    detail::FlatPair fp = detail::flat_even_pair(g);
    ShootResult s0 = shoot_channel(fp, 0.0, g, kink, drift);
    Half p = restrict_half(drift.p);
    Half wp((size_t)M), wpd((size_t)M);
    for (int i = 0; i < M; ++i) {
        size_t j = (size_t)i;
        wp[j] = fp.Y[j] + s0.U[j];
        wpd[j] = fp.Yp[j] + s0.U_prime[j];
    }
    for (int i = 0; i < M; ++i)
        if (!(wp[(size_t)i] > 0))
            throw NumericalError("build_fbar_q: zero-frequency branch lost positivity at y = " +
                                 sci(i * g.h));
    Half invw((size_t)M);
    for (int i = 0; i < M; ++i) {
        size_t j = (size_t)i;
        invw[j] = 1.0 / (p[j] * wp[j] * wp[j]);
    }
    Half J = cumint_forward(g.h, invw);
    Half wd((size_t)M), wdd((size_t)M);
    for (int i = 0; i < M; ++i) {
        size_t j = (size_t)i;
        wd[j] = wp[j] * J[j];
        wdd[j] = wpd[j] * J[j] + 1.0 / (p[j] * wp[j]);
    }

    HalfLineKernel Kq;
    Kq.grid = g;
    SepTerm t;
    t.outer_lo = wp;
    t.outer_lo_d = wpd;
    t.outer_hi = wd;
    t.outer_hi_d = wdd;
    t.inner_lo.resize((size_t)M);
    t.inner_hi.resize((size_t)M);
    for (int i = 0; i < M; ++i) {
        size_t j = (size_t)i;
        t.inner_lo[j] = wd[j] * p[j];
        t.inner_hi[j] = wp[j] * p[j];
    }
    Kq.terms.push_back(std::move(t));
    Kq.decay_note = "weighted inverse at zero frequency; vanishes at the origin";

    Half fb = restrict_half(sd.fbar);
    Half q = apply_kernel(Kq, fb);
    sd.q = extend_odd(g, q);
}

GoldenRule golden_rule_constants(const SpectralData& sd, const DriftProfile& drift) {
    const Grid& g = drift.b.grid;
    GridFn ki = im_of(special_k(g));
    GridFn psi = special("psi", g);
    GridFn psip = special("psiprime", g);

    // flat constant, from closed-form data on the same grid
    GridFn H = special("H", g);
    GridFn Y1 = special("Y1", g);
    GridFn HY2 = H * Y1 * Y1;
    double cflat = inner(HY2, Y1);
    GridFn f = zeros(g, Parity::odd);
    for (int i = 0; i < g.N; ++i) f[i] = 1.5 * (HY2[i] - cflat * Y1[i]);
    GridFn fprime = deriv1_fd6(f);
    GridFn numf = zeros(g), denf = zeros(g);
    for (int i = 0; i < g.N; ++i) {
        numf[i] = (psi[i] * fprime[i] + 0.5 * psip[i] * f[i]) * ki[i];
        denf[i] = psip[i] * f[i] * ki[i];
    }
    double den_flat = integrate(denf);
    if (std::abs(den_flat) < 0.3)
        throw RegimeError("golden_rule_constants: edge-pairing denominator " + sci(den_flat) +
                          " below 0.3");
    double a = -integrate(numf) / den_flat;

    // drift-corrected constant from the computed coupling source
    GridFn fbp = deriv1_fd6(sd.fbar);
    GridFn num0 = zeros(g), den0fn = zeros(g);
    for (int i = 0; i < g.N; ++i) {
        double ip = 1.0 / drift.p[i];
        num0[i] = (psi[i] * fbp[i] + 0.5 * psip[i] * sd.fbar[i]) * ip * ki[i];
        den0fn[i] = psip[i] * sd.fbar[i] * ip * ki[i];
    }
    // The weighted pairing shrinks roughly linearly in the drift amplitude
    // (about -0.327 + 0.73*delta for the canonical family), so it is guarded
    // only against genuine degeneracy; the flat pairing above carries the
    // hard regime threshold.
    double den0 = integrate(den0fn);
    if (std::abs(den0) < 0.15)
        throw RegimeError("golden_rule_constants: weighted resonance denominator " + sci(den0) +
                          " too close to zero");
    GoldenRule out;
    out.a = a;
    out.a0 = -integrate(num0) / den0;
    out.psi_f_imk = den0;
    return out;
}

void build_hbar_gbar(SpectralData& sd, const KinkProfile& kink, const DriftProfile& drift,
                     double tol) {
    const Grid& g = kink.K.grid;
    int N = g.N;
    GridFn psi = special("psi", g);
    GridFn psip = special("psiprime", g);
    GridFn fbp = deriv1_fd6(sd.fbar);

    GridFn ell = zeros(g, Parity::odd);
    for (int i = 0; i < N; ++i)
        ell[i] = (psi[i] * fbp[i] + (sd.a0_const + 0.5) * psip[i] * sd.fbar[i]) / drift.p[i];

    GridFn nell = -1.0 * ell;
    ResolventEdge flat = resolvent_L6(nell);

    // correction through the oscillatory pair at the shifted frequency; the
    // kernel part carries the drift terms, integrated by parts (b(0) = 0)
    double det = 4.0 * sd.lambda1 - 6.0;
    ComplexGridFn kc = kcirc(sd.mu, g);
    double c0 = kcirc_constants(sd.mu).c0;
    GridFn re = re_of(kc), im = im_of(kc);
    GridFn rep = deriv1_fd6(re), imp = deriv1_fd6(im);

    HalfLineKernel Gmu;
    Gmu.grid = g;
    Gmu.full_line = true;
    {
        SepTerm t;
        t.outer_lo.resize((size_t)N);
        t.outer_lo_d.resize((size_t)N);
        t.outer_hi.resize((size_t)N);
        t.outer_hi_d.resize((size_t)N);
        t.inner_lo.resize((size_t)N);
        t.inner_hi.resize((size_t)N);
        for (int i = 0; i < N; ++i) {
            size_t j = (size_t)i;
            t.outer_lo[j] = re[i] / c0;
            t.outer_lo_d[j] = rep[i] / c0;
            t.outer_hi[j] = im[i] / c0;
            t.outer_hi_d[j] = imp[i] / c0;
            t.inner_lo[j] = im[i];
            t.inner_hi[j] = re[i];
        }
        Gmu.terms.push_back(std::move(t));
        Gmu.decay_note = "oscillatory pair at the doubled frequency, full line";
    }

    HalfLineKernel Keta = Gmu;
    {
        SepTerm& t = Keta.terms[0];
        for (int i = 0; i < N; ++i) {
            size_t j = (size_t)i;
            double b = drift.b[i], bp = drift.b_prime[i], dv = kink.d[i];
            t.inner_lo[j] = -(imp[i] * b + im[i] * bp + im[i] * dv);
            t.inner_hi[j] = -(rep[i] * b + re[i] * bp + re[i] * dv);
        }
    }

    Half r0((size_t)N);
    for (int i = 0; i < N; ++i)
        r0[(size_t)i] = det * flat.G[i] + drift.b[i] * flat.G_prime[i] - kink.d[i] * flat.G[i];

    Half forc = apply_kernel(Gmu, r0);
    FredholmReport repres = neumann_solve(Keta, forc, tol);

    // The kernel does not preserve parity, so the iterate picks up an even
    // oscillatory component along Re k°. The operator and the source are both
    // odd-symmetric, hence the odd part is itself an exact solution; keep it.
    sd.hbar = zeros(g, Parity::odd);
    for (int i = 0; i < N; ++i) {
        double full = flat.G[i] + repres.solution[(size_t)i];
        double mirr = flat.G[g.N - 1 - i] + repres.solution[(size_t)(g.N - 1 - i)];
        sd.hbar[i] = 0.5 * (full - mirr);
    }
    sd.gbar = zeros(g, Parity::odd);
    for (int i = 0; i < N; ++i) sd.gbar[i] = drift.p[i] * sd.hbar[i];
}

SpectralData compute_spectral_data(const KinkProfile& kink, const DriftProfile& drift,
                                   double tol) {
    SpectralData sd;
    ModePair m0 = find_lambda0(kink, drift, tol);
    ModePair m1 = find_lambda1(kink, drift, tol);
    sd.lambda0 = m0.lambda;
    sd.Ybar0 = m0.Ybar;
    sd.lambda1 = m1.lambda;
    sd.Ybar1 = m1.Ybar;
    sd.mu = m1.mu;

    MatrixOracle mo = matrix_oracle(kink, drift);
    double gap = 0;
    bool saw_even = false, saw_odd = false;
    for (const auto& e : mo.eigen) {
        if (!saw_even && e.parity == Parity::even) {
            gap = std::max(gap, std::abs(e.value - sd.lambda0));
            saw_even = true;
        }
        if (!saw_odd && e.parity == Parity::odd) {
            gap = std::max(gap, std::abs(e.value - sd.lambda1));
            saw_odd = true;
        }
        if (saw_even && saw_odd) break;
    }
    if (!saw_even || !saw_odd)
        throw NumericalError("compute_spectral_data: dense check did not resolve both discrete "
                             "modes");
    sd.oracle_gap = gap;

    build_fbar_q(sd, kink, drift);
    GoldenRule gr = golden_rule_constants(sd, drift);
    sd.a_const = gr.a;
    sd.a0_const = gr.a0;
    sd.psi_f_imk = gr.psi_f_imk;
    build_hbar_gbar(sd, kink, drift);
    return sd;
}

} // namespace kinklab
