#include "kinklab/fredholm.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <lapacke.h>

#include <json.hpp>

#include "kinklab/errors.hpp"

namespace kinklab {

namespace {

void require_size(const HalfLineKernel& k, const Half& f, const char* who) {
    if ((int)f.size() != k.n())
        throw ConfigError(std::string(who) + ": vector length " + std::to_string(f.size()) +
                          " does not match kernel nodes " + std::to_string(k.n()));
    for (const SepTerm& t : k.terms)
        if ((int)t.outer_lo.size() != k.n() || (int)t.inner_lo.size() != k.n() ||
            (int)t.outer_hi.size() != k.n() || (int)t.inner_hi.size() != k.n())
            throw ConfigError(std::string(who) + ": kernel term sampled on wrong node count");
}

// 4-node weight stencil of the cubic integration panel over [p, p+1];
// matches the panels used by cumint_forward/cumint_backward so the dense
// route and the iterative route share one quadrature
struct Panel {
    int base;
    double w[4];
};

Panel panel_stencil(double h, int n, int p) {
    const double c = h / 24.0;
    if (p == 0) return {0, {9 * c, 19 * c, -5 * c, c}};
    if (p == n - 2) return {n - 4, {c, -5 * c, 19 * c, 9 * c}};
    return {p - 1, {-c, 13 * c, 13 * c, -c}};
}

} // namespace

double eval_kernel(const HalfLineKernel& k, int i, int j) {
    double s = 0;
    for (const SepTerm& t : k.terms)
        s += (j <= i) ? t.outer_lo[(size_t)i] * t.inner_lo[(size_t)j]
                      : t.outer_hi[(size_t)i] * t.inner_hi[(size_t)j];
    return s;
}

Half apply_kernel(const HalfLineKernel& k, const Half& f) {
    require_size(k, f, "apply_kernel");
    int n = k.n();
    Half out((size_t)n, 0.0), tmp((size_t)n);
    for (const SepTerm& t : k.terms) {
        for (int i = 0; i < n; ++i) tmp[(size_t)i] = t.inner_lo[(size_t)i] * f[(size_t)i];
        Half cl = cumint_forward(k.grid.h, tmp);
        for (int i = 0; i < n; ++i) tmp[(size_t)i] = t.inner_hi[(size_t)i] * f[(size_t)i];
        Half ch = cumint_backward(k.grid.h, tmp);
        for (int i = 0; i < n; ++i)
            out[(size_t)i] += t.outer_lo[(size_t)i] * cl[(size_t)i] +
                              t.outer_hi[(size_t)i] * ch[(size_t)i];
    }
    return out;
}

Half apply_kernel_dy(const HalfLineKernel& k, const Half& f) {
    require_size(k, f, "apply_kernel_dy");
    int n = k.n();
    Half out((size_t)n, 0.0), tmp((size_t)n);
    for (const SepTerm& t : k.terms) {
        if ((int)t.outer_lo_d.size() != n || (int)t.outer_hi_d.size() != n)
            throw std::logic_error("apply_kernel_dy: kernel lacks outer derivatives");
        for (int i = 0; i < n; ++i) tmp[(size_t)i] = t.inner_lo[(size_t)i] * f[(size_t)i];
        Half cl = cumint_forward(k.grid.h, tmp);
        for (int i = 0; i < n; ++i) tmp[(size_t)i] = t.inner_hi[(size_t)i] * f[(size_t)i];
        Half ch = cumint_backward(k.grid.h, tmp);
        for (int i = 0; i < n; ++i) {
            double jump = t.outer_lo[(size_t)i] * t.inner_lo[(size_t)i] -
                          t.outer_hi[(size_t)i] * t.inner_hi[(size_t)i];
            out[(size_t)i] += t.outer_lo_d[(size_t)i] * cl[(size_t)i] +
                              t.outer_hi_d[(size_t)i] * ch[(size_t)i] + jump * f[(size_t)i];
        }
    }
    return out;
}

double estimate_nu(const HalfLineKernel& k) {
    int n = k.n();
    Half bound((size_t)n, 0.0), tmp((size_t)n);
    for (const SepTerm& t : k.terms) {
        for (int i = 0; i < n; ++i) tmp[(size_t)i] = std::abs(t.inner_lo[(size_t)i]);
        Half cl = cumint_forward(k.grid.h, tmp);
        for (int i = 0; i < n; ++i) tmp[(size_t)i] = std::abs(t.inner_hi[(size_t)i]);
        Half ch = cumint_backward(k.grid.h, tmp);
        for (int i = 0; i < n; ++i)
            bound[(size_t)i] += std::abs(t.outer_lo[(size_t)i]) * cl[(size_t)i] +
                                std::abs(t.outer_hi[(size_t)i]) * ch[(size_t)i];
    }
    double nu = 0;
    for (double v : bound) nu = std::max(nu, v);
    if (!std::isfinite(nu)) throw NumericalError("estimate_nu: kernel bound is not finite");
    return nu;
}

FredholmReport neumann_solve(const HalfLineKernel& k, const Half& g, double tol, int cap) {
    require_size(k, g, "neumann_solve");
    FredholmReport r;
    r.nu = estimate_nu(k);
    if (r.nu >= 1.0)
        throw RegimeError("neumann_solve: contraction bound nu = " + std::to_string(r.nu) +
                          " >= 1; use collocation_solve");
    Half f = g;
    bool converged = false;
    for (int it = 1; it <= cap; ++it) {
        Half next = apply_kernel(k, f);
        double change = 0, scale = 1;
        bool finite = true;
        for (size_t i = 0; i < f.size(); ++i) {
            next[i] += g[i];
            if (!std::isfinite(next[i])) finite = false;
            change = std::max(change, std::abs(next[i] - f[i]));
            scale = std::max(scale, std::abs(next[i]));
        }
        f.swap(next);
        r.iterations = it;
        if (!finite)
            throw NumericalError("neumann_solve: iteration produced a non-finite value");
        if (change <= tol * scale) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw NumericalError("neumann_solve: no convergence within " + std::to_string(cap) +
                             " iterations (nu = " + std::to_string(r.nu) + ")");
    Half gf = apply_kernel(k, f);
    for (size_t i = 0; i < f.size(); ++i)
        r.residual = std::max(r.residual, std::abs(f[i] - g[i] - gf[i]));
    r.solution = std::move(f);
    return r;
}

FredholmReport collocation_solve(const HalfLineKernel& k, const Half& g) {
    require_size(k, g, "collocation_solve");
    int n = k.n();
    double h = k.grid.h;
    if (n < 4) throw ConfigError("collocation_solve: need at least 4 nodes");
    std::vector<double> A((size_t)n * (size_t)n, 0.0);
    {
        // forward sweep: row i integrates the lower branch over [0, y_i]
        Half wlo((size_t)n, 0.0);
        int support = 0;
        for (int i = 0; i < n; ++i) {
            if (i > 0) {
                Panel P = panel_stencil(h, n, i - 1);
                for (int t = 0; t < 4; ++t) wlo[(size_t)(P.base + t)] += P.w[t];
                support = std::max(support, P.base + 3);
            }
            double* row = A.data() + (size_t)i * (size_t)n;
            for (const SepTerm& t : k.terms) {
                double ol = t.outer_lo[(size_t)i];
                if (ol == 0) continue;
                for (int j = 0; j <= support; ++j)
                    row[j] -= wlo[(size_t)j] * ol * t.inner_lo[(size_t)j];
            }
        }
        // backward sweep: row i integrates the upper branch over [y_i, L]
        Half whi((size_t)n, 0.0);
        int base = n - 1;
        for (int i = n - 1; i >= 0; --i) {
            if (i < n - 1) {
                Panel P = panel_stencil(h, n, i);
                for (int t = 0; t < 4; ++t) whi[(size_t)(P.base + t)] += P.w[t];
                base = std::min(base, P.base);
            }
            double* row = A.data() + (size_t)i * (size_t)n;
            for (const SepTerm& t : k.terms) {
                double oh = t.outer_hi[(size_t)i];
                if (oh == 0) continue;
                for (int j = base; j < n; ++j)
                    row[j] -= whi[(size_t)j] * oh * t.inner_hi[(size_t)j];
            }
        }
        for (int i = 0; i < n; ++i) A[(size_t)i * (size_t)n + (size_t)i] += 1.0;
    }

    double anorm = LAPACKE_dlange(LAPACK_ROW_MAJOR, '1', n, n, A.data(), n);
    std::vector<lapack_int> ipiv((size_t)n);
    lapack_int info = LAPACKE_dgetrf(LAPACK_ROW_MAJOR, n, n, A.data(), n, ipiv.data());
    if (info != 0)
        throw NumericalError("collocation_solve: LU factorization failed (info = " +
                             std::to_string(info) + ")");
    double rcond = 0;
    info = LAPACKE_dgecon(LAPACK_ROW_MAJOR, '1', n, A.data(), n, anorm, &rcond);
    if (info != 0 || !(rcond > 1e-10))
        throw NumericalError("collocation_solve: system is ill-conditioned (rcond = " +
                             std::to_string(rcond) + ")");
    Half f = g;
    info = LAPACKE_dgetrs(LAPACK_ROW_MAJOR, 'N', n, 1, A.data(), n, ipiv.data(), f.data(), 1);
    if (info != 0)
        throw NumericalError("collocation_solve: solve failed (info = " + std::to_string(info) +
                             ")");

    FredholmReport r;
    r.nu = estimate_nu(k);
    Half gf = apply_kernel(k, f);
    for (size_t i = 0; i < f.size(); ++i)
        r.residual = std::max(r.residual, std::abs(f[i] - g[i] - gf[i]));
    r.solution = std::move(f);
    return r;
}

void write_solution_csv(const std::string& path, const HalfLineKernel& k, const Half& f) {
    FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw ConfigError("write_solution_csv: cannot open " + path);
    std::fprintf(fp, "y,value\n");
    for (int i = 0; i < (int)f.size(); ++i)
        std::fprintf(fp, "%.16e,%.16e\n", k.node_y(i), f[(size_t)i]);
    std::fclose(fp);
}

std::string report_json(const FredholmReport& r, const std::string& solution_csv_path) {
    nlohmann::json j{{"solution_csv_path", solution_csv_path},
                     {"nu", r.nu},
                     {"iterations", r.iterations},
                     {"residual", r.residual}};
    return j.dump(2);
}

} // namespace kinklab
