#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "kinklab/errors.hpp"
#include "kinklab/fredholm.hpp"
#include "kinklab/grid.hpp"

using namespace kinklab;

namespace {

// G(y,w) = a e^{-r y} e^{-s w} on both sides of the diagonal
HalfLineKernel rank_one(const Grid& g, double a, double r, double s, bool with_d = false) {
    HalfLineKernel k;
    k.grid = g;
    int n = k.n();
    SepTerm t;
    t.outer_lo.resize((size_t)n);
    t.inner_lo.resize((size_t)n);
    for (int i = 0; i < n; ++i) {
        double y = k.node_y(i);
        t.outer_lo[(size_t)i] = a * std::exp(-r * y);
        t.inner_lo[(size_t)i] = std::exp(-s * y);
    }
    t.outer_hi = t.outer_lo;
    t.inner_hi = t.inner_lo;
    if (with_d) {
        t.outer_lo_d.resize((size_t)n);
        for (int i = 0; i < n; ++i) t.outer_lo_d[(size_t)i] = -r * t.outer_lo[(size_t)i];
        t.outer_hi_d = t.outer_lo_d;
    }
    k.terms.push_back(std::move(t));
    return k;
}

// lower-triangular G(y,w) = (1/2) e^{w-y} for w <= y, zero above
HalfLineKernel volterra(const Grid& g, bool with_d = false) {
    HalfLineKernel k;
    k.grid = g;
    int n = k.n();
    SepTerm t;
    t.outer_lo.resize((size_t)n);
    t.inner_lo.resize((size_t)n);
    t.outer_hi.assign((size_t)n, 0.0);
    t.inner_hi.assign((size_t)n, 0.0);
    for (int i = 0; i < n; ++i) {
        double y = k.node_y(i);
        t.outer_lo[(size_t)i] = 0.5 * std::exp(-y);
        t.inner_lo[(size_t)i] = std::exp(y);
    }
    if (with_d) {
        t.outer_lo_d.resize((size_t)n);
        for (int i = 0; i < n; ++i) t.outer_lo_d[(size_t)i] = -t.outer_lo[(size_t)i];
        t.outer_hi_d.assign((size_t)n, 0.0);
    }
    k.terms.push_back(std::move(t));
    return k;
}

Half sample(const HalfLineKernel& k, double (*f)(double)) {
    Half v((size_t)k.n());
    for (int i = 0; i < k.n(); ++i) v[(size_t)i] = f(k.node_y(i));
    return v;
}

double max_diff(const Half& a, const Half& b) {
    double m = 0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

const Grid GF = make_grid(20.0, 0.005); // fine, for the iterative route
const Grid GC = make_grid(20.0, 0.01);  // coarser, keeps dense solves quick

} // namespace

TEST_CASE("rank-one kernel: bound, iteration, closed-form solution") {
    HalfLineKernel k = rank_one(GF, 0.5, 1.0, 1.0);
    double nu_ref = 0.5 * (1.0 - std::exp(-GF.L));
    CHECK(std::abs(estimate_nu(k) - nu_ref) < 1e-6);

    Half g = sample(k, [](double y) { return std::exp(-y); });
    FredholmReport r = neumann_solve(k, g);
    Half ex = sample(k, [](double y) { return (4.0 / 3.0) * std::exp(-y); });
    CHECK(max_diff(r.solution, ex) < 1e-9);
    CHECK(r.iterations >= 10);
    CHECK(r.iterations < 100);
    CHECK(r.residual < 1e-11);

    // sup-norm certificate of the contraction argument
    double fmax = 0, gmax = 0;
    for (size_t i = 0; i < g.size(); ++i) {
        fmax = std::max(fmax, std::abs(r.solution[i]));
        gmax = std::max(gmax, std::abs(g[i]));
    }
    CHECK(fmax <= gmax / (1.0 - r.nu) + 1e-12);
}

TEST_CASE("zero data gives the zero solution") {
    HalfLineKernel k = rank_one(GC, 0.5, 1.0, 1.0);
    Half g((size_t)k.n(), 0.0);
    FredholmReport rn = neumann_solve(k, g);
    FredholmReport rc = collocation_solve(k, g);
    CHECK(max_diff(rn.solution, g) == 0.0);
    CHECK(rn.iterations == 1);
    CHECK(max_diff(rc.solution, g) == 0.0);
}

TEST_CASE("derivative of the operator, including the diagonal jump") {
    HalfLineKernel k = rank_one(GF, 0.5, 1.0, 1.0, true);
    Half f = sample(k, [](double y) { return std::exp(-2.0 * y) * (1.0 + y); });
    // outer is e^{-y}: d/dy(Gf) = -(Gf), and the two branches agree on the
    // diagonal so no jump contribution
    Half a = apply_kernel(k, f);
    Half d = apply_kernel_dy(k, f);
    double worst = 0;
    for (size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(d[i] + a[i]));
    CHECK(worst < 1e-13);

    // triangular kernel: jump equals the diagonal value 1/2
    HalfLineKernel kv = volterra(GF, true);
    Half av = apply_kernel(kv, f);
    Half dv = apply_kernel_dy(kv, f);
    worst = 0;
    for (size_t i = 0; i < f.size(); ++i)
        worst = std::max(worst, std::abs(dv[i] - (-av[i] + 0.5 * f[i])));
    CHECK(worst < 1e-13);

    HalfLineKernel bare = volterra(GF, false);
    CHECK_THROWS_AS(apply_kernel_dy(bare, f), std::logic_error);
}

TEST_CASE("triangular kernel: both routes reproduce a closed form") {
    auto gfun = [](double y) { return std::exp(-y) * (1.0 - y * y / 8.0); };
    auto ffun = [](double y) { return std::exp(-y) * (1.0 + y / 2.0); };

    {
        HalfLineKernel k = volterra(GF);
        Half g = sample(k, gfun), ex = sample(k, ffun);
        FredholmReport r = neumann_solve(k, g);
        CHECK(max_diff(r.solution, ex) < 2e-9);
    }
    {
        HalfLineKernel k = volterra(GC);
        Half g = sample(k, gfun), ex = sample(k, ffun);
        FredholmReport rn = neumann_solve(k, g);
        FredholmReport rc = collocation_solve(k, g);
        CHECK(max_diff(rc.solution, ex) < 1e-7);
        CHECK(max_diff(rc.solution, rn.solution) < 1e-7);
        CHECK(rc.residual < 1e-7);
    }
}

TEST_CASE("kernel above the contraction threshold") {
    HalfLineKernel k = rank_one(GC, 4.0, 1.0, 2.0);
    Half g = sample(k, [](double y) { return std::exp(-y); });
    CHECK(estimate_nu(k) >= 1.0);
    CHECK_THROWS_AS(neumann_solve(k, g), RegimeError);

    FredholmReport r = collocation_solve(k, g);
    Half ex = sample(k, [](double y) { return -3.0 * std::exp(-y); });
    CHECK(max_diff(r.solution, ex) < 1e-6);
    CHECK(r.nu >= 1.0);
}

TEST_CASE("iteration cap and non-finite guards") {
    // constant outer, unit-mass inner: spectral radius equals the bound,
    // so a bound just below one is legal but far too slow
    HalfLineKernel slow;
    slow.grid = GC;
    {
        SepTerm t;
        int n = slow.n();
        t.outer_lo.assign((size_t)n, 0.999);
        t.inner_lo.resize((size_t)n);
        for (int i = 0; i < n; ++i) {
            double w = slow.node_y(i) - 10.0;
            t.inner_lo[(size_t)i] = std::exp(-w * w) / std::sqrt(M_PI);
        }
        t.outer_hi = t.outer_lo;
        t.inner_hi = t.inner_lo;
        slow.terms.push_back(std::move(t));
    }
    Half g = sample(slow, [](double y) { return std::exp(-y); });
    CHECK(estimate_nu(slow) < 1.0);
    CHECK_THROWS_AS(neumann_solve(slow, g), NumericalError);

    HalfLineKernel k = rank_one(GC, 0.5, 1.0, 1.0);
    Half bad = g;
    bad[5] = std::nan("");
    CHECK_THROWS_AS(neumann_solve(k, bad), NumericalError);

    HalfLineKernel inf = rank_one(GC, 0.5, 1.0, 1.0);
    inf.terms[0].inner_lo[3] = INFINITY;
    CHECK_THROWS_AS(estimate_nu(inf), NumericalError);
}

TEST_CASE("near-singular dense system is rejected") {
    HalfLineKernel k = rank_one(GC, 1.0, 1.0, 1.0);
    // rescale the kernel so the discrete I - G has an eigenvalue at zero
    Half prod((size_t)k.n());
    for (int i = 0; i < k.n(); ++i)
        prod[(size_t)i] = k.terms[0].inner_lo[(size_t)i] * k.terms[0].outer_lo[(size_t)i];
    double ip = cumint_forward(GC.h, prod).back();
    for (int i = 0; i < k.n(); ++i) {
        k.terms[0].inner_lo[(size_t)i] /= ip;
        k.terms[0].inner_hi[(size_t)i] /= ip;
    }
    Half g = sample(k, [](double y) { return std::exp(-y); });
    CHECK_THROWS_AS(collocation_solve(k, g), NumericalError);
}

TEST_CASE("report serialization") {
    HalfLineKernel k = rank_one(GC, 0.5, 1.0, 1.0);
    Half g = sample(k, [](double y) { return std::exp(-y); });
    FredholmReport r = neumann_solve(k, g);
    std::string j = report_json(r, "sol.csv");
    CHECK(j.find("\"nu\"") != std::string::npos);
    CHECK(j.find("\"iterations\"") != std::string::npos);
    CHECK(j.find("\"residual\"") != std::string::npos);
    CHECK(j.find("sol.csv") != std::string::npos);
}
