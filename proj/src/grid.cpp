#include "kinklab/grid.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>

namespace kinklab {

Grid make_grid(double L, double h) {
    if (!(L > 0) || !(h > 0))
        throw ConfigError("make_grid: need L > 0 and h > 0");
    double n = L / h;
    long ni = std::lround(n);
    if (ni < 2 || std::abs(n - (double)ni) > 1e-9 * std::max(1.0, n))
        throw ConfigError("make_grid: L/h must be an integer so that y = 0 is a node");
    Grid g;
    g.L = L;
    g.h = h;
    g.N = (int)(2 * ni + 1);
    return g;
}

Parity mul_parity(Parity a, Parity b) {
    if (a == Parity::none || b == Parity::none) return Parity::none;
    return a == b ? Parity::even : Parity::odd;
}

Parity add_parity(Parity a, Parity b) { return a == b ? a : Parity::none; }

Parity flip_parity(Parity a) {
    if (a == Parity::even) return Parity::odd;
    if (a == Parity::odd) return Parity::even;
    return Parity::none;
}

GridFn zeros(const Grid& g, Parity p) {
    GridFn f;
    f.grid = g;
    f.v.assign((size_t)g.N, 0.0);
    f.parity = p;
    return f;
}

GridFn make_fn(const Grid& g, const std::function<double(double)>& fn, Parity p) {
    GridFn f = zeros(g, p);
    for (int i = 0; i < g.N; ++i) f[i] = fn(g.y(i));
    return f;
}

ComplexGridFn make_cfn(const Grid& g, const std::function<std::complex<double>(double)>& fn) {
    ComplexGridFn f;
    f.grid = g;
    f.v.resize((size_t)g.N);
    for (int i = 0; i < g.N; ++i) f.v[(size_t)i] = fn(g.y(i));
    return f;
}

static void check_same(const GridFn& a, const GridFn& b, const char* who) {
    if (!a.grid.same(b.grid)) throw ConfigError(std::string(who) + ": grid mismatch");
}

GridFn operator+(const GridFn& a, const GridFn& b) {
    check_same(a, b, "operator+");
    GridFn r = a;
    for (int i = 0; i < r.size(); ++i) r[i] += b[i];
    r.parity = add_parity(a.parity, b.parity);
    return r;
}

GridFn operator-(const GridFn& a, const GridFn& b) {
    check_same(a, b, "operator-");
    GridFn r = a;
    for (int i = 0; i < r.size(); ++i) r[i] -= b[i];
    r.parity = add_parity(a.parity, b.parity);
    return r;
}

GridFn operator*(const GridFn& a, const GridFn& b) {
    check_same(a, b, "operator*");
    GridFn r = a;
    for (int i = 0; i < r.size(); ++i) r[i] *= b[i];
    r.parity = mul_parity(a.parity, b.parity);
    return r;
}

GridFn operator*(double s, const GridFn& a) {
    GridFn r = a;
    for (int i = 0; i < r.size(); ++i) r[i] *= s;
    return r;
}

double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double max_abs(const GridFn& f) { return max_abs(f.v); }

double parity_residual(const GridFn& f, Parity p) {
    if (p == Parity::none) return 0;
    double m = max_abs(f);
    if (m == 0) return 0;
    double s = (p == Parity::odd) ? 1.0 : -1.0;
    double r = 0;
    int N = f.size();
    for (int i = 0; i < N; ++i) r = std::max(r, std::abs(f[i] + s * f[N - 1 - i]));
    return r / m;
}

static constexpr double parity_tol = 1e-10;

void tag_parity(GridFn& f, Parity p) {
    double r = parity_residual(f, p);
    if (r > parity_tol)
        throw ConfigError("tag_parity: residual " + std::to_string(r) + " exceeds 1e-10");
    f.parity = p;
}

static void check_finite(const GridFn& f, const char* who) {
    for (int i = 0; i < f.size(); ++i)
        if (!std::isfinite(f[i]))
            throw NumericalError(std::string(who) + ": non-finite sample at node " +
                                 std::to_string(i) + " (y = " + std::to_string(f.grid.y(i)) + ")");
}

// composite Simpson; N odd guarantees an even interval count
static double simpson(double h, const double* f, int n) {
    long double s = f[0] + f[n - 1];
    for (int i = 1; i < n - 1; i += 2) s += 4.0L * f[i];
    for (int i = 2; i < n - 1; i += 2) s += 2.0L * f[i];
    return (double)(s * h / 3.0L);
}

double integrate(const GridFn& f) {
    check_finite(f, "integrate");
    return simpson(f.grid.h, f.v.data(), f.size());
}

double integrate_window(const GridFn& f, double a) {
    const Grid& g = f.grid;
    int k = (int)std::lround(a / g.h);
    if (k < 1 || k > g.mid()) throw ConfigError("integrate_window: bad half-width");
    return simpson(g.h, f.v.data() + (g.mid() - k), 2 * k + 1);
}

GridFn differentiate(const GridFn& f) {
    const Grid& g = f.grid;
    GridFn r = zeros(g);
    int N = g.N;
    double ih2 = 1.0 / (2 * g.h);
    r[0] = (-3 * f[0] + 4 * f[1] - f[2]) * ih2;
    for (int i = 1; i < N - 1; ++i) r[i] = (f[i + 1] - f[i - 1]) * ih2;
    r[N - 1] = (3 * f[N - 1] - 4 * f[N - 2] + f[N - 3]) * ih2;
    r.parity = flip_parity(f.parity);
    return r;
}

GridFn deriv1_fd6(const GridFn& f) {
    const Grid& g = f.grid;
    GridFn r = zeros(g, flip_parity(f.parity));
    int N = g.N;
    double ih = 1.0 / g.h;
    for (int i = 0; i < N; ++i) {
        if (i >= 3 && i < N - 3)
            r[i] = (-f[i - 3] + 9 * f[i - 2] - 45 * f[i - 1] + 45 * f[i + 1] - 9 * f[i + 2] +
                    f[i + 3]) * ih / 60.0;
        else if (i >= 1 && i < N - 1)
            r[i] = (f[i + 1] - f[i - 1]) * ih / 2.0;
        else
            r[i] = (i == 0) ? (-3 * f[0] + 4 * f[1] - f[2]) * ih / 2.0
                            : (3 * f[N - 1] - 4 * f[N - 2] + f[N - 3]) * ih / 2.0;
    }
    return r;
}

GridFn deriv2_fd6(const GridFn& f) {
    const Grid& g = f.grid;
    GridFn r = zeros(g, f.parity);
    int N = g.N;
    double ih2 = 1.0 / (g.h * g.h);
    for (int i = 0; i < N; ++i) {
        if (i >= 3 && i < N - 3)
            r[i] = (2 * f[i - 3] - 27 * f[i - 2] + 270 * f[i - 1] - 490 * f[i] +
                    270 * f[i + 1] - 27 * f[i + 2] + 2 * f[i + 3]) * ih2 / 180.0;
        else if (i >= 1 && i < N - 1)
            r[i] = (f[i - 1] - 2 * f[i] + f[i + 1]) * ih2;
        else
            r[i] = (i == 0) ? (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) * ih2
                            : (2 * f[N - 1] - 5 * f[N - 2] + 4 * f[N - 3] - f[N - 4]) * ih2;
    }
    return r;
}

double inner(const GridFn& f, const GridFn& g) {
    check_same(f, g, "inner");
    return integrate(f * g);
}

double inner_p(const GridFn& f, const GridFn& g, const GridFn& p) {
    check_same(f, g, "inner_p");
    check_same(f, p, "inner_p");
    return integrate(f * g * p);
}

WeightedNorms weighted_norms(const GridFn& v1, const GridFn& v2) {
    check_same(v1, v2, "weighted_norms");
    const Grid& g = v1.grid;
    GridFn d = differentiate(v1);
    GridFn a = zeros(g), b = zeros(g);
    const double c = 1.0 / (2.0 * std::sqrt(2.0));
    for (int i = 0; i < g.N; ++i) {
        double w = 1.0 / std::cosh(c * g.y(i));
        a[i] = (d[i] * d[i] + v1[i] * v1[i]) * w;
        b[i] = v2[i] * v2[i] * w;
    }
    WeightedNorms r;
    r.H1w = std::sqrt(integrate(a));
    r.L2w = std::sqrt(integrate(b));
    return r;
}

GridFn project_out_p(const GridFn& f, const GridFn& dir, const GridFn& p) {
    double dd = inner_p(dir, dir, p);
    double scale = max_abs(dir);
    if (!(dd > 1e-14 * scale * scale))
        throw ConfigError("project_out_p: degenerate direction norm");
    double c = inner_p(f, dir, p) / dd;
    GridFn r = f - c * dir;
    r.parity = add_parity(f.parity, dir.parity);
    return r;
}

void to_csv(const GridFn& f, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw ConfigError("to_csv: cannot open " + path);
    std::fprintf(fp, "y,value\n");
    for (int i = 0; i < f.size(); ++i)
        std::fprintf(fp, "%.16e,%.16e\n", f.grid.y(i), f[i]);
    std::fclose(fp);
}

GridFn from_csv(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "r");
    if (!fp) throw ConfigError("from_csv: cannot open " + path);
    char line[256];
    if (!std::fgets(line, sizeof line, fp)) {
        std::fclose(fp);
        throw ConfigError("from_csv: empty file " + path);
    }
    std::vector<double> ys, vs;
    while (std::fgets(line, sizeof line, fp)) {
        double y, v;
        if (std::sscanf(line, "%lf,%lf", &y, &v) == 2) {
            ys.push_back(y);
            vs.push_back(v);
        }
    }
    std::fclose(fp);
    size_t n = ys.size();
    if (n < 3 || n % 2 == 0) throw ConfigError("from_csv: need an odd node count >= 3");
    double h = ys[1] - ys[0];
    double L = -ys[0];
    for (size_t i = 0; i < n; ++i)
        if (std::abs(ys[i] - (-L + (double)i * h)) > 1e-9 * std::max(1.0, L))
            throw ConfigError("from_csv: nodes not uniform/symmetric");
    Grid g = make_grid(L, h);
    GridFn f = zeros(g);
    f.v = vs;
    return f;
}

// ---- half-line helpers ----------------------------------------------------

Half restrict_half(const GridFn& f) {
    int m = f.grid.mid();
    return Half(f.v.begin() + m, f.v.end());
}

GridFn extend_odd(const Grid& g, const Half& f) {
    if ((int)f.size() != g.M()) throw ConfigError("extend_odd: size mismatch");
    GridFn r = zeros(g, Parity::odd);
    int m = g.mid();
    for (int j = 0; j < g.M(); ++j) {
        r[m + j] = f[(size_t)j];
        r[m - j] = -f[(size_t)j];
    }
    r[m] = 0; // odd extension pins the origin
    return r;
}

GridFn extend_even(const Grid& g, const Half& f) {
    if ((int)f.size() != g.M()) throw ConfigError("extend_even: size mismatch");
    GridFn r = zeros(g, Parity::even);
    int m = g.mid();
    for (int j = 0; j < g.M(); ++j) {
        r[m + j] = f[(size_t)j];
        r[m - j] = f[(size_t)j];
    }
    return r;
}

Half sample_half(const Grid& g, const std::function<double(double)>& f) {
    Half r((size_t)g.M());
    for (int j = 0; j < g.M(); ++j) r[(size_t)j] = f(j * g.h);
    return r;
}

double integrate_half(const Grid& g, const Half& f) {
    int M = (int)f.size();
    if (M != g.M()) throw ConfigError("integrate_half: size mismatch");
    if (M < 5) throw ConfigError("integrate_half: grid too small");
    if ((M - 1) % 2 == 0) return simpson(g.h, f.data(), M);
    // odd interval count: 3/8 rule on the first three intervals, Simpson after
    double head = 3.0 * g.h / 8.0 * (f[0] + 3 * f[1] + 3 * f[2] + f[3]);
    return head + simpson(g.h, f.data() + 3, M - 3);
}

// per-panel integrals of the cubic through the four nearest nodes
static std::vector<double> panels(double h, const Half& f) {
    int M = (int)f.size();
    std::vector<double> P((size_t)(M - 1));
    if (M < 4) { // degenerate: trapezoid
        for (int j = 0; j + 1 < M; ++j) P[(size_t)j] = 0.5 * h * (f[j] + f[j + 1]);
        return P;
    }
    const double c = h / 24.0;
    P[0] = c * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]);
    for (int j = 1; j < M - 2; ++j)
        P[(size_t)j] = c * (-f[j - 1] + 13 * f[j] + 13 * f[j + 1] - f[j + 2]);
    P[(size_t)(M - 2)] = c * (9 * f[M - 1] + 19 * f[M - 2] - 5 * f[M - 3] + f[M - 4]);
    return P;
}

Half cumint_forward(double h, const Half& f) {
    std::vector<double> P = panels(h, f);
    Half out(f.size());
    long double acc = 0;
    out[0] = 0;
    for (size_t j = 0; j < P.size(); ++j) {
        acc += P[j];
        out[j + 1] = (double)acc;
    }
    return out;
}

Half cumint_backward(double h, const Half& f) {
    std::vector<double> P = panels(h, f);
    Half out(f.size());
    long double acc = 0;
    out[f.size() - 1] = 0;
    for (size_t j = P.size(); j-- > 0;) {
        acc += P[j];
        out[j] = (double)acc;
    }
    return out;
}

Half cumint_trap(double h, const Half& f) {
    Half out(f.size());
    long double acc = 0;
    out[0] = 0;
    for (size_t j = 0; j + 1 < f.size(); ++j) {
        acc += 0.5L * h * (f[j] + f[j + 1]);
        out[j + 1] = (double)acc;
    }
    return out;
}

} // namespace kinklab
