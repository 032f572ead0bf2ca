#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "kinklab/grid.hpp"

using namespace kinklab;

namespace {
const double SQ2 = std::sqrt(2.0);
double sech(double x) { return 1.0 / std::cosh(x); }
double Y1(double y) { return std::pow(2.0, -0.75) * std::sqrt(3.0) * std::tanh(y / SQ2) * sech(y / SQ2); }
} // namespace

TEST_CASE("grid construction") {
    Grid g = make_grid(40.0, 0.005);
    CHECK(g.N == 16001);
    CHECK(g.N % 2 == 1);
    CHECK(g.y(g.mid()) == 0.0);
    CHECK(g.y(0) == doctest::Approx(-40.0));
    CHECK(g.y(g.N - 1) == doctest::Approx(40.0));
    // -y is a node for every node y
    CHECK(g.y(g.mid() + 7) == -g.y(g.mid() - 7));
    CHECK_THROWS_AS(make_grid(40.0, 0.0061), ConfigError);
    CHECK_THROWS_AS(make_grid(-1.0, 0.01), ConfigError);
}

TEST_CASE("integrate: zero, odd cancellation, closed forms") {
    Grid g = make_grid(40.0, 0.005);
    CHECK(integrate(zeros(g)) == 0.0);

    GridFn f = make_fn(g, [](double y) { return y * std::exp(-y * y / 10.0); });
    tag_parity(f, Parity::odd);
    CHECK(std::abs(integrate(f)) <= 1e-12 * max_abs(f) * g.L);

    GridFn y1sq = make_fn(g, [](double y) { return Y1(y) * Y1(y); });
    CHECK(integrate(y1sq) == doctest::Approx(1.0).epsilon(1e-8));

    // int sech(y/(2 sqrt 2)) = 2 sqrt(2) pi, up to the e^{-L/(2 sqrt 2)} tail
    GridFn w = make_fn(g, [](double y) { return sech(y / (2 * SQ2)); });
    CHECK(std::abs(integrate(w) - 2 * SQ2 * M_PI) < 2e-5);
}

TEST_CASE("integrate rejects non-finite naming the node") {
    Grid g = make_grid(1.0, 0.5);
    GridFn f = zeros(g);
    f[3] = std::nan("");
    CHECK_THROWS_WITH_AS(integrate(f), doctest::Contains("node 3"), NumericalError);
}

TEST_CASE("differentiate: exactness, order, parity flip") {
    Grid g = make_grid(20.0, 0.01);
    GridFn c = make_fn(g, [](double) { return 3.7; });
    GridFn dc = differentiate(c);
    for (int i = 0; i < g.N; ++i) CHECK(std::abs(dc[i]) < 1e-12);

    auto err_at = [](double h) {
        Grid gg = make_grid(20.0, h);
        GridFn f = make_fn(gg, [](double y) { return std::tanh(y / SQ2); });
        GridFn d = differentiate(f);
        double e = 0;
        for (int i = 1; i < gg.N - 1; ++i) {
            double ex = sech(gg.y(i) / SQ2);
            e = std::max(e, std::abs(d[i] - ex * ex / SQ2));
        }
        return e;
    };
    double e1 = err_at(0.02), e2 = err_at(0.01);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1)); // O(h^2)

    GridFn f = make_fn(g, [](double y) { return std::tanh(y); }, Parity::odd);
    CHECK(differentiate(f).parity == Parity::even);
    CHECK(parity_residual(differentiate(f), Parity::even) < 1e-12);
}

TEST_CASE("fd6 stencils beat the h^2 rule on smooth data") {
    Grid g = make_grid(10.0, 0.01);
    GridFn f = make_fn(g, [](double y) { return std::exp(-y * y / 4.0) * std::sin(y); });
    GridFn d1 = deriv1_fd6(f), d2 = deriv2_fd6(f);
    double e1 = 0, e2 = 0;
    for (int i = 10; i < g.N - 10; ++i) {
        double y = g.y(i), E = std::exp(-y * y / 4.0);
        double ex1 = E * (std::cos(y) - 0.5 * y * std::sin(y));
        double ex2 = E * ((0.25 * y * y - 0.5) * std::sin(y) - y * std::cos(y) - std::sin(y));
        e1 = std::max(e1, std::abs(d1[i] - ex1));
        e2 = std::max(e2, std::abs(d2[i] - ex2));
    }
    CHECK(e1 < 1e-10);
    CHECK(e2 < 1e-8);
}

TEST_CASE("cumulative quadrature is 4th order") {
    auto err_at = [](double h) {
        Grid g = make_grid(10.0, h);
        Half f = sample_half(g, [](double y) { return std::cos(y); });
        Half c = cumint_forward(g.h, f);
        double e = 0;
        for (size_t j = 0; j < c.size(); ++j)
            e = std::max(e, std::abs(c[j] - std::sin((double)j * g.h)));
        return e;
    };
    double e1 = err_at(0.02), e2 = err_at(0.01);
    CHECK(e1 / e2 > 12.0); // ~16 for O(h^4)
    CHECK(e2 < 1e-9);

    // backward + forward sum to the full integral at every node
    Grid g = make_grid(10.0, 0.01);
    Half f = sample_half(g, [](double y) { return std::exp(-y) * (1 + y); });
    Half a = cumint_forward(g.h, f), b = cumint_backward(g.h, f);
    double tot = a.back();
    for (size_t j = 0; j < a.size(); ++j)
        CHECK(std::abs(a[j] + b[j] - tot) < 1e-13 * std::max(1.0, std::abs(tot)));
}

TEST_CASE("inner products") {
    Grid g = make_grid(20.0, 0.01);
    GridFn f = make_fn(g, [](double y) { return std::exp(-y * y / 6.0) * y; }, Parity::odd);
    GridFn e = make_fn(g, [](double y) { return std::exp(-y * y / 8.0); }, Parity::even);
    GridFn one = make_fn(g, [](double) { return 1.0; }, Parity::even);

    CHECK(inner_p(f, f, one) == doctest::Approx(inner(f, f)).epsilon(1e-14));
    CHECK(std::abs(inner(f, e)) < 1e-12);
    CHECK(inner_p(f, e, e) == doctest::Approx(inner_p(e, f, e)).epsilon(1e-14));

    Grid g2 = make_grid(20.0, 0.02);
    GridFn other = zeros(g2);
    CHECK_THROWS_AS(inner(f, other), ConfigError);
}

TEST_CASE("weighted norms") {
    Grid g = make_grid(40.0, 0.01);
    WeightedNorms z = weighted_norms(zeros(g), zeros(g));
    CHECK(z.H1w == 0.0);
    CHECK(z.L2w == 0.0);

    GridFn one = make_fn(g, [](double) { return 1.0; });
    WeightedNorms n = weighted_norms(zeros(g), one);
    CHECK(n.L2w * n.L2w == doctest::Approx(2 * SQ2 * M_PI).epsilon(1e-5));
}

TEST_CASE("project_out_p") {
    Grid g = make_grid(20.0, 0.01);
    GridFn p = make_fn(g, [](double) { return 1.0; }, Parity::even);
    GridFn dir = make_fn(g, [](double y) { return Y1(y); }, Parity::odd);
    GridFn f = make_fn(g, [](double y) { return y * std::exp(-y * y); }, Parity::odd);

    GridFn r = project_out_p(f, dir, p);
    CHECK(std::abs(inner_p(r, dir, p)) < 1e-12 * max_abs(r) * max_abs(dir));

    GridFn d2 = project_out_p(dir, dir, p);
    CHECK(max_abs(d2) < 1e-12 * max_abs(dir));

    GridFn already = project_out_p(r, dir, p);
    for (int i = 0; i < g.N; ++i) CHECK(std::abs(already[i] - r[i]) < 1e-12);

    CHECK_THROWS_AS(project_out_p(f, zeros(g), p), ConfigError);
}

TEST_CASE("parity machinery") {
    Grid g = make_grid(5.0, 0.1);
    GridFn f = make_fn(g, [](double y) { return y * y; });
    CHECK_THROWS_AS(tag_parity(f, Parity::odd), ConfigError);
    CHECK_NOTHROW(tag_parity(f, Parity::even));
    CHECK(parity_residual(zeros(g), Parity::odd) == 0.0);

    GridFn o = make_fn(g, [](double y) { return y; }, Parity::odd);
    GridFn e = make_fn(g, [](double y) { return y * y; }, Parity::even);
    CHECK((o * o).parity == Parity::even);
    CHECK((o * e).parity == Parity::odd);
    CHECK((o + o).parity == Parity::odd);
    CHECK((o + e).parity == Parity::none);
}

TEST_CASE("csv round trip") {
    Grid g = make_grid(2.0, 0.25);
    GridFn f = make_fn(g, [](double y) { return std::sin(y) * 1e-7 + y; });
    std::string path = "test_grid_roundtrip.csv";
    to_csv(f, path);
    GridFn r = from_csv(path);
    REQUIRE(r.grid.N == g.N);
    CHECK(r.grid.h == doctest::Approx(g.h).epsilon(1e-12));
    for (int i = 0; i < g.N; ++i) CHECK(r[i] == f[i]); // 17 digits round-trip exactly
    std::remove(path.c_str());
}

TEST_CASE("half-line extension round trips") {
    Grid g = make_grid(10.0, 0.1);
    Half f = sample_half(g, [](double y) { return y * std::exp(-y); });
    GridFn o = extend_odd(g, f);
    CHECK(o.parity == Parity::odd);
    CHECK(parity_residual(o, Parity::odd) == 0.0);
    Half back = restrict_half(o);
    for (size_t j = 0; j < f.size(); ++j) CHECK(back[j] == f[j]);

    GridFn e = extend_even(g, sample_half(g, [](double y) { return std::exp(-y); }));
    CHECK(parity_residual(e, Parity::even) == 0.0);
}

TEST_CASE("half-line quadrature incl. odd interval count") {
    Grid g = make_grid(30.0, 0.01); // M = 3001 odd
    Half f = sample_half(g, [](double y) { return std::exp(-y); });
    CHECK(integrate_half(g, f) == doctest::Approx(1.0 - std::exp(-30.0)).epsilon(1e-10));

    Grid g2 = make_grid(9.9, 0.1); // M = 100 even, exercises the 3/8 head
    Half f2 = sample_half(g2, [](double y) { return std::exp(-y); });
    CHECK(integrate_half(g2, f2) == doctest::Approx(1.0 - std::exp(-9.9)).epsilon(1e-6));
}

TEST_CASE("integration by parts closes for decayed functions") {
    Grid g = make_grid(20.0, 0.005);
    GridFn f = make_fn(g, [](double y) { return std::exp(-y * y / 4.0); });
    GridFn gg = make_fn(g, [](double y) { return y * std::exp(-y * y / 6.0); });
    double s = inner(differentiate(f), gg) + inner(f, differentiate(gg));
    CHECK(std::abs(s) < 1e-8);
}

TEST_CASE("windowed integral") {
    Grid g = make_grid(40.0, 0.01);
    GridFn f = make_fn(g, [](double y) { return std::exp(-y * y); });
    double full = integrate(f);
    CHECK(integrate_window(f, 10.0) == doctest::Approx(full).epsilon(1e-12));
    CHECK(integrate_window(f, 1.0) < full);
}
