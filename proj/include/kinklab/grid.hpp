#pragma once
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "kinklab/errors.hpp"

namespace kinklab {

// Uniform symmetric grid y_i = -L + i*h, i = 0..N-1, N odd so that y = 0 is a node.
struct Grid {
    double L = 0;
    double h = 0;
    int N = 0;

    double y(int i) const { return (i - (N - 1) / 2) * h; }
    int mid() const { return (N - 1) / 2; }
    // nodes on [0, L], index j = 0..M-1, y = j*h
    int M() const { return (N + 1) / 2; }
    bool same(const Grid& o) const { return N == o.N && L == o.L && h == o.h; }
};

Grid make_grid(double L, double h);

enum class Parity { none, even, odd };

Parity mul_parity(Parity a, Parity b);
Parity add_parity(Parity a, Parity b);
Parity flip_parity(Parity a);

struct GridFn {
    Grid grid;
    std::vector<double> v;
    Parity parity = Parity::none;

    double operator[](int i) const { return v[(size_t)i]; }
    double& operator[](int i) { return v[(size_t)i]; }
    int size() const { return (int)v.size(); }
};

struct ComplexGridFn {
    Grid grid;
    std::vector<std::complex<double>> v;
};

GridFn zeros(const Grid& g, Parity p = Parity::none);
GridFn make_fn(const Grid& g, const std::function<double(double)>& f, Parity p = Parity::none);
ComplexGridFn make_cfn(const Grid& g, const std::function<std::complex<double>(double)>& f);

// pointwise algebra; parity tags combine by the usual symmetry rules
GridFn operator+(const GridFn& a, const GridFn& b);
GridFn operator-(const GridFn& a, const GridFn& b);
GridFn operator*(const GridFn& a, const GridFn& b);
GridFn operator*(double s, const GridFn& a);

// max_i |f(y_i) + s*f(-y_i)| / max|f| with s = +1 for odd, -1 for even; 0 for zero f
double parity_residual(const GridFn& f, Parity p);
// verifies the tag against parity_tol = 1e-10 before applying it
void tag_parity(GridFn& f, Parity p);

// composite Simpson over [-L, L]; rejects non-finite samples naming the first bad node
double integrate(const GridFn& f);
double max_abs(const GridFn& f);
double max_abs(const std::vector<double>& v);

// Simpson restricted to [-a, a]; a must be (near) a node multiple
double integrate_window(const GridFn& f, double a);

// centered O(h^2), one-sided second-order ends; parity flips
GridFn differentiate(const GridFn& f);

// higher-order stencils used by residual checks (not the public O(h^2) op)
GridFn deriv1_fd6(const GridFn& f);
GridFn deriv2_fd6(const GridFn& f);

double inner(const GridFn& f, const GridFn& g);
double inner_p(const GridFn& f, const GridFn& g, const GridFn& p);

struct WeightedNorms {
    double H1w = 0; // sqrt of int (v1'^2 + v1^2) sech(y/(2 sqrt 2))
    double L2w = 0; // sqrt of int v2^2 sech(y/(2 sqrt 2))
};
WeightedNorms weighted_norms(const GridFn& v1, const GridFn& v2);

GridFn project_out_p(const GridFn& f, const GridFn& dir, const GridFn& p);

void to_csv(const GridFn& f, const std::string& path);
GridFn from_csv(const std::string& path);

// ---- half-line helpers (index j = 0..M-1 over y = j*h) -------------------

using Half = std::vector<double>;

Half restrict_half(const GridFn& f);
GridFn extend_odd(const Grid& g, const Half& f);
GridFn extend_even(const Grid& g, const Half& f);
Half sample_half(const Grid& g, const std::function<double(double)>& f);

// Simpson on [0, L] (3/8 correction when the interval count is odd)
double integrate_half(const Grid& g, const Half& f);

// cumulative quadrature, 4th order (cubic panels); out[0] = 0
Half cumint_forward(double h, const Half& f);
// out[j] = int_{y_j}^{L} f; out[last] = 0
Half cumint_backward(double h, const Half& f);

// trapezoid cumulative (2nd order), for monotone changes of variable
Half cumint_trap(double h, const Half& f);

} // namespace kinklab
