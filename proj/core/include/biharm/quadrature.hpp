// Gauss-Legendre rules, composite panel rules, and a tanh-sinh integrator for
// endpoint-singular integrands.
#pragma once

#include <functional>
#include <vector>

#include "biharm/types.hpp"

namespace biharm {

struct QuadRule {
  std::vector<double> x;  // nodes
  std::vector<double> w;  // weights
};

// n-point Gauss-Legendre rule on [-1, 1]; nodes ascending. Cached per n.
const QuadRule& gauss_legendre(int n);

// Same rule mapped to [a, b].
QuadRule gauss_legendre(int n, double a, double b);

// Composite rule: an npanel-per-breakpoint-interval GL rule over the sorted
// breakpoint list. Panels between consecutive breakpoints get `per_panel`
// nodes each.
QuadRule composite_gauss(const std::vector<double>& breakpoints, int per_panel);

// Tanh-sinh (double-exponential) quadrature of f over (a, b). Handles
// integrable endpoint singularities (algebraic or logarithmic). Halves the
// step until two successive levels agree to rel_tol or max_level is hit.
double tanh_sinh(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, int max_level = 12);

cplx tanh_sinh_c(const std::function<cplx(double)>& f, double a, double b,
                 double rel_tol = 1e-12, int max_level = 12);

// Fixed tanh-sinh node set on (a, b) at a given refinement level, for
// precomputed per-pair rules. level 6 -> about 385 nodes.
QuadRule tanh_sinh_rule(double a, double b, int level);

// Chebyshev nodes (second kind, endpoints included) on [a, b], ascending.
std::vector<double> chebyshev_nodes(int n, double a, double b);

// Interpolate values given at chebyshev_nodes(n, a, b) to x via the barycentric
// formula; stable for n up to several hundred.
cplx chebyshev_eval(const std::vector<double>& nodes,
                    const std::vector<cplx>& values, double x);

// Coefficients of the Chebyshev series matching values at the n nodes
// (first-kind expansion T_0..T_{n-1} on [a, b]).
std::vector<cplx> chebyshev_coeffs(const std::vector<cplx>& values);

}  // namespace biharm
