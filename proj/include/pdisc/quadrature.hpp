#pragma once

// Gauss-Legendre quadrature with cached node tables, plus convenience
// wrappers for one-dimensional Gaussian expectations. The capacity module
// builds tensor-product rules on top of gauss_legendre directly.

#include <functional>
#include <vector>

namespace pdisc {

struct QuadRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;  // weights summing to 2
};

// Nodes/weights of the n-point Gauss-Legendre rule, computed by Newton
// iteration on P_n and memoized. Exact for polynomials up to degree 2n-1.
const QuadRule& gauss_legendre(int n);

// \int_a^b f dx with an n-point rule on each of `panels` equal subintervals.
double integrate(const std::function<double(double)>& f, double a, double b,
                 int n = 60, int panels = 1);

// E[f(G)] for standard normal G. The integrand is restricted to [-L, L];
// with the default L = 12 the discarded tail mass is ~2e-33, far below the
// precision of the rule itself.
double expect_gauss(const std::function<double(double)>& f, int n = 80,
                    int panels = 8, double L = 12.0);

}  // namespace pdisc
