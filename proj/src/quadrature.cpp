#include "pdisc/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "pdisc/normal.hpp"

namespace pdisc {

namespace {

QuadRule compute_gl(int n) {
  QuadRule r;
  r.x.resize(n);
  r.w.resize(n);
  // Roots come in +/- pairs; solve the upper half with Newton from the
  // classical Chebyshev-flavored initial guess.
  int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Recurrence for P_n(x) and its derivative.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  return r;
}

std::map<int, QuadRule> g_rules;
std::mutex g_rules_mu;

}  // namespace

const QuadRule& gauss_legendre(int n) {
  std::lock_guard<std::mutex> lock(g_rules_mu);
  auto it = g_rules.find(n);
  if (it == g_rules.end()) it = g_rules.emplace(n, compute_gl(n)).first;
  return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 int n, int panels) {
  if (!(b > a)) return 0.0;
  const QuadRule& r = gauss_legendre(n);
  double total = 0.0;
  double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h;
    double c = lo + 0.5 * h, s = 0.5 * h;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += r.w[i] * f(c + s * r.x[i]);
    total += acc * s;
  }
  return total;
}

double expect_gauss(const std::function<double(double)>& f, int n, int panels,
                    double L) {
  return integrate([&](double x) { return f(x) * norm_pdf(x); }, -L, L, n,
                   panels);
}

}  // namespace pdisc
