#pragma once

#include <cmath>
#include <vector>

namespace tmlab {

// Gauss-Legendre rule on [-1,1].
struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Nodes/weights by Newton iteration on Legendre polynomials.
const QuadRule& gauss_legendre(int n);

// Integrate f over [a,b] with an n-point rule.
template <class F>
double gl_integrate(F&& f, double a, double b, int n = 64) {
  const QuadRule& q = gauss_legendre(n);
  const double mid = 0.5 * (a + b), rad = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < q.x.size(); ++i) s += q.w[i] * f(mid + rad * q.x[i]);
  return s * rad;
}

// Composite rule: npanels equal panels, n points each.
template <class F>
double gl_integrate_composite(F&& f, double a, double b, int npanels, int n = 16) {
  double s = 0.0;
  const double h = (b - a) / npanels;
  for (int p = 0; p < npanels; ++p) s += gl_integrate(f, a + p * h, a + (p + 1) * h, n);
  return s;
}

// Generic-precision Gauss-Legendre, used with multiprecision scalar types.
// Newton refinement starts from the double-precision nodes.
template <class Real>
void gauss_legendre(int n, std::vector<Real>& xs, std::vector<Real>& ws) {
  const QuadRule& seed = gauss_legendre(n);
  xs.resize(n);
  ws.resize(n);
  for (int i = 0; i < n; ++i) {
    Real x = Real(seed.x[i]);
    for (int it = 0; it < 200; ++it) {
      // Legendre P_n(x) and derivative via Bonnet recurrence.
      Real p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      Real dp = n * (x * p1 - p0) / (x * x - 1);
      Real dx = p1 / dp;
      x -= dx;
      if (abs(dx) <= abs(x) * std::numeric_limits<Real>::epsilon() * 4) break;
    }
    Real p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    Real dp = n * (x * p1 - p0) / (x * x - 1);
    xs[i] = x;
    ws[i] = 2 / ((1 - x * x) * dp * dp);
  }
}

}  // namespace tmlab
