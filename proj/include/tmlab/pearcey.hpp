#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "tmlab/quadrature.hpp"

namespace tmlab {

// Pearcey integrals p_0..p_5(z) = int_{Gamma_j} exp(-s^4/4 + s z) ds and
// their first two derivatives, evaluated by composite Gauss-Legendre along
// the defining rays (directions 1, -1, i, -i from the origin). Each contour
// is a difference of two directed ray integrals; truncation radius solves
// t^4/4 - t|z| = 46 so the discarded tail is below 1e-20 of the integrand
// scale.
struct PearceyEvaluator {
  double max_abs_z = 50.0;
  int nodes_per_panel = 24;
  double panel_width = 0.4;

  std::complex<double> p(int j, std::complex<double> z, int order = 0) const;
};

// Leading steepest-descent approximation of p_0 in the half-plane containing
// z: sqrt(2 pi / 3) z^{-1/3} exp((3/4) z^{4/3}) for Re z > 0 and the (-z)
// powers for Re z < 0. Used for the asymptotic ratio checks.
std::complex<double> pearcey_p0_asymptotic(std::complex<double> z);

// Truncation radius: positive root of t^4/4 - t*b = work.
inline double pearcey_truncation(double b, double work) {
  double t = std::max(1.0, std::pow(4.0 * work, 0.25));
  for (int i = 0; i < 200; ++i) {
    const double f = 0.25 * t * t * t * t - b * t - work;
    const double df = t * t * t - b;
    const double step = f / (df > 1.0 ? df : 1.0);
    t -= step;
    if (std::abs(step) < 1e-12 * t) break;
  }
  return std::max(t, 1.0);
}

// Real-argument p_0, p_0', p_0'' in generic precision (no oscillation:
// p_0^{(k)}(x) = int_0^inf t^k e^{-t^4/4} (e^{tx} +- e^{-tx}) dt with + for
// even k). digits10 sets both the truncation radius and is assumed to match
// the precision of Real.
template <class Real>
void pearcey_p0_derivs(const Real& x, int digits10, Real out[3]) {
  const double xa = std::abs(static_cast<double>(x));
  const double work = 2.302585092994046 * digits10 + 30.0;
  const double T = pearcey_truncation(xa, work);
  const int nodes = 48;
  static thread_local std::vector<Real> xs, ws;
  static thread_local int cached_nodes = 0, cached_digits = 0;
  if (cached_nodes != nodes || cached_digits != digits10) {
    gauss_legendre<Real>(nodes, xs, ws);
    cached_nodes = nodes;
    cached_digits = digits10;  // digits10 tracks the runtime precision of Real
  }
  const int panels = std::max(8, int(std::ceil(T / 0.4)));
  out[0] = out[1] = out[2] = Real(0);
  const Real h = Real(T) / panels;
  for (int pnl = 0; pnl < panels; ++pnl) {
    const Real mid = (Real(pnl) + Real(1) / 2) * h;
    const Real rad = h / 2;
    for (int i = 0; i < nodes; ++i) {
      const Real t = mid + rad * xs[i];
      const Real decay = exp(-t * t * t * t / 4);
      const Real ep = exp(t * x), em = 1 / ep;
      const Real weight = ws[i] * rad * decay;
      out[0] += weight * (ep + em);
      out[1] += weight * t * (ep - em);
      out[2] += weight * t * t * (ep + em);
    }
  }
}

// Weight functions w_{j,n} and the moment-function family I_m of the
// two-matrix model: w_{j,n}(x) = n^{-(j+1)/4} e^{-nV(x)} p_0^{(j)}(n^{3/4}
// tau x), I_m(x) = int y^m exp(-n(y^4/4 - tau x y)) dy with
//   I_m = tau x I_{m-3} + ((m-3)/n) I_{m-4},  m >= 3 (I_{-1} term dropped).
// The forward recurrence is stable for x > 0 (all terms positive); negative
// x uses the parity I_m(-x) = (-1)^m I_m(x).
template <class Real>
std::vector<Real> moment_functions_T(int n, double tau, const Real& x, int m_max,
                                     int digits10) {
  const Real xa = x < 0 ? Real(-x) : x;
  const Real arg = pow(Real(n), Real(3) / 4) * Real(tau) * xa;
  Real p[3];
  pearcey_p0_derivs(arg, digits10, p);
  std::vector<Real> I(std::size_t(m_max) + 1);
  const Real n14 = pow(Real(n), Real(1) / 4);
  Real scale = 1 / n14;
  for (int l = 0; l <= 2 && l <= m_max; ++l) {
    I[l] = scale * p[l];
    scale /= n14;
  }
  const Real tx = Real(tau) * xa;
  for (int m = 3; m <= m_max; ++m) {
    I[m] = tx * I[m - 3];
    if (m >= 4) I[m] += (Real(m - 3) / n) * I[m - 4];
  }
  if (x < 0)
    for (int m = 1; m <= m_max; m += 2) I[m] = -I[m];
  return I;
}

// Weight system of the model: n a positive multiple of 3, coupling tau > 0,
// V an even polynomial (coefficients in increasing even powers).
struct WeightSystem {
  int n;
  double tau;
  std::vector<double> V;
  PearceyEvaluator ev;

  WeightSystem(int n_, double tau_, std::vector<double> V_);

  // w_{j,n}(x), j = 0..2; evaluated through extended-exponent arithmetic so
  // the e^{(3/4)|...|^{4/3}} growth cannot overflow intermediate terms.
  double weight(int j, double x) const;

  // I_0..I_{m_max} at x (double precision path of moment_functions_T).
  std::vector<double> moments(double x, int m_max) const;
};

}  // namespace tmlab
