#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <vector>

namespace tmlab {

// Airy function Ai and derivative on the complex plane. For |z| <= 80 the
// Maclaurin series is summed in extended precision (the series has
// catastrophic cancellation ~ e^{(8/3)|z|^{3/2}} in the recessive sectors,
// so the working precision is scaled with |z|); beyond that the asymptotic
// expansion is used in |arg z| <= pi/2 and arguments outside that sector
// are rejected.
std::complex<double> airy_ai(std::complex<double> z);
std::complex<double> airy_ai_prime(std::complex<double> z);

// Asymptotic forms e^{-zeta}/(2 sqrt(pi) z^{1/4}) etc., zeta = (2/3)z^{3/2},
// for the trend checks (leading term only).
std::complex<double> airy_ai_asymptotic(std::complex<double> z);
std::complex<double> airy_ai_prime_asymptotic(std::complex<double> z);

// sin(pi(u-v)) / (pi(u-v)); diagonal value 1.
double sine_kernel(double u, double v);

// (Ai(u)Ai'(v) - Ai'(u)Ai(v)) / (u - v); diagonal Ai'(u)^2 - u Ai(u)^2.
double airy_kernel(double u, double v);

// det [K(x_i, x_j)] for up to 8 points (Gaussian elimination with partial
// pivoting); K is any symmetric-in-use kernel callback.
double correlation_det(const std::vector<double>& x, double (*K)(double, double));
template <class F>
double correlation_det_f(const std::vector<double>& x, F&& K);

// 2x2 Airy model Riemann-Hilbert solution Psi(s), piecewise analytic off
// the rays arg s in {0, +-2pi/3, pi}, built from y_k(s) = omega^k
// Ai(omega^k s), omega = e^{2pi i/3}:
//   arg s in (0, 2pi/3):      [[y0, -y2], [y0', -y2']]
//   arg s in (2pi/3, pi):     [[-y1, -y2], [-y1', -y2']]
//   arg s in (-pi, -2pi/3):   [[-y2, y1], [-y2', y1']]
//   arg s in (-2pi/3, 0):     [[y0, y1], [y0', y1']]
using Mat2 = std::array<std::array<std::complex<double>, 2>, 2>;
Mat2 airy_model_psi(std::complex<double> s);

// Jump matrix Psi_+ = Psi_- J on the four rays, ray = 0, 1, 2, 3 for
// arg s = 0, 2pi/3, pi, -2pi/3. Orientation: the positive real ray points
// outward, the other three point toward the origin; + is the left side.
// Concretely the + sectors are (0,2pi/3) for rays 0 and 1, (2pi/3,pi) for
// ray 2, and (-pi,-2pi/3) for ray 3.
Mat2 airy_model_jump(int ray);

// Leading large-s model: (1/(2 sqrt(pi))) diag(s^{-1/4}, s^{1/4})
// [[1, i], [-1, i]] diag(e^{-(2/3)s^{3/2}}, e^{+(2/3)s^{3/2}}).
Mat2 airy_model_asymptotic(std::complex<double> s);

template <class F>
double correlation_det_f(const std::vector<double>& x, F&& K) {
  const int k = int(x.size());
  if (k < 1 || k > 8) throw std::domain_error("correlation_det: need 1..8 points");
  double a[8][8];
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) a[i][j] = K(x[i], x[j]);
  double det = 1.0;
  for (int c = 0; c < k; ++c) {
    int piv = c;
    for (int r = c + 1; r < k; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (piv != c) {
      for (int j = 0; j < k; ++j) std::swap(a[c][j], a[piv][j]);
      det = -det;
    }
    if (a[c][c] == 0.0) return 0.0;
    det *= a[c][c];
    for (int r = c + 1; r < k; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int j = c; j < k; ++j) a[r][j] -= f * a[c][j];
    }
  }
  return det;
}

}  // namespace tmlab
