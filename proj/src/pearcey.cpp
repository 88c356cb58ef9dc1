#include "tmlab/pearcey.hpp"

#include <boost/multiprecision/mpfr.hpp>

#include "tmlab/potential.hpp"

namespace tmlab {

namespace {

using cplx = std::complex<double>;

// Directed ray integral R(d) = d int_0^inf t^order e^{-t^4/4 + t d z} dt
// times d^order (the derivative of order k brings down s^k = (dt)^k).
cplx ray_integral(const PearceyEvaluator& ev, cplx d, cplx z, int order) {
  const double work = 46.0;
  const double T = pearcey_truncation(std::abs(z), work);
  const int panels = std::max(8, int(std::ceil(T / ev.panel_width)));
  const QuadRule& q = gauss_legendre(ev.nodes_per_panel);
  const cplx dz = d * z;
  cplx acc = 0.0;
  const double h = T / panels;
  for (int pnl = 0; pnl < panels; ++pnl) {
    const double lo = pnl * h;
    for (std::size_t i = 0; i < q.x.size(); ++i) {
      const double t = lo + 0.5 * h * (1.0 + q.x[i]);
      double tk = 1.0;
      for (int k = 0; k < order; ++k) tk *= t;
      acc += q.w[i] * tk * std::exp(-0.25 * t * t * t * t + t * dz);
    }
  }
  acc *= 0.5 * h;
  cplx pref = d;
  for (int k = 0; k < order; ++k) pref *= d;
  return pref * acc;
}

}  // namespace

std::complex<double> PearceyEvaluator::p(int j, std::complex<double> z, int order) const {
  if (j < 0 || j > 5) throw std::domain_error("pearcey: contour index must be 0..5");
  if (order < 0 || order > 2) throw std::domain_error("pearcey: order must be 0..2");
  if (std::abs(z) > max_abs_z)
    throw std::domain_error("pearcey: |z| exceeds the configured evaluator range");
  const cplx I(0.0, 1.0);
  // Each contour is (endpoint ray) - (startpoint ray).
  struct Combo {
    cplx to, from;
  };
  static const Combo combos[6] = {
      {cplx(1, 0), cplx(-1, 0)},   // Gamma_0: -inf -> inf
      {cplx(1, 0), cplx(0, 1)},    // Gamma_1: i inf -> inf
      {cplx(-1, 0), cplx(0, 1)},   // Gamma_2: i inf -> -inf
      {cplx(-1, 0), cplx(0, -1)},  // Gamma_3: -i inf -> -inf
      {cplx(1, 0), cplx(0, -1)},   // Gamma_4: -i inf -> inf
      {cplx(0, 1), cplx(0, -1)},   // Gamma_5: -i inf -> i inf
  };
  return ray_integral(*this, combos[j].to, z, order) -
         ray_integral(*this, combos[j].from, z, order);
}

std::complex<double> pearcey_p0_asymptotic(std::complex<double> z) {
  const cplx zz = (z.real() >= 0.0) ? z : -z;
  const cplx z43 = std::exp((4.0 / 3.0) * std::log(zz));
  const cplx z13 = std::exp((-1.0 / 3.0) * std::log(zz));
  return std::sqrt(2.0 * M_PI / 3.0) * z13 * std::exp(0.75 * z43);
}

WeightSystem::WeightSystem(int n_, double tau_, std::vector<double> V_)
    : n(n_), tau(tau_), V(std::move(V_)) {
  if (n <= 0 || n % 3 != 0)
    throw std::invalid_argument("WeightSystem: n must be a positive multiple of 3");
  if (tau <= 0.0) throw std::invalid_argument("WeightSystem: tau must be positive");
}

double WeightSystem::weight(int j, double x) const {
  if (j < 0 || j > 2) throw std::domain_error("weight: j must be 0..2");
  // mpfr has an essentially unbounded exponent range, so the e^{+-n...}
  // factors cannot overflow before the final cancellation.
  using Real = boost::multiprecision::mpfr_float_100;
  Real p[3];
  const Real arg = pow(Real(n), Real(3) / 4) * Real(tau) * Real(std::abs(x));
  pearcey_p0_derivs(arg, 40, p);
  Real w = pow(Real(n), -Real(j + 1) / 4) * exp(-Real(n) * Real(poly_even_eval(V, x))) * p[j];
  if (x < 0.0 && j % 2 == 1) w = -w;
  return static_cast<double>(w);
}

std::vector<double> WeightSystem::moments(double x, int m_max) const {
  if (m_max < 0) throw std::invalid_argument("moments: m_max must be >= 0");
  return moment_functions_T<double>(n, tau, x, m_max, 15);
}

}  // namespace tmlab
