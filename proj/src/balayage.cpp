#include "tmlab/balayage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tmlab/potential.hpp"
#include "tmlab/quadrature.hpp"

namespace tmlab {

namespace {

struct SourcePoint {
  bool on_real;  // else on imaginary axis
  double coord;  // x or y
};

SourcePoint classify_source(std::complex<double> s) {
  if (s.imag() == 0.0) return {true, s.real()};
  if (s.real() == 0.0) return {false, s.imag()};
  throw std::domain_error("balayage: source must lie on the real or imaginary axis");
}

// Kernel as a function of the source coordinate (x on R or y on iR).
double kernel(const SourcePoint& s, Axis target, double c, double at) {
  switch (target) {
    case Axis::RealLine: {
      if (s.on_real) throw std::domain_error("balayage: source already on the target");
      const double y = s.coord;
      if (y == 0.0) throw std::domain_error("balayage: source at the origin");
      return std::abs(y) / (at * at + y * y) / M_PI;
    }
    case Axis::ImagLine: {
      if (!s.on_real) throw std::domain_error("balayage: source already on the target");
      const double x = s.coord;
      if (x == 0.0) throw std::domain_error("balayage: source at the origin");
      return std::abs(x) / (at * at + x * x) / M_PI;
    }
    case Axis::Kc: {
      if (c <= 0.0) throw std::domain_error("balayage: K_c requires c > 0");
      if (std::abs(at) <= c) throw std::domain_error("balayage: target point inside (-ic, ic)");
      const double r = std::sqrt(at * at - c * c);
      if (s.on_real) {
        const double x = s.coord;
        return std::abs(at) * std::sqrt(c * c + x * x) / ((at * at + x * x) * r) / M_PI;
      }
      const double y = s.coord;
      if (std::abs(y) >= c) throw std::domain_error("balayage: source not inside (-ic, ic)");
      return std::sqrt(c * c - y * y) / (std::abs(at - y) * r) / M_PI;
    }
  }
  throw std::domain_error("balayage: unknown target");
}

}  // namespace

double balayage_point_density(std::complex<double> source, Axis target, double c, double at) {
  return kernel(classify_source(source), target, c, at);
}

GridMeasure balayage_point_measure(std::complex<double> source, Axis target, double c, int n,
                                   double xmax) {
  const SourcePoint s = classify_source(source);
  const double scale = std::max(std::abs(s.coord), target == Axis::Kc ? c : 0.1);
  GridMeasure out = target == Axis::Kc
                        ? make_kc_grid(c, 2.0 * scale, n, xmax)
                        : make_unbounded_grid(target, 2.0 * scale, n, xmax);
  for (std::size_t i = 0; i < out.nodes.size(); ++i)
    out.density[i] = kernel(s, target, c, out.nodes[i]);
  out.tail_exponent = 2.0;
  if (target == Axis::Kc)
    out.tail_coefficient =
        (s.on_real ? std::sqrt(c * c + s.coord * s.coord) : std::sqrt(c * c - s.coord * s.coord)) /
        M_PI;
  else
    out.tail_coefficient = std::abs(s.coord) / M_PI;
  return out;
}

void balayage_measure_onto(const GridMeasure& m, GridMeasure& target, double c,
                           bool renormalize) {
  const Axis taxis = target.axis;
  if (taxis == Axis::Kc && c <= 0.0) c = target.c;
  // Quadrature of the point kernel against m, including m's analytic tail.
  auto tail_term = [&](double at) {
    if (m.tail_coefficient <= 0.0) return 0.0;
    const double X = m.tail_start(), p = m.tail_exponent, C = m.tail_coefficient;
    const QuadRule& q = gauss_legendre(48);
    double acc = 0.0;
    for (int sgn : {1, -1}) {
      for (std::size_t i = 0; i < q.x.size(); ++i) {
        const double sigma = 0.5 * (q.x[i] + 1.0);
        const double x = X * std::pow(sigma, -3.0);
        SourcePoint s{m.axis == Axis::RealLine, sgn * x};
        acc += 0.5 * q.w[i] * std::pow(sigma, 3.0 * p - 4.0) * kernel(s, taxis, c, at);
      }
    }
    return acc * 3.0 * C * std::pow(X, 1.0 - p);
  };
  auto swept_at = [&](double at) {
    auto f = [&](double xs) {
      if (xs == 0.0) return 0.0;  // kernel carries no mass at the origin
      if (taxis == Axis::Kc && m.axis != Axis::RealLine && std::abs(xs) >= c)
        return 0.0;  // kernel vanishes continuously at the gap ends
      SourcePoint s{m.axis == Axis::RealLine, xs};
      return kernel(s, taxis, c, at);
    };
    // Attention point in the source coordinate: the kernel peaks there with
    // a width given by the imaginary part, so near-panel quadrature kicks in
    // exactly when the peak is unresolved by the source grid.
    std::complex<double> zeta;
    if (taxis == Axis::Kc && m.axis != Axis::RealLine)
      zeta = {std::clamp(at, -c, c), std::abs(at) - c};
    else
      zeta = {0.0, std::abs(at)};
    return resolved_integral(m, zeta, f) + tail_term(at);
  };
  for (std::size_t t = 0; t < target.nodes.size(); ++t)
    target.density[t] = swept_at(target.nodes[t]);
  // Tail of the swept measure: a single power C|x|^-p fitted so that the
  // mass and the log-moment of the actual sweep beyond the cutoff are both
  // reproduced. Matching the log-moment keeps the far region's contribution
  // to potentials at moderate |x| correct even though the true far density
  // is not an exact power (it carries O(x^-2) corrections).
  {
    const double Xt = target.tail_start();
    const QuadRule& q = gauss_legendre(48);
    double mass_far = 0.0, logm_far = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i) {
      // x = Xt s^-3 regularizes the fat-tail endpoint.
      const double s = 0.5 * (q.x[i] + 1.0);
      const double x = Xt * std::pow(s, -3.0);
      const double jac = 0.5 * q.w[i] * 3.0 * Xt * std::pow(s, -4.0);
      const double rho = swept_at(x) + swept_at(-x);
      mass_far += jac * rho;
      logm_far += jac * rho * std::log(x);
    }
    if (mass_far > 0.0 && logm_far > mass_far * std::log(Xt)) {
      const double p = 1.0 + mass_far / (logm_far - mass_far * std::log(Xt));
      target.tail_exponent = std::clamp(p, 1.05, 4.0);
      target.tail_coefficient =
          0.5 * mass_far * (target.tail_exponent - 1.0) * std::pow(Xt, target.tail_exponent - 1.0);
    } else {
      target.tail_exponent = 2.0;
      target.tail_coefficient = 0.5 * mass_far * Xt;
    }
  }
  if (renormalize) {
    const double got = target.total_mass(), want = m.total_mass();
    if (got > 0.0) {
      const double f = want / got;
      for (double& d : target.density) d *= f;
      target.tail_coefficient *= f;
    }
  }
}

GridMeasure balayage_measure(const GridMeasure& m, Axis target, double c, int n, double xmax,
                             bool renormalize) {
  // Target range scaled to the source's mass distribution (median coordinate).
  double total = m.total_mass(), run = 0.0, med = 1.0;
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    run += m.weights[i] * m.density[i];
    if (run >= 0.5 * total) {
      med = std::abs(m.nodes[i]);
      break;
    }
  }
  const double L = std::max({0.5, 2.0 * med, target == Axis::Kc ? 1.5 * c : 0.0});
  GridMeasure out = target == Axis::Kc ? make_kc_grid(c, L, n, xmax)
                                       : make_unbounded_grid(target, L, n, xmax);
  balayage_measure_onto(m, out, c, renormalize);
  return out;
}

double cp_constant(double p) {
  if (!(p > 1.0 && p < 2.0)) throw std::domain_error("cp_constant: need 1 < p < 2");
  return 1.0 / (2.0 * std::sin(0.5 * M_PI * p));
}

double standard_integral(double p) {
  if (!(p > -1.0 && p < 1.0)) throw std::domain_error("standard_integral: need -1 < p < 1");
  const double closed = M_PI / (2.0 * std::cos(0.5 * M_PI * p));
  // s = tan(theta) turns the integral into int_0^{pi/2} tan(theta)^p dtheta;
  // grade panels toward both endpoints for the algebraic singularities.
  double quad = 0.0;
  const int K = 40;
  const double lo = 0.0, hi = 0.5 * M_PI, len = hi - lo;
  double prev = lo;
  auto f = [&](double th) { return std::pow(std::tan(th), p); };
  for (int k = K; k >= 1; --k) {
    const double next = lo + 0.5 * len * std::pow(2.0, -k + 1);
    quad += gl_integrate(f, prev, next, 16);
    prev = next;
  }
  for (int k = 1; k <= K; ++k) {
    const double next = (k == K) ? hi : hi - 0.5 * len * std::pow(2.0, -k);
    quad += gl_integrate(f, prev, next, 16);
    prev = next;
  }
  if (std::abs(quad - closed) > 1e-8 * std::max(1.0, std::abs(closed)))
    throw std::runtime_error("standard_integral: quadrature check failed");
  return closed;
}

}  // namespace tmlab
