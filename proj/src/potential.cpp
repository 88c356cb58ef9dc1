#include "tmlab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tmlab/quadrature.hpp"

namespace tmlab {

namespace {

// Reduced coordinate: the support becomes the real interval of node
// coordinates and |z - s| = |zeta - x| with x the node coordinate.
std::complex<double> reduce(const GridMeasure& m, std::complex<double> z) {
  if (m.axis == Axis::RealLine) return z;
  return std::complex<double>(z.imag(), -z.real());  // -i z
}

// int_{x0}^{x1} (r0 + slope*(x-x0)) * ln|zeta - x| dx, exact.
double panel_log_abs(double x0, double x1, double r0, double r1, std::complex<double> zeta) {
  const double u = zeta.real(), v = zeta.imag();
  auto A0 = [&](double t) {
    const double q = t * t + v * v;
    double val = (q > 0.0 ? 0.5 * t * std::log(q) : 0.0) - t;
    if (v != 0.0) val += std::abs(v) * std::atan2(t, std::abs(v));
    return val;
  };
  auto A1 = [&](double t) {
    const double q = t * t + v * v;
    return q > 0.0 ? 0.25 * (q * std::log(q) - t * t) : 0.0;
  };
  const double slope = (r1 - r0) / (x1 - x0);
  const double t0 = x0 - u, t1 = x1 - u;
  const double c0 = r0 - slope * t0;
  return c0 * (A0(t1) - A0(t0)) + slope * (A1(t1) - A1(t0));
}

// int_{x0}^{x1} (linear rho) * Log(zeta - x) dx with the principal branch;
// valid when zeta - x does not cross the branch cut along the panel
// (Im zeta is constant in x, so only Im zeta == 0 with zeta inside the panel
// would be problematic, and such evaluations are excluded by callers).
std::complex<double> panel_log_cplx(double x0, double x1, double r0, double r1,
                                    std::complex<double> zeta) {
  auto P0 = [&](double x) { return (x - zeta) * std::log(zeta - x) - x; };
  auto P1 = [&](double x) {
    const std::complex<double> d = x - zeta;
    return 0.5 * d * d * std::log(zeta - x) - 0.25 * d * d + zeta * P0(x);
  };
  const double slope = (r1 - r0) / (x1 - x0);
  const double c0 = r0 - slope * x0;
  return c0 * (P0(x1) - P0(x0)) + slope * (P1(x1) - P1(x0));
}

// int_{x0}^{x1} (linear rho) / (zeta - x) dx, exact.
std::complex<double> panel_cauchy(double x0, double x1, double r0, double r1,
                                  std::complex<double> zeta) {
  auto Q0 = [&](double x) { return -std::log(zeta - x); };
  auto Q1 = [&](double x) { return -x - zeta * std::log(zeta - x); };
  const double slope = (r1 - r0) / (x1 - x0);
  const double c0 = r0 - slope * x0;
  return c0 * (Q0(x1) - Q0(x0)) + slope * (Q1(x1) - Q1(x0));
}

// Tail integrals int_X^inf C x^(-p) f(sgn*x) dx for both signs, via the
// substitution x = X sigma^(-3) which regularizes the endpoint. The rule
// order is configurable so nested tail integrals (self-energies) do not
// evaluate the logarithm exactly on the diagonal.
template <class F, class R>
R tail_integral(double C, double p, double X, F&& f, R zero, int order = 48) {
  if (C <= 0.0 || X <= 0.0) return zero;
  const QuadRule& q = gauss_legendre(order);
  R acc = zero;
  for (int sgn : {1, -1}) {
    for (std::size_t i = 0; i < q.x.size(); ++i) {
      const double sigma = 0.5 * (q.x[i] + 1.0);
      const double x = X * std::pow(sigma, -3.0);
      acc += 0.5 * q.w[i] * std::pow(sigma, 3.0 * p - 4.0) * f(sgn * x);
    }
  }
  return acc * (3.0 * C * std::pow(X, 1.0 - p));
}

void check_tail(const GridMeasure& m) {
  if (m.tail_coefficient > 0.0 && m.tail_exponent <= 1.0)
    throw std::invalid_argument("measure tail is not integrable");
}

// A panel's node range [i0, i1] and hull [lo, hi].
struct PanelView {
  std::size_t i0, i1;
  double lo, hi;
  bool has_hull;  // hull extends past the end nodes (slivers carry mass)
};

std::vector<PanelView> panels_of(const GridMeasure& m) {
  std::vector<PanelView> out;
  const std::size_t n = m.nodes.size();
  if (n == 0) return out;
  if (m.nodes_per_panel > 0) {
    const std::size_t q = m.nodes_per_panel, P = n / q;
    out.reserve(P);
    for (std::size_t p = 0; p < P; ++p)
      out.push_back({p * q, p * q + q - 1, m.panel_edges[2 * p], m.panel_edges[2 * p + 1], true});
  } else {
    // Ad-hoc grid: one piecewise-linear chain, split at the K_c gap.
    std::size_t start = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (m.axis == Axis::Kc && m.nodes[i] < 0.0 && m.nodes[i + 1] > 0.0) {
        out.push_back({start, i, m.nodes[start], m.nodes[i], false});
        start = i + 1;
      }
    }
    out.push_back({start, n - 1, m.nodes[start], m.nodes[n - 1], false});
  }
  return out;
}

double segment_distance(double lo, double hi, std::complex<double> zeta) {
  const double x = zeta.real();
  const double dx = x < lo ? lo - x : (x > hi ? x - hi : 0.0);
  return std::hypot(dx, zeta.imag());
}

// Polynomial read of the density across one panel through its Gauss nodes
// (barycentric form; exact at the nodes, degree nodes-1 in between).
struct PanelInterp {
  const GridMeasure* m;
  std::size_t i0, i1;
  std::vector<double> bw;

  PanelInterp(const GridMeasure& mm, std::size_t a, std::size_t b) : m(&mm), i0(a), i1(b) {
    const std::size_t q = b - a + 1;
    bw.assign(q, 1.0);
    for (std::size_t j = 0; j < q; ++j)
      for (std::size_t k = 0; k < q; ++k)
        if (k != j) bw[j] /= m->nodes[a + j] - m->nodes[a + k];
  }
  double operator()(double x) const {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < bw.size(); ++j) {
      const double d = x - m->nodes[i0 + j];
      if (d == 0.0) return m->density[i0 + j];
      const double t = bw[j] / d;
      num += t * m->density[i0 + j];
      den += t;
    }
    return num / den;
  }
};

// Integral of g over [A,B] with panels shrinking geometrically toward the
// end holding an (integrable) singularity.
template <class R, class G>
R graded_toward(G&& g, double A, double B, bool toward_B, R zero) {
  R acc = zero;
  if (!(A < B)) return acc;
  const double len = B - A;
  // Stop refining once pieces approach the rounding scale, so quadrature
  // nodes cannot collapse onto the singular endpoint itself.
  const double floor_w = 4096.0 * std::numeric_limits<double>::epsilon() *
                         (std::abs(A) + std::abs(B) + len);
  int K = 34;
  while (K > 4 && len * std::pow(2.0, -K) < floor_w) --K;
  auto piece = [&](double a, double b) {
    const double mid = 0.5 * (a + b), rad = 0.5 * (b - a);
    if (!(rad > 0.0)) return zero;
    const QuadRule& q = gauss_legendre(8);
    R s = zero;
    for (std::size_t i = 0; i < q.x.size(); ++i) s += q.w[i] * g(mid + rad * q.x[i]);
    return s * rad;
  };
  if (toward_B) {
    double prev = A;
    for (int k = 1; k <= K; ++k) {
      const double next = (k == K) ? B : B - len * std::pow(2.0, -k);
      acc += piece(prev, next);
      prev = next;
    }
  } else {
    double prev = B;
    R neg = zero;
    for (int k = 1; k <= K; ++k) {
      const double next = (k == K) ? A : A + len * std::pow(2.0, -k);
      neg += piece(next, prev);
      prev = next;
    }
    acc += neg;
  }
  return acc;
}

// Hybrid quadrature of int f dm over the resolved range: panels well
// separated from zeta use the spectral nodal sum (f smooth there); panels
// near zeta integrate f against the panel's polynomial density interpolant
// with quadrature graded toward the singular abscissa Re zeta. Ad-hoc grids
// without panel structure fall back to the piecewise-linear closed form pf.
template <class R, class NodeF, class PanelF>
R hybrid_accumulate(const GridMeasure& m, std::complex<double> zeta, NodeF&& nf, PanelF&& pf,
                    R zero) {
  R acc = zero;
  for (const PanelView& pv : panels_of(m)) {
    const double len = pv.hi - pv.lo;
    if (segment_distance(pv.lo, pv.hi, zeta) > 0.25 * len) {
      for (std::size_t i = pv.i0; i <= pv.i1; ++i)
        acc += m.weights[i] * m.density[i] * nf(m.nodes[i]);
      continue;
    }
    if (pv.has_hull && pv.i1 > pv.i0) {
      const PanelInterp rho(m, pv.i0, pv.i1);
      auto g = [&](double x) { return rho(x) * nf(x); };
      const double s = std::clamp(zeta.real(), pv.lo, pv.hi);
      acc += graded_toward(g, pv.lo, s, true, zero);
      acc += graded_toward(g, s, pv.hi, false, zero);
      continue;
    }
    if (pv.i0 == pv.i1) {  // single node: treat as a flat slab over the hull
      acc += pf(pv.lo, pv.hi, m.density[pv.i0], m.density[pv.i0]);
      continue;
    }
    for (std::size_t i = pv.i0; i < pv.i1; ++i)
      acc += pf(m.nodes[i], m.nodes[i + 1], m.density[i], m.density[i + 1]);
  }
  return acc;
}

}  // namespace

double log_potential(const GridMeasure& m, std::complex<double> z) {
  check_tail(m);
  const std::complex<double> zeta = reduce(m, z);
  double acc = hybrid_accumulate(
      m, zeta, [&](double x) { return std::log(std::abs(zeta - x)); },
      [&](double x0, double x1, double r0, double r1) {
        return panel_log_abs(x0, x1, r0, r1, zeta);
      },
      0.0);
  acc += tail_integral(m.tail_coefficient, m.tail_exponent, m.tail_start(),
                       [&](double x) { return std::log(std::abs(zeta - x)); }, 0.0);
  return -acc;
}

std::complex<double> log_integral(const GridMeasure& m, std::complex<double> z) {
  check_tail(m);
  const std::complex<double> zeta = reduce(m, z);
  std::complex<double> acc = hybrid_accumulate(
      m, zeta, [&](double x) { return std::log(zeta - x); },
      [&](double x0, double x1, double r0, double r1) {
        return panel_log_cplx(x0, x1, r0, r1, zeta);
      },
      std::complex<double>(0.0));
  acc += tail_integral(m.tail_coefficient, m.tail_exponent, m.tail_start(),
                       [&](double x) { return std::log(zeta - x); },
                       std::complex<double>(0.0));
  if (m.axis != Axis::RealLine) {
    // log(z - i y) = Log(zeta - y) + i pi/2, which realizes the branch
    // arg in (-pi/2, 3pi/2) used for measures on the imaginary axis.
    acc += std::complex<double>(0.0, 0.5 * M_PI) * m.total_mass();
  }
  return acc;
}

std::complex<double> cauchy_transform(const GridMeasure& m, std::complex<double> z) {
  check_tail(m);
  const std::complex<double> zeta = reduce(m, z);
  std::complex<double> acc = hybrid_accumulate(
      m, zeta, [&](double x) { return 1.0 / (zeta - x); },
      [&](double x0, double x1, double r0, double r1) {
        return panel_cauchy(x0, x1, r0, r1, zeta);
      },
      std::complex<double>(0.0));
  acc += tail_integral(m.tail_coefficient, m.tail_exponent, m.tail_start(),
                       [&](double x) { return 1.0 / (zeta - x); },
                       std::complex<double>(0.0));
  if (m.axis != Axis::RealLine) acc *= std::complex<double>(0.0, -1.0);  // 1/(z-iy) = -i/(zeta-y)
  return acc;
}

double resolved_integral(const GridMeasure& m, std::complex<double> zeta,
                         const std::function<double(double)>& f) {
  return hybrid_accumulate(
      m, zeta, f,
      [&](double x0, double x1, double r0, double r1) {
        const double slope = (r1 - r0) / (x1 - x0);
        return gl_integrate([&](double x) { return (r0 + slope * (x - x0)) * f(x); }, x0, x1,
                            16);
      },
      0.0);
}

double density_at(const GridMeasure& m, double x) {
  for (const PanelView& pv : panels_of(m)) {
    const double lo = pv.has_hull ? pv.lo : m.nodes[pv.i0];
    const double hi = pv.has_hull ? pv.hi : m.nodes[pv.i1];
    if (x < lo || x > hi) continue;
    if (pv.has_hull && pv.i1 > pv.i0) return PanelInterp(m, pv.i0, pv.i1)(x);
    // Ad-hoc chain: piecewise linear between nodes.
    for (std::size_t i = pv.i0; i < pv.i1; ++i) {
      if (x > m.nodes[i + 1]) continue;
      const double t = (x - m.nodes[i]) / (m.nodes[i + 1] - m.nodes[i]);
      return (1.0 - t) * m.density[i] + t * m.density[i + 1];
    }
    return m.density[pv.i1];
  }
  return 0.0;
}

double log_energy(const GridMeasure& m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.nodes.size(); ++i)
    acc += m.weights[i] * m.density[i] * log_potential(m, m.point(i));
  // Outer integral over the analytic tail.
  acc += tail_integral(m.tail_coefficient, m.tail_exponent, m.tail_start(),
                       [&](double x) {
                         const std::complex<double> p =
                             m.axis == Axis::RealLine ? std::complex<double>(x, 0.0)
                                                      : std::complex<double>(0.0, x);
                         return log_potential(m, p);
                       },
                       0.0, 40);
  return acc;
}

namespace {

double one_sided_mutual(const GridMeasure& outer, const GridMeasure& inner) {
  double acc = 0.0;
  for (std::size_t i = 0; i < outer.nodes.size(); ++i)
    acc += outer.weights[i] * outer.density[i] * log_potential(inner, outer.point(i));
  acc += tail_integral(outer.tail_coefficient, outer.tail_exponent, outer.tail_start(),
                       [&](double x) {
                         const std::complex<double> p =
                             outer.axis == Axis::RealLine ? std::complex<double>(x, 0.0)
                                                          : std::complex<double>(0.0, x);
                         return log_potential(inner, p);
                       },
                       0.0, 40);
  return acc;
}

}  // namespace

double mutual_energy(const GridMeasure& a, const GridMeasure& b) {
  return 0.5 * (one_sided_mutual(a, b) + one_sided_mutual(b, a));
}

double sigma_density(double tau, double y) {
  if (tau <= 0.0) throw std::domain_error("sigma_density: tau must be positive");
  return std::sqrt(3.0) / (2.0 * M_PI) * std::pow(tau, 4.0 / 3.0) *
         std::pow(std::abs(y), 1.0 / 3.0);
}

double poly_even_eval(const std::vector<double>& v, double x) {
  const double x2 = x * x;
  double acc = 0.0;
  for (std::size_t k = v.size(); k-- > 0;) acc = acc * x2 + v[k];
  return acc;
}

double poly_even_deriv(const std::vector<double>& v, double x) {
  const double x2 = x * x;
  double acc = 0.0;
  for (std::size_t k = v.size(); k-- > 1;) acc = acc * x2 + 2.0 * double(k) * v[k];
  return acc * x;
}

EnergyValue energy_functional(const GridMeasure& n1, const GridMeasure& n2,
                              const GridMeasure& n3, const std::vector<double>& V,
                              double tau) {
  if (tau < 0.0) throw std::domain_error("energy_functional: tau must be nonnegative");
  const double m1 = n1.total_mass(), m2 = n2.total_mass(), m3 = n3.total_mass();
  if (std::abs(m1 - 1.0) > 1e-3 || std::abs(m2 - 2.0 / 3.0) > 1e-3 ||
      std::abs(m3 - 1.0 / 3.0) > 1e-3)
    throw std::invalid_argument("energy_functional: masses must be (1, 2/3, 1/3)");
  if (n1.axis != Axis::RealLine || n2.axis == Axis::RealLine || n3.axis != Axis::RealLine)
    throw std::invalid_argument("energy_functional: supports must be (R, iR, R)");

  const double I1 = log_energy(n1);
  const double I2 = log_energy(n2);
  const double I3 = log_energy(n3);
  const double I12 = mutual_energy(n1, n2);
  const double I23 = mutual_energy(n2, n3);

  const double t43 = 0.75 * std::pow(tau, 4.0 / 3.0);
  double field = 0.0;
  for (std::size_t i = 0; i < n1.nodes.size(); ++i) {
    const double x = n1.nodes[i];
    field += n1.weights[i] * n1.density[i] *
             (poly_even_eval(V, x) - t43 * std::pow(std::abs(x), 4.0 / 3.0));
  }

  EnergyValue e;
  e.direct = I1 + I2 + I3 - I12 - I23 + field;
  // Convex rewrite with positive coefficients; the signed-measure energies are
  // expanded bilinearly: I(a nu + b mu) = a^2 I(nu) + 2ab I(nu,mu) + b^2 I(mu).
  e.rewritten = (2.0 / 3.0) * I1 + (1.0 / 12.0) * (4.0 * I1 + 9.0 * I2 - 12.0 * I12) +
                0.25 * (I2 + 4.0 * I3 - 4.0 * I23) + field;
  return e;
}

double log_potential_fn(const std::function<double(double)>& rho, double lo, double hi,
                        std::complex<double> zeta) {
  // Integrate rho(x) ln|zeta - x| with panels graded geometrically toward
  // the interval ends and the projection of zeta.
  auto graded = [&](double A, double B) {
    // Panels refined toward both ends of [A,B].
    double acc = 0.0;
    const double len = B - A;
    if (len <= 0.0) return 0.0;
    const int K = 44;
    double prev = A;
    for (int k = K; k >= 1; --k) {
      const double next = A + 0.5 * len * std::pow(2.0, -k + 1);
      acc += gl_integrate([&](double x) { return rho(x) * std::log(std::abs(zeta - x)); },
                          prev, next, 16);
      prev = next;
    }
    for (int k = 1; k <= K; ++k) {
      const double next = (k == K) ? B : B - 0.5 * len * std::pow(2.0, -k);
      acc += gl_integrate([&](double x) { return rho(x) * std::log(std::abs(zeta - x)); },
                          prev, next, 16);
      prev = next;
    }
    return acc;
  };
  const double xs = zeta.real();
  double acc;
  if (xs > lo && xs < hi)
    acc = graded(lo, xs) + graded(xs, hi);
  else
    acc = graded(lo, hi);
  return -acc;
}

}  // namespace tmlab
