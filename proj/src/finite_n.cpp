#include "tmlab/finite_n.hpp"

#include <algorithm>
#include <cmath>

#include "tmlab/pearcey.hpp"
#include "tmlab/potential.hpp"

namespace tmlab {

namespace {

int digits_for_bits(int bits) { return int(std::ceil(bits * 0.30103)) + 2; }

void install_precision(int bits) { MpReal::default_precision(digits_for_bits(bits)); }

// Integration cutoff: the x-integrand decays like
// exp(-n(V(x) - (3/4) tau^{4/3} x^{4/3})) once the Pearcey growth is folded
// in; find X where that exponent exceeds the precision budget.
double integration_cutoff(int n, const std::vector<double>& V, double tau, int size,
                          int digits10) {
  const double target = digits10 * 2.302585092994046 + 60.0;
  const double t43 = 0.75 * std::pow(tau, 4.0 / 3.0);
  auto expo = [&](double x) {
    double e = n * (poly_even_eval(V, x) - t43 * std::pow(x, 4.0 / 3.0));
    return e - size * std::log(std::max(x, 1.0));
  };
  double X = 1.0;
  while (expo(X) < target && X < 1e4) X *= 1.25;
  // bisect back to the crossing for a tight cutoff
  double lo = X / 1.25, hi = X;
  if (expo(lo) < target) {
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      (expo(mid) < target ? lo : hi) = mid;
    }
    X = hi;
  }
  return X;
}

// Panel count so that the composite Gauss-Legendre error of an integrand
// with log-derivative bounded by `slope` stays below the precision target:
// per-panel error ~ (h*slope/(4q))^{2q}.
int panel_count(double X, double slope, int digits10, int q) {
  const double h = (4.0 * q / slope) * std::pow(10.0, -double(digits10 + 8) / (2.0 * q));
  int p = int(std::ceil(X / std::max(h, 1e-3)));
  return std::min(std::max(p, 16), 600);
}

}  // namespace

BimomentMatrix bimoment_matrix(int n, const std::vector<double>& V, double tau, int size,
                               int bits) {
  if (n <= 0 || n % 3 != 0)
    throw std::invalid_argument("bimoment_matrix: n must be a positive multiple of 3");
  if (tau <= 0.0) throw std::invalid_argument("bimoment_matrix: tau must be positive");
  if (size < 1) throw std::invalid_argument("bimoment_matrix: size must be >= 1");
  if (bits < 64) throw std::invalid_argument("bimoment_matrix: bits must be >= 64");
  install_precision(bits);
  const int digits10 = digits_for_bits(bits);

  BimomentMatrix out;
  out.n = n;
  out.size = size;
  out.bits = bits;
  out.tau = tau;
  out.V = V;
  out.x_cut = integration_cutoff(n, V, tau, size, digits10);
  out.B.assign(size, std::vector<MpReal>(size, MpReal(0)));

  const double slope =
      n * (poly_even_deriv(V, out.x_cut) + std::pow(tau, 4.0 / 3.0) * std::cbrt(out.x_cut)) +
      size;
  const int q = 48;
  const int panels = panel_count(out.x_cut, slope, digits10, q);
  std::vector<MpReal> xs, ws;
  gauss_legendre<MpReal>(q, xs, ws);

  const MpReal h = MpReal(out.x_cut) / panels;
  std::vector<MpReal> xpow(size);
  for (int pnl = 0; pnl < panels; ++pnl) {
    const MpReal mid = (MpReal(pnl) + MpReal(1) / 2) * h;
    const MpReal rad = h / 2;
    for (int i = 0; i < q; ++i) {
      const MpReal x = mid + rad * xs[i];
      const std::vector<MpReal> I =
          moment_functions_T<MpReal>(n, tau, x, size - 1, digits10);
      // e^{-nV(x)} in full precision (V has double coefficients; x^2 powers
      // accumulated in MpReal)
      MpReal vx = 0;
      {
        MpReal x2p = 1;
        for (double coef : V) {
          vx += coef * x2p;
          x2p *= x * x;
        }
      }
      const MpReal base = ws[i] * rad * exp(-n * vx);
      xpow[0] = base;
      for (int k = 1; k < size; ++k) xpow[k] = xpow[k - 1] * x;
      for (int k = 0; k < size; ++k) {
        std::vector<MpReal>& row = out.B[k];
        // parity: only k+l even contributes; the full two-sided integral is
        // twice the half-line value
        for (int l = (k % 2); l < size; l += 2) row[l] += xpow[k] * I[l];
      }
    }
  }
  for (int k = 0; k < size; ++k)
    for (int l = k % 2; l < size; l += 2) out.B[k][l] *= 2;
  return out;
}

BiorthoSystem biortho_polynomials(const BimomentMatrix& bm) {
  install_precision(bm.bits);
  const int m = bm.size;
  std::vector<std::vector<MpReal>> L(m, std::vector<MpReal>(m, MpReal(0)));
  std::vector<std::vector<MpReal>> U(m, std::vector<MpReal>(m, MpReal(0)));
  std::vector<MpReal> D(m);
  // Doolittle LDU: B = L D U, L unit lower, U unit upper.
  std::vector<std::vector<MpReal>> work = bm.B;
  for (int k = 0; k < m; ++k) {
    D[k] = work[k][k];
    const MpReal floor_abs = abs(D[0]) * pow(MpReal(2), -bm.bits / 2);
    if (D[k] <= 0 || abs(D[k]) < floor_abs) {
      throw InsufficientPrecisionError(
          "biortho_polynomials: pivot " + std::to_string(k) +
              " fell below the resolvable range at " + std::to_string(bm.bits) +
              " bits; retry with at least " + std::to_string(2 * bm.bits) + " bits",
          2 * bm.bits);
    }
    L[k][k] = U[k][k] = 1;
    for (int i = k + 1; i < m; ++i) {
      L[i][k] = work[i][k] / D[k];
      U[k][i] = work[k][i] / D[k];
    }
    for (int i = k + 1; i < m; ++i)
      for (int j = k + 1; j < m; ++j) work[i][j] -= L[i][k] * D[k] * U[k][j];
  }

  BiorthoSystem sys;
  sys.n = bm.n;
  sys.bits = bm.bits;
  sys.tau = bm.tau;
  sys.V = bm.V;
  sys.x_cut = bm.x_cut;
  sys.h2 = D;
  sys.pcoef.assign(m, std::vector<MpReal>());
  sys.qcoef.assign(m, std::vector<MpReal>());
  // p_k coefficients: row k of L^{-1} (forward substitution on unit lower L);
  // q_k coefficients: row k of U^{-T}, i.e. column solve of U^T (unit lower).
  for (int k = 0; k < m; ++k) {
    std::vector<MpReal> a(k + 1, MpReal(0)), c(k + 1, MpReal(0));
    a[k] = c[k] = 1;
    for (int i = k - 1; i >= 0; --i) {
      MpReal sa = 0, sc = 0;
      for (int j = i + 1; j <= k; ++j) {
        sa += L[j][i] * a[j];
        sc += U[i][j] * c[j];
      }
      a[i] = -sa;
      c[i] = -sc;
    }
    sys.pcoef[k] = std::move(a);
    sys.qcoef[k] = std::move(c);
  }
  return sys;
}

BiorthoSystem biortho_system(int n, const std::vector<double>& V, double tau, int bits,
                             int size, int max_bits) {
  if (size < 0) size = n;
  for (;;) {
    try {
      return biortho_polynomials(bimoment_matrix(n, V, tau, size, bits));
    } catch (const InsufficientPrecisionError& e) {
      if (2 * bits > max_bits) throw;
      bits = e.required_bits();
    }
  }
}

MpReal BiorthoSystem::eval_p(int k, const MpReal& x) const {
  const std::vector<MpReal>& a = pcoef.at(k);
  MpReal r = 0;
  for (int m = int(a.size()) - 1; m >= 0; --m) r = r * x + a[m];
  return r;
}

MpReal BiorthoSystem::eval_Q(int k, const MpReal& x) const {
  install_precision(bits);
  const int digits10 = digits_for_bits(bits);
  const std::vector<MpReal>& c = qcoef.at(k);
  const std::vector<MpReal> I = moment_functions_T<MpReal>(n, tau, x, k, digits10);
  MpReal s = 0;
  for (int m = 0; m <= k; ++m) s += c[m] * I[m];
  MpReal vx = 0, x2p = 1;
  for (double coef : V) {
    vx += coef * x2p;
    x2p *= x * x;
  }
  return exp(-n * vx) * s;
}

MpReal BiorthoSystem::kernel(const MpReal& x, const MpReal& y) const {
  install_precision(bits);
  const int digits10 = digits_for_bits(bits);
  const std::vector<MpReal> I = moment_functions_T<MpReal>(n, tau, y, n - 1, digits10);
  MpReal vy = 0, y2p = 1;
  for (double coef : V) {
    vy += coef * y2p;
    y2p *= y * y;
  }
  const MpReal wy = exp(-n * vy);
  MpReal acc = 0;
  for (int k = 0; k < n; ++k) {
    MpReal qk = 0;
    for (int m = 0; m <= k; ++m) qk += qcoef[k][m] * I[m];
    acc += eval_p(k, x) * wy * qk / h2[k];
  }
  return acc;
}

double BiorthoSystem::kernel_K11(double x, double y) const {
  install_precision(bits);
  return static_cast<double>(kernel(MpReal(x), MpReal(y)));
}

double BiorthoSystem::mean_density(double x) const { return kernel_K11(x, x) / n; }

double biortho_residual(const BiorthoSystem& sys) {
  install_precision(sys.bits);
  const int digits10 = digits_for_bits(sys.bits);
  const int m = int(sys.h2.size());
  // quadrature over [0, x_cut], doubled with parity: p_k Q_l has parity
  // (-1)^{k+l}, so odd pairs vanish identically and are skipped.
  const int q = 48;
  std::vector<MpReal> xs, ws;
  gauss_legendre<MpReal>(q, xs, ws);
  const double slope = sys.n * (poly_even_deriv(sys.V, sys.x_cut) +
                                std::pow(sys.tau, 4.0 / 3.0) * std::cbrt(sys.x_cut)) +
                       m;
  const int panels = panel_count(sys.x_cut, slope, digits10, q);
  std::vector<std::vector<MpReal>> G(m, std::vector<MpReal>(m, MpReal(0)));
  const MpReal h = MpReal(sys.x_cut) / panels;
  for (int pnl = 0; pnl < panels; ++pnl) {
    const MpReal mid = (MpReal(pnl) + MpReal(1) / 2) * h;
    const MpReal rad = h / 2;
    for (int i = 0; i < q; ++i) {
      const MpReal x = mid + rad * xs[i];
      const std::vector<MpReal> I =
          moment_functions_T<MpReal>(sys.n, sys.tau, x, m - 1, digits10);
      MpReal vx = 0, x2p = 1;
      for (double coef : sys.V) {
        vx += coef * x2p;
        x2p *= x * x;
      }
      const MpReal base = ws[i] * rad * exp(-sys.n * vx);
      for (int l = 0; l < m; ++l) {
        MpReal Ql = 0;
        for (int mm = 0; mm <= l; ++mm) Ql += sys.qcoef[l][mm] * I[mm];
        Ql *= base;
        for (int k = l % 2; k < m; k += 2) G[k][l] += sys.eval_p(k, x) * Ql;
      }
    }
  }
  double worst = 0.0;
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l) {
      MpReal g = 2 * G[k][l];
      if (k == l) g -= sys.h2[k];
      // relative to the pivot of the row pair (conditioning-aware)
      const MpReal ref = sqrt(abs(sys.h2[k] * sys.h2[l]));
      worst = std::max(worst, static_cast<double>(abs(g) / ref));
    }
  return worst;
}

double kernel_trace(const BiorthoSystem& sys) {
  install_precision(sys.bits);
  // K11(x,x) is even in x; integrate the half line and double. The diagonal
  // kernel decays on the equilibrium scale, so double-precision panel
  // geometry with the mp evaluator is enough for the 1e-6 trace target.
  const int q = 32;
  const QuadRule& rule = gauss_legendre(q);
  const int panels = 60;
  const double X = sys.x_cut;
  double acc = 0.0;
  for (int pnl = 0; pnl < panels; ++pnl) {
    const double lo = X * pnl / panels, hi = X * (pnl + 1) / panels;
    const double mid = 0.5 * (lo + hi), rad = 0.5 * (hi - lo);
    for (int i = 0; i < q; ++i) {
      const double x = mid + rad * rule.x[i];
      acc += rule.w[i] * rad * sys.kernel_K11(x, x);
    }
  }
  return 2.0 * acc;
}

double rescaled_bulk_kernel(const BiorthoSystem& sys, double x_star, double rho, double u,
                            double v) {
  const double s = rho * sys.n;
  return sys.kernel_K11(x_star + u / s, x_star + v / s) / s;
}

double rescaled_edge_kernel(const BiorthoSystem& sys, double a, double rho, double u,
                            double v) {
  const double s = std::pow(rho * sys.n, 2.0 / 3.0);
  return sys.kernel_K11(a + u / s, a + v / s) / s;
}

double edge_density_constant(const GridMeasure& mu1, double a) {
  // fit density(x) ~ C sqrt(a - x) over the outer 10% of [0, a], weighting
  // by the quadrature weights; returns rho with density = (rho/pi) sqrt(a-x)
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < mu1.size(); ++i) {
    const double x = mu1.nodes[i];
    if (x < 0.9 * a || x >= a) continue;
    const double s = std::sqrt(a - x);
    num += mu1.weights[i] * mu1.density[i] * s;
    den += mu1.weights[i] * s * s;
  }
  if (den == 0.0) throw std::domain_error("edge_density_constant: no nodes in fit window");
  return M_PI * num / den;
}

}  // namespace tmlab
