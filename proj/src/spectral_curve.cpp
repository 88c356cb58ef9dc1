#include "tmlab/spectral_curve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tmlab/potential.hpp"
#include "tmlab/quadrature.hpp"

namespace tmlab {

namespace {

using cplx = std::complex<double>;

constexpr double kPathAngleMargin = 0.08;  // rad, dodge distance off the axes

// ---------------------------------------------------------------------------
// Quartic w^4 - z w^3 + (s^2 - t^2) w^2 + s^2 t^2 / 3 = 0 by Durand-Kerner.
// Deterministic start, converges to ~1e-14 relative for the root scales that
// occur here (one root ~ z, three roots ~ |z|^{-1/3}).
std::array<cplx, 4> quartic_roots(cplx z, double s, double t) {
  const cplx c3 = -z;
  const cplx c2 = s * s - t * t;
  const cplx c0 = s * s * t * t / 3.0;
  auto p = [&](cplx w) { return ((w + c3) * w + c2) * w * w + c0; };
  const double R0 =
      1.0 + std::max(std::abs(z), std::max(std::sqrt(std::abs(c2)),
                                           std::pow(std::abs(c0), 0.25)));
  std::array<cplx, 4> w;
  const cplx seed(0.4, 0.9);
  cplx sp = seed;
  for (int i = 0; i < 4; ++i, sp *= seed) w[i] = R0 * sp;
  for (int it = 0; it < 200; ++it) {
    double move = 0.0;
    for (int i = 0; i < 4; ++i) {
      cplx den = 1.0;
      for (int j = 0; j < 4; ++j)
        if (j != i) den *= w[i] - w[j];
      const cplx d = p(w[i]) / den;
      w[i] -= d;
      move = std::max(move, std::abs(d) / (std::abs(w[i]) + 1.0));
    }
    if (move < 1e-15) break;
  }
  return w;
}

double min_separation(const std::array<cplx, 4>& w) {
  double m = 1e300;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) m = std::min(m, std::abs(w[i] - w[j]));
  return m;
}

cplx sqrt_poly(cplx w, double s, double t) {
  return std::sqrt((w * w - s * s) * (w * w + t * t));
}

// Branch-continuous update: new sqrt value closest to the previous one.
cplx continue_sqrt(cplx w, double s, double t, cplx prev) {
  const cplx r = sqrt_poly(w, s, t);
  return (std::abs(r - prev) <= std::abs(r + prev)) ? r : -r;
}

struct Tracked {
  cplx z;
  std::array<cplx, 4> w;
  std::array<cplx, 4> r;
};

// One continuity step of the labeled root set toward z1, bisecting the step
// when the nearest-root matching becomes ambiguous.
void step_to(Tracked& T, cplx z1, double s, double t, int depth = 0) {
  const std::array<cplx, 4> cand = quartic_roots(z1, s, t);
  const double sep = min_separation(cand);
  std::array<int, 4> pick{-1, -1, -1, -1};
  bool ok = true;
  std::array<bool, 4> used{false, false, false, false};
  for (int i = 0; i < 4 && ok; ++i) {
    double best = 1e300;
    for (int j = 0; j < 4; ++j) {
      const double d = std::abs(cand[j] - T.w[i]);
      if (d < best) {
        best = d;
        pick[i] = j;
      }
    }
    if (best > 0.45 * sep || used[pick[i]]) ok = false;
    used[pick[i]] = true;
  }
  if (!ok) {
    if (depth > 60)
      throw std::runtime_error("spectral curve: sheet tracking lost near z = (" +
                               std::to_string(z1.real()) + ", " + std::to_string(z1.imag()) +
                               ")");
    const cplx mid = 0.5 * (T.z + z1);
    step_to(T, mid, s, t, depth + 1);
    step_to(T, z1, s, t, depth + 1);
    return;
  }
  Tracked N;
  N.z = z1;
  for (int i = 0; i < 4; ++i) {
    N.w[i] = cand[pick[i]];
    N.r[i] = continue_sqrt(N.w[i], s, t, T.r[i]);
  }
  T = N;
}

void track_path(Tracked& T, const std::vector<cplx>& pts, double s, double t) {
  for (const cplx& p : pts) step_to(T, p, s, t);
}

// 4x4 complex helpers (Gaussian elimination with partial pivoting).
cplx det4(Mat4 m) {
  cplx det = 1.0;
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (piv != col) {
      std::swap(m[piv], m[col]);
      det = -det;
    }
    if (m[col][col] == 0.0) return 0.0;
    det *= m[col][col];
    for (int r = col + 1; r < 4; ++r) {
      const cplx f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return det;
}

Mat4 inv4(Mat4 m) {
  Mat4 inv{};
  for (int i = 0; i < 4; ++i) inv[i][i] = 1.0;
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (std::abs(m[piv][col]) == 0.0)
      throw std::runtime_error("spectral curve: singular matrix");
    std::swap(m[piv], m[col]);
    std::swap(inv[piv], inv[col]);
    const cplx d = m[col][col];
    for (int c = 0; c < 4; ++c) {
      m[col][c] /= d;
      inv[col][c] /= d;
    }
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const cplx f = m[r][col];
      if (f == 0.0) continue;
      for (int c = 0; c < 4; ++c) {
        m[r][c] -= f * m[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

Mat4 matmul(const Mat4& a, const Mat4& b) {
  Mat4 out{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) {
      const cplx v = a[i][k];
      if (v == 0.0) continue;
      for (int j = 0; j < 4; ++j) out[i][j] += v * b[k][j];
    }
  return out;
}

cplx principal_cbrt(cplx z) { return std::exp(std::log(z) / 3.0); }

bool upper_side(cplx z) {
  if (z.imag() != 0.0) return z.imag() > 0.0;
  return !std::signbit(z.imag());
}

bool right_side(cplx z) {
  if (z.real() != 0.0) return z.real() > 0.0;
  return !std::signbit(z.real());
}

// Deterministic LCG for reproducible sample points.
struct Lcg {
  std::uint64_t state;
  double next() {  // in [0, 1)
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return double(state >> 11) * 0x1p-53;
  }
};

}  // namespace

// ---------------------------------------------------------------------------

void solve_st(double a, double c, double* s_out, double* t_out) {
  if (a <= 0.0 || c <= 0.0) throw std::invalid_argument("solve_st: a, c must be positive");
  // Eliminate: with r = t/s in (0, 1/sqrt(3)),
  //   c/a = (1 - 3 r^2) / (3 r - r^3),
  // which decreases monotonically from +inf to 0; bisection, then a 2-D
  // Newton polish on the original system.
  const double ratio = c / a;
  auto h = [](double r) { return (1.0 - 3.0 * r * r) / (3.0 * r - r * r * r); };
  double lo = 1e-12, hi = 1.0 / std::sqrt(3.0) - 1e-12;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) > ratio ? lo : hi) = mid;
  }
  const double r = 0.5 * (lo + hi);
  double s = a / (2.0 - 2.0 * r * r / 3.0);
  double t = r * s;
  for (int it = 0; it < 80; ++it) {
    const double f1 = 2.0 * s - 2.0 * t * t / (3.0 * s) - a;
    const double f2 = 2.0 * t - 2.0 * s * s / (3.0 * t) + c;
    const double j11 = 2.0 + 2.0 * t * t / (3.0 * s * s);
    const double j12 = -4.0 * t / (3.0 * s);
    const double j21 = -4.0 * s / (3.0 * t);
    const double j22 = 2.0 + 2.0 * s * s / (3.0 * t * t);
    const double det = j11 * j22 - j12 * j21;
    const double ds = (f1 * j22 - f2 * j12) / det;
    const double dt = (f2 * j11 - f1 * j21) / det;
    s -= ds;
    t -= dt;
    if (std::abs(ds) + std::abs(dt) < 1e-15 * (s + t)) break;
  }
  if (!(s > 0.0) || !(t > 0.0) || !(s * s > 3.0 * t * t))
    throw std::runtime_error("solve_st: Newton left the admissible region");
  *s_out = s;
  *t_out = t;
}

// ---------------------------------------------------------------------------

SpectralCurve::SpectralCurve(const EquilibriumSolution& sol) : sol_(&sol) {
  if (sol.a <= 0.0 || sol.c <= 0.0)
    throw std::invalid_argument("SpectralCurve: solution has no support data");
  solve_st(sol.a, sol.c, &s_, &t_);
  scale_ = std::max(sol.a, sol.c);
  init_tracking();
  estimate_alpha();
}

double SpectralCurve::st_residual() const {
  const double f1 = 2.0 * s_ - 2.0 * t_ * t_ / (3.0 * s_) - sol_->a;
  const double f2 = 2.0 * t_ - 2.0 * s_ * s_ / (3.0 * t_) + sol_->c;
  return std::max(std::abs(f1), std::abs(f2));
}

std::complex<double> SpectralCurve::F(int j, std::complex<double> z) const {
  switch (j) {
    case 1: return cauchy_transform(sol_->mu1, z);
    case 2: return cauchy_transform(sol_->mu2, z);
    case 3: return cauchy_transform(sol_->mu3, z);
    default: throw std::invalid_argument("F: j must be 1..3");
  }
}

std::complex<double> SpectralCurve::xi(int sheet, std::complex<double> z) const {
  const double t43 = std::pow(sol_->tau, 4.0 / 3.0);
  const bool right = right_side(z);
  const bool up = upper_side(z);
  switch (sheet) {
    case 1: {
      cplx vp = 0.0;
      for (std::size_t k = sol_->V.size(); k-- > 1;)
        vp = vp * (z * z) + 2.0 * double(k) * sol_->V[k];
      vp *= z;
      return vp - F(1, z);
    }
    case 2:
      return right ? F(1, z) - F(2, z) + t43 * principal_cbrt(z)
                   : F(1, z) - F(2, z) - t43 * principal_cbrt(-z);
    case 3:
      return right ? F(2, z) - F(3, z) - t43 * principal_cbrt(-z)
                   : F(2, z) - F(3, z) + t43 * principal_cbrt(z);
    case 4: {
      const cplx rot = up ? std::polar(1.0, 4.0 * M_PI / 3.0) : std::polar(1.0, 2.0 * M_PI / 3.0);
      return F(3, z) + rot * t43 * principal_cbrt(z);
    }
    default:
      throw std::invalid_argument("xi: sheet must be 1..4");
  }
}

double SpectralCurve::density_from_xi(int which, double x) const {
  const double eps = 1e-4 * scale_;
  const cplx tiny(0.0, eps);
  switch (which) {
    case 1: {
      if (std::abs(x) >= sol_->a) throw std::domain_error("density_from_xi: x outside S(mu1)");
      const cplx jump = xi(1, cplx(x, eps)) - xi(1, cplx(x, -eps));
      return (jump / (2.0 * M_PI * cplx(0.0, 1.0))).real();
    }
    case 2: {
      // x is the imaginary coordinate y; the + side of the upward-oriented
      // contour is Re z < 0.
      const cplx jump = xi(2, cplx(-eps, x)) - xi(2, cplx(eps, x));
      return jump.real() / (2.0 * M_PI) + sigma_density(sol_->tau, x);
    }
    case 3: {
      const cplx jump = xi(3, cplx(x, eps)) - xi(3, cplx(x, -eps));
      return (jump / (2.0 * M_PI * cplx(0.0, 1.0))).real() -
             (std::sqrt(3.0) / (2.0 * M_PI)) * std::pow(sol_->tau, 4.0 / 3.0) *
                 std::cbrt(std::abs(x));
    }
    default:
      throw std::invalid_argument("density_from_xi: which must be 1..3");
  }
}

// Path from the region's anchor to z that stays inside the region
// (half-plane minus the slit i[c, inf) resp. -i[c, inf)). The two quadrants
// of a region connect only through the gap i(-c, c), so the route descends
// along the anchor ray to a gate radius below c, swings to the clamped
// target angle there, goes radially out to |z|, and finishes with a short
// straight segment. Angles keep a fixed margin off the axes; targets close
// to a cut are approached from the side selected by the signed zero of the
// transverse coordinate.
static std::vector<cplx> anchor_path(cplx z, cplx anchor, double c, double scale) {
  const double L = std::abs(anchor);
  const bool up = upper_side(z);
  const double sgn = up ? 1.0 : -1.0;
  double theta = std::atan2(z.imag(), z.real());
  if (z.imag() == 0.0) theta = right_side(z) ? 0.0 : M_PI;
  theta = std::abs(theta) * sgn;  // fold exact-axis cases into the region
  const double d = kPathAngleMargin;
  double th = std::clamp(std::abs(theta), d, M_PI - d);
  const double rz = std::max(std::abs(z), 1e-12 * scale);
  bool needs_arc = false;
  if (std::abs(th - 0.5 * M_PI) < d) {
    th = 0.5 * M_PI - d * (right_side(z) ? 1.0 : -1.0);
    needs_arc = std::abs(z) < 0.9 * c;  // swing back once below the cut tip
  }
  th *= sgn;
  std::vector<cplx> pts;
  const double th0 = sgn * 0.25 * M_PI;
  const double rgate = std::min(0.5 * c, rz);
  auto radial = [&](double r0, double r1, double ang) {
    const int n = std::max(1, int(std::ceil(std::abs(std::log(r1 / r0)) / 0.12)));
    for (int i = 1; i <= n; ++i)
      pts.push_back(std::polar(r0 * std::pow(r1 / r0, double(i) / n), ang));
  };
  auto arc = [&](double r, double a0, double a1) {
    const int n = std::max(1, int(std::ceil(std::abs(a1 - a0) / 0.05)));
    for (int i = 1; i <= n; ++i) pts.push_back(std::polar(r, a0 + (a1 - a0) * double(i) / n));
  };
  radial(L, rgate, th0);          // down the anchor ray, past the slit tip
  arc(rgate, th0, th);            // swing through the gap below |z| = c
  radial(rgate, rz, th);          // out to the target radius
  if (needs_arc) arc(rz, th, theta);
  const cplx last = pts.back();
  for (int i = 1; i <= 8; ++i) pts.push_back(last + (z - last) * (double(i) / 8.0));
  return pts;
}

void SpectralCurve::init_tracking() {
  const double a = sol_->a, c = sol_->c;
  const double L = 40.0 * scale_;
  anchor_[0] = std::polar(L, 0.25 * M_PI);
  anchor_[1] = std::conj(anchor_[0]);

  // Provisional labels at the anchors: index 0 is the large root (sheet 1,
  // w ~ z), indices 1..3 the small roots ordered by argument; provisional
  // square-root branches are principal.
  Tracked T[2];
  for (int r = 0; r < 2; ++r) {
    T[r].z = anchor_[r];
    std::array<cplx, 4> roots = quartic_roots(anchor_[r], s_, t_);
    std::sort(roots.begin(), roots.end(),
              [](cplx u, cplx v) { return std::abs(u) > std::abs(v); });
    std::sort(roots.begin() + 1, roots.end(),
              [](cplx u, cplx v) { return std::arg(u) < std::arg(v); });
    T[r].w = roots;
    for (int i = 0; i < 4; ++i) T[r].r[i] = sqrt_poly(roots[i], s_, t_);
    // Sheet-1 branch: ((w^2-s^2)(w^2+t^2))^{1/2} ~ w^2 at infinity.
    if (std::abs(T[r].r[0] - roots[0] * roots[0]) > std::abs(T[r].r[0] + roots[0] * roots[0]))
      T[r].r[0] = -T[r].r[0];
  }

  const double eps = 1e-6 * scale_;
  auto go = [&](int region, cplx z) {
    Tracked X = T[region];
    track_path(X, anchor_path(z, anchor_[region], c, scale_), s_, t_);
    return X;
  };

  // Gluing data. Orientations: R left to right (+ side is Im > 0), iR
  // upward (+ side is Re < 0). Jump relations of the model problem:
  //   S(mu1):       w_{1,+} = w_{2,-} with r_{2,-} = -r_{1,+},
  //                 w_{2,+} = w_{1,-} with r_{2,+} = +r_{1,-},
  //   S(sigma-mu2): w_{3,-} = w_{2,+} with r_{3,-} = +r_{2,+},
  //   R \ S(mu1):   w_{4,+} = w_{3,-} with r_{4,+} = +r_{3,-},
  //                 w_{4,-} = w_{3,+} with r_{4,-} = -r_{3,+}.
  const cplx zR(0.5 * a, 0.0);
  const Tracked Uin = go(0, zR + cplx(0, eps));
  const Tracked Din = go(1, zR - cplx(0, eps));
  auto nearest = [](const Tracked& X, cplx target, std::initializer_list<int> skip) {
    int best = -1;
    double bd = 1e300;
    for (int j = 0; j < 4; ++j) {
      bool skipped = false;
      for (int s : skip) skipped |= (j == s);
      if (skipped) continue;
      const double d = std::abs(X.w[j] - target);
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    return best;
  };
  auto sign_fix = [](const char* tag, cplx have, cplx want) {
    const double plus = std::abs(have - want), minus = std::abs(have + want);
    if (std::min(plus, minus) > 1e-4 * std::max(plus, minus) + 1e-9)
      throw std::runtime_error(std::string("spectral curve: inconsistent branch gluing at ") +
                               tag);
    return plus <= minus ? 1.0 : -1.0;
  };

  const int j2dn = nearest(Din, Uin.w[0], {0});
  const double s2dn = sign_fix("s2dn", Din.r[j2dn], -Uin.r[0]);
  const int j2up = nearest(Uin, Din.w[0], {0});
  const double s2up = sign_fix("s2up", Uin.r[j2up], Din.r[0]);

  const cplx zK(0.0, 2.0 * c);
  const Tracked UL = go(0, zK - cplx(eps, 0));
  const Tracked UR = go(0, zK + cplx(eps, 0));
  const int j3up = nearest(UR, UL.w[j2up], {0, j2up});
  const double s3up = sign_fix("s3up", UR.r[j3up], s2up * UL.r[j2up]);

  const Tracked DL = go(1, -zK - cplx(eps, 0));
  const Tracked DR = go(1, -zK + cplx(eps, 0));
  const int j3dn = nearest(DR, DL.w[j2dn], {0, j2dn});
  const double s3dn = sign_fix("s3dn", DR.r[j3dn], s2dn * DL.r[j2dn]);

  const cplx zX(a + 2.0 * scale_, 0.0);
  const Tracked UX = go(0, zX + cplx(0, eps));
  const Tracked DX = go(1, zX - cplx(0, eps));
  const int j4up = 6 - j2up - j3up;  // the leftover small index
  const int j4dn = 6 - j2dn - j3dn;
  if (std::abs(UX.w[j4up] - DX.w[j3dn]) > 1e-3 * scale_ ||
      std::abs(DX.w[j4dn] - UX.w[j3up]) > 1e-3 * scale_)
    throw std::runtime_error("spectral curve: sheet gluing across R failed");
  const double s4up = sign_fix("s4up", UX.r[j4up], s3dn * DX.r[j3dn]);
  const double s4dn = sign_fix("s4dn", DX.r[j4dn], -s3up * UX.r[j3up]);

  const int perm_up[4] = {0, j2up, j3up, j4up};
  const double sgn_up[4] = {1.0, s2up, s3up, s4up};
  const int perm_dn[4] = {0, j2dn, j3dn, j4dn};
  const double sgn_dn[4] = {1.0, s2dn, s3dn, s4dn};
  for (int i = 0; i < 4; ++i) {
    w_ref_[0][i] = T[0].w[perm_up[i]];
    r_ref_[0][i] = sgn_up[i] * T[0].r[perm_up[i]];
    w_ref_[1][i] = T[1].w[perm_dn[i]];
    r_ref_[1][i] = sgn_dn[i] * T[1].r[perm_dn[i]];
  }
}

void SpectralCurve::sheet_maps_with_root(std::complex<double> z,
                                         std::array<std::complex<double>, 4>& w,
                                         std::array<std::complex<double>, 4>& r) const {
  const double excl = 1e-7 * scale_;
  if (std::abs(z - sol_->a) < excl || std::abs(z + sol_->a) < excl ||
      std::abs(z - cplx(0, sol_->c)) < excl || std::abs(z + cplx(0, sol_->c)) < excl)
    throw std::domain_error("sheet_maps: z too close to a branch point");
  const int region = upper_side(z) ? 0 : 1;
  Tracked T{anchor_[region], w_ref_[region], r_ref_[region]};
  track_path(T, anchor_path(z, anchor_[region], sol_->c, scale_), s_, t_);
  w = T.w;
  r = T.r;
}

std::array<std::complex<double>, 4> SpectralCurve::sheet_maps(std::complex<double> z) const {
  std::array<cplx, 4> w, r;
  sheet_maps_with_root(z, w, r);
  return w;
}

std::complex<double> SpectralCurve::g_function(int j, std::complex<double> z) const {
  switch (j) {
    case 1: return log_integral(sol_->mu1, z);
    case 2: return log_integral(sol_->mu2, z);
    case 3: return log_integral(sol_->mu3, z);
    default: throw std::invalid_argument("g_function: j must be 1..3");
  }
}

std::complex<double> SpectralCurve::phi_function(int j, std::complex<double> z) const {
  cplx base, offset = 0.0;
  int sa, sb;  // the two sheets whose xi difference is integrated
  const double c = sol_->c;
  switch (j) {
    case 1:
      base = sol_->a;
      sa = 1;
      sb = 2;
      break;
    case 2:
      base = upper_side(z) ? cplx(0, c) : cplx(0, -c);
      sa = 2;
      sb = 3;
      break;
    case 3:
      base = 0.0;
      offset = cplx(0.0, M_PI / 6.0);
      sa = 3;
      sb = 4;
      break;
    default:
      throw std::invalid_argument("phi_function: j must be 1..3");
  }
  if (z.imag() == 0.0 && j != 3)
    z += cplx(0.0, (std::signbit(z.imag()) ? -1.0 : 1.0) * 1e-7 * scale_);
  std::vector<cplx> waypoints{base};
  if (j == 1 && z.real() < 0.0 && std::abs(z.imag()) >= 0.8 * c)
    waypoints.push_back(cplx(0.0, (upper_side(z) ? 0.5 : -0.5) * c));
  waypoints.push_back(z);
  cplx acc = offset;
  for (std::size_t seg = 0; seg + 1 < waypoints.size(); ++seg) {
    const cplx p0 = waypoints[seg], p1 = waypoints[seg + 1];
    // Geometric panels graded toward the segment start (the base point
    // carries the square-root / cube-root vanishing of the xi difference).
    const int panels = 14;
    double hi = 1.0;
    for (int p = 0; p < panels; ++p) {
      const double lo = (p == panels - 1) ? 0.0 : hi * 0.45;
      const QuadRule& q = gauss_legendre(24);
      const double mid = 0.5 * (lo + hi), rad = 0.5 * (hi - lo);
      for (std::size_t i = 0; i < q.x.size(); ++i) {
        const double u = mid + rad * q.x[i];
        const cplx y = p0 + (p1 - p0) * u;
        acc += -0.5 * q.w[i] * rad * (p1 - p0) * (xi(sa, y) - xi(sb, y));
      }
      hi = lo;
    }
  }
  return acc;
}

void SpectralCurve::estimate_alpha() {
  const double R = 30.0 * scale_;
  auto f2 = [&](double r) {
    const cplx z(r, 0.0);
    return (-(F(2, z) - 2.0 / (3.0 * z)) * std::pow(z, 5.0 / 3.0)).real();
  };
  alpha_ = 2.0 * f2(2.0 * R) - f2(R);  // Richardson in z^{-1/3} -> O(z^{-2/3})
  const cplx w2 = std::polar(1.0, -4.0 * M_PI / 3.0);  // 1/omega^2
  auto f3 = [&](double r) {
    const cplx z = std::polar(r, M_PI / 3.0);
    return ((F(3, z) - 1.0 / (3.0 * z)) * std::pow(z, 5.0 / 3.0) * w2).real();
  };
  alpha_cross_ = 2.0 * f3(2.0 * R) - f3(R);
}

// ---------------------------------------------------------------------------

namespace {

Mat4 jump_matrix_S1() {
  Mat4 J{};
  J[0][1] = 1.0;
  J[1][0] = -1.0;
  J[2][3] = 1.0;
  J[3][2] = -1.0;
  return J;
}
Mat4 jump_matrix_R() {
  Mat4 J{};
  J[0][0] = 1.0;
  J[1][1] = 1.0;
  J[2][3] = 1.0;
  J[3][2] = -1.0;
  return J;
}
Mat4 jump_matrix_Kc() {
  Mat4 J{};
  J[0][0] = 1.0;
  J[1][2] = -1.0;
  J[2][1] = 1.0;
  J[3][3] = 1.0;
  return J;
}

}  // namespace

OuterParametrix::OuterParametrix(const SpectralCurve& curve) : curve_(&curve) {
  // Constant quadrant factors of the comparison matrix A. The first-quadrant
  // block is the standard Airy-type constant matrix with the sign of its
  // first row flipped so that det A = +1 (the conventional i/sqrt(3)
  // normalization gives det -1, which would force det M = -1); the other
  // quadrants are propagated through the jump conditions of A across R and
  // iR, including the z^{+-1/3} branch twist across the negative real axis,
  // so A has exactly the jumps the far field of Mhat requires.
  {
    const cplx omega = std::polar(1.0, 2.0 * M_PI / 3.0);
    const cplx w2 = omega * omega;
    const cplx pref = cplx(0.0, 1.0) / std::sqrt(3.0);
    const cplx b1[3][3] = {{1.0, -omega, -w2}, {-1.0, 1.0, 1.0}, {-1.0, w2, omega}};
    Mat4 B1{};
    B1[0][0] = 1.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) B1[i + 1][j + 1] = pref * b1[i][j];
    blocks_[0] = B1;
    blocks_[1] = matmul(blocks_[0], jump_matrix_Kc());
    Mat4 twist{};
    twist[0][0] = 1.0;
    twist[1][1] = omega;
    twist[2][2] = 1.0;
    twist[3][3] = std::conj(omega);
    blocks_[2] = matmul(twist, matmul(blocks_[1], inv4(jump_matrix_R())));
    blocks_[3] = matmul(blocks_[2], inv4(jump_matrix_Kc()));
    const Mat4 closure = matmul(blocks_[3], jump_matrix_R());
    double defect = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        defect = std::max(defect, std::abs(closure[i][j] - blocks_[0][i][j]));
    if (defect > 1e-12)
      throw std::runtime_error("outer parametrix: A jump system failed to close");
  }
  // C from the z -> infinity matching Mhat(z) A(z)^{-1} = C + O(1/z),
  // Richardson-extrapolated along a mid-quadrant ray.
  const double scale = std::max(curve.solution().a, curve.solution().c);
  auto Chat = [&](double R) {
    const cplx z = std::polar(R, 0.25 * M_PI);
    return matmul(Mhat(z), inv4(A(z)));
  };
  // Mhat A^{-1} is analytic at infinity, so the expansion is in integer
  // powers of 1/z; three radii cancel the 1/z and 1/z^2 terms.
  const Mat4 c1 = Chat(300.0 * scale);
  const Mat4 c2 = Chat(600.0 * scale);
  const Mat4 c3 = Chat(1200.0 * scale);
  Mat4 C{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      C[i][j] = (8.0 * c3[i][j] - 6.0 * c2[i][j] + c1[i][j]) / 3.0;
  det_C_abs_ = std::abs(det4(C));
  if (det_C_abs_ < 1e-10)
    throw std::runtime_error("outer parametrix: singular normalization matrix");
  C_inv_ = inv4(C);
}

Mat4 OuterParametrix::Mhat(std::complex<double> z) const {
  std::array<cplx, 4> w, r;
  curve_->sheet_maps_with_root(z, w, r);
  Mat4 out{};
  for (int j = 0; j < 4; ++j) {
    const cplx base = 1.0 / (w[j] * r[j]);
    cplx pw = base;
    for (int k = 0; k < 4; ++k) {
      out[k][j] = pw;
      pw *= w[j];
    }
  }
  return out;
}

Mat4 OuterParametrix::A(std::complex<double> z) const {
  const bool up = upper_side(z), right = right_side(z);
  Mat4 out = blocks_[up ? (right ? 0 : 1) : (right ? 3 : 2)];
  const cplx z13 = principal_cbrt(z);
  for (int j = 0; j < 4; ++j) {
    out[1][j] *= z13;
    out[3][j] /= z13;
  }
  return out;
}

Mat4 OuterParametrix::M(std::complex<double> z) const { return matmul(C_inv_, Mhat(z)); }

ParametrixReport OuterParametrix::verify() const {
  ParametrixReport rep;
  const EquilibriumSolution& sol = curve_->solution();
  const double a = sol.a, c = sol.c;
  const double scale = std::max(a, c);

  Lcg rng{0x9e3779b97f4a7c15ULL};
  for (int i = 0; i < 50; ++i) {
    const double rad = (0.3 + 4.7 * rng.next()) * scale;
    double th = 0.1 + rng.next() * (0.5 * M_PI - 0.2);  // interior of a quadrant
    th += 0.5 * M_PI * double(i % 4);
    const cplx z = std::polar(rad, th - M_PI);
    rep.det_deviation = std::max(rep.det_deviation, std::abs(det4(M(z)) - 1.0));
  }

  const double eps = 1e-10 * scale;
  auto jump_defect = [&](cplx zp, cplx zm, const Mat4& J) {
    const Mat4 Mp = M(zp), Mm = matmul(M(zm), J);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        num = std::max(num, std::abs(Mp[i][j] - Mm[i][j]));
        den = std::max(den, std::abs(Mp[i][j]));
      }
    return num / std::max(den, 1.0);
  };
  const Mat4 J1 = jump_matrix_S1(), JR = jump_matrix_R(), JK = jump_matrix_Kc();
  for (double f : {0.25, -0.4, 0.6, -0.75, 0.85, 0.1}) {
    const double x = f * a;
    rep.jump_residual = std::max(
        rep.jump_residual, jump_defect(cplx(x, eps), cplx(x, -eps), J1));
  }
  for (double f : {1.2, -1.4, 1.8, -2.3, 3.0, -4.0}) {
    const double x = f * a;
    rep.jump_residual = std::max(
        rep.jump_residual, jump_defect(cplx(x, eps), cplx(x, -eps), JR));
  }
  for (double f : {1.2, 1.6, 2.5, 4.0}) {
    for (double sgn : {1.0, -1.0}) {
      const cplx y(0.0, sgn * f * c);
      // + side of the upward-oriented imaginary axis is Re z < 0.
      rep.jump_residual = std::max(
          rep.jump_residual, jump_defect(y - cplx(eps, 0), y + cplx(eps, 0), JK));
    }
  }

  const double radii[3] = {10.0, 20.0, 40.0};
  for (int i = 0; i < 3; ++i) {
    const cplx z = std::polar(radii[i], 0.25 * M_PI);
    const Mat4 E = matmul(M(z), inv4(A(z)));
    double err = 0.0;
    for (int r = 0; r < 4; ++r)
      for (int cc = 0; cc < 4; ++cc)
        err = std::max(err, std::abs(E[r][cc] - (r == cc ? 1.0 : 0.0)));
    rep.far_field[i] = err;
  }
  return rep;
}

}  // namespace tmlab
