#include "tmlab/universal.hpp"

#include <boost/multiprecision/mpfr.hpp>
#include <cmath>

namespace tmlab {

namespace {

using cplx = std::complex<double>;
using Mp = boost::multiprecision::mpfr_float;

// Minimal complex arithmetic over the variable-precision reals (only the
// operations the Maclaurin recurrence needs).
struct MpC {
  Mp re, im;
};
MpC mul(const MpC& a, const MpC& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
MpC add(const MpC& a, const MpC& b) { return {a.re + b.re, a.im + b.im}; }
MpC scale(const MpC& a, const Mp& s) { return {a.re * s, a.im * s}; }

struct AiryPair {
  cplx ai, aip;
};

// Maclaurin series for Ai, Ai' in precision scaled to the cancellation
// e^{(8/3)|z|^{3/2}} between the two fundamental solutions.
AiryPair airy_maclaurin(cplx z) {
  const double za = std::abs(z);
  const int digits = 40 + int(std::ceil((8.0 / 3.0) * std::pow(za, 1.5) / 2.302585));
  const unsigned prev = Mp::default_precision();
  Mp::default_precision(digits);
  const Mp third = Mp(1) / 3;
  const Mp alpha = pow(Mp(3), -Mp(2) / 3) / tgamma(Mp(2) / 3);  // Ai(0)
  const Mp beta = pow(Mp(3), -third) / tgamma(third);           // -Ai'(0)
  const MpC zz{Mp(z.real()), Mp(z.imag())};
  const MpC z3 = mul(zz, mul(zz, zz));
  // f = sum a_k z^{3k}, a_k = a_{k-1}/((3k)(3k-1));
  // g = sum b_k z^{3k+1}, b_k = b_{k-1}/((3k+1)(3k)).
  // Track D_k = a_k z^{3k-1} and E_k = b_k z^{3k}; then the f/g terms are
  // D_k z / E_k z and the derivative terms 3k D_k / (3k+1) E_k (no division
  // by z, so z = 0 is fine).
  MpC f{Mp(1), Mp(0)}, g = zz;
  MpC fp{Mp(0), Mp(0)}, gp{Mp(1), Mp(0)};
  MpC D = scale(mul(zz, zz), Mp(1) / 6);   // a_1 z^2
  MpC E = scale(z3, Mp(1) / 12);           // b_1 z^3
  const Mp tiny = pow(Mp(10), -(digits - 5));
  for (int k = 1; k <= 4000; ++k) {
    const MpC tf = mul(D, zz), tg = mul(E, zz);
    f = add(f, tf);
    g = add(g, tg);
    fp = add(fp, scale(D, Mp(3 * k)));
    gp = add(gp, scale(E, Mp(3 * k + 1)));
    if (abs(tf.re) + abs(tf.im) < tiny && abs(tg.re) + abs(tg.im) < tiny &&
        3 * k > za * 2 + 8)
      break;
    const int m = 3 * (k + 1);
    D = scale(mul(D, z3), 1 / (Mp(m) * (m - 1)));
    E = scale(mul(E, z3), 1 / (Mp(m + 1) * m));
  }
  const MpC ai = add(scale(f, alpha), scale(g, -beta));
  const MpC aip = add(scale(fp, alpha), scale(gp, -beta));
  AiryPair out{{double(ai.re), double(ai.im)}, {double(aip.re), double(aip.im)}};
  Mp::default_precision(prev);
  return out;
}

// Asymptotic expansion, |arg z| <= pi/2, optimal truncation.
AiryPair airy_asymptotic(cplx z) {
  const cplx z12 = std::sqrt(z);
  const cplx zeta = (2.0 / 3.0) * z * z12;
  const cplx z14 = std::sqrt(z12);
  cplx su = 1.0, sv = 1.0;
  double uk = 1.0;
  cplx zinv = 1.0 / zeta;
  cplx zp = 1.0;
  double prev = 1.0;
  for (int k = 1; k <= 60; ++k) {
    uk *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k);
    zp *= -zinv;
    const double mag = uk * std::abs(zp);
    if (mag > prev) break;  // past the optimal truncation point
    prev = mag;
    su += uk * zp;
    sv += (6.0 * k + 1.0) / (1.0 - 6.0 * k) * uk * zp;
  }
  const double c = 0.5 / std::sqrt(M_PI);
  AiryPair out;
  out.ai = c * std::exp(-zeta) / z14 * su;
  out.aip = -c * z14 * std::exp(-zeta) * sv;
  return out;
}

AiryPair airy_pair(cplx z) {
  const double za = std::abs(z);
  if (za <= 80.0) return airy_maclaurin(z);
  if (std::abs(std::arg(z)) <= M_PI / 2 + 1e-14) return airy_asymptotic(z);
  throw std::domain_error("airy_ai: |z| > 80 outside |arg z| <= pi/2 is unsupported");
}

}  // namespace

std::complex<double> airy_ai(std::complex<double> z) { return airy_pair(z).ai; }
std::complex<double> airy_ai_prime(std::complex<double> z) { return airy_pair(z).aip; }

std::complex<double> airy_ai_asymptotic(std::complex<double> z) {
  const cplx z12 = std::sqrt(z);
  return 0.5 / std::sqrt(M_PI) * std::exp(-(2.0 / 3.0) * z * z12) / std::sqrt(z12);
}

std::complex<double> airy_ai_prime_asymptotic(std::complex<double> z) {
  const cplx z12 = std::sqrt(z);
  return -0.5 / std::sqrt(M_PI) * std::sqrt(z12) * std::exp(-(2.0 / 3.0) * z * z12);
}

double sine_kernel(double u, double v) {
  const double d = u - v;
  if (d == 0.0) return 1.0;
  return std::sin(M_PI * d) / (M_PI * d);
}

double airy_kernel(double u, double v) {
  if (u == v) {
    const double ai = airy_ai(cplx(u)).real(), aip = airy_ai_prime(cplx(u)).real();
    return aip * aip - u * ai * ai;
  }
  const double aiu = airy_ai(cplx(u)).real(), aipu = airy_ai_prime(cplx(u)).real();
  const double aiv = airy_ai(cplx(v)).real(), aipv = airy_ai_prime(cplx(v)).real();
  return (aiu * aipv - aipu * aiv) / (u - v);
}

double correlation_det(const std::vector<double>& x, double (*K)(double, double)) {
  return correlation_det_f(x, K);
}

Mat2 airy_model_psi(std::complex<double> s) {
  const cplx omega = std::polar(1.0, 2.0 * M_PI / 3.0);
  auto y = [&](int k) { return std::pow(omega, k) * airy_ai(std::pow(omega, k) * s); };
  auto yp = [&](int k) {
    return std::pow(omega, 2 * k) * airy_ai_prime(std::pow(omega, k) * s);
  };
  const double a = std::arg(s);
  Mat2 m;
  if (a >= 0.0 && a < 2.0 * M_PI / 3.0) {
    m = {{{y(0), -y(2)}, {yp(0), -yp(2)}}};
  } else if (a >= 2.0 * M_PI / 3.0) {
    m = {{{-y(1), -y(2)}, {-yp(1), -yp(2)}}};
  } else if (a < -2.0 * M_PI / 3.0) {
    m = {{{-y(2), y(1)}, {-yp(2), yp(1)}}};
  } else {
    m = {{{y(0), y(1)}, {yp(0), yp(1)}}};
  }
  return m;
}

Mat2 airy_model_jump(int ray) {
  const cplx one(1.0), zero(0.0);
  switch (ray) {
    case 0:
      return {{{one, one}, {zero, one}}};  // arg s = 0
    case 1:
      return {{{one, zero}, {one, one}}};  // arg s = 2pi/3
    case 2:
      return {{{zero, one}, {-one, zero}}};  // arg s = pi
    case 3:
      return {{{one, zero}, {one, one}}};  // arg s = -2pi/3
    default:
      throw std::domain_error("airy_model_jump: ray must be 0..3");
  }
}

Mat2 airy_model_asymptotic(std::complex<double> s) {
  const cplx i(0.0, 1.0);
  const cplx s12 = std::sqrt(s);
  const cplx s14 = std::sqrt(s12);
  const cplx zeta = (2.0 / 3.0) * s * s12;
  const double c = 0.5 / std::sqrt(M_PI);
  const cplx em = std::exp(-zeta), ep = std::exp(zeta);
  Mat2 m;
  m[0][0] = c / s14 * em;
  m[0][1] = c / s14 * i * ep;
  m[1][0] = -c * s14 * em;
  m[1][1] = c * s14 * i * ep;
  return m;
}

}  // namespace tmlab
