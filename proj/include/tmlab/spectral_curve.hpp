#pragma once

#include <array>
#include <complex>

#include "tmlab/equilibrium.hpp"

namespace tmlab {

using Mat4 = std::array<std::array<std::complex<double>, 4>, 4>;

// Parametrization constants of the genus-zero surface with branch points at
// +-a (sheets 1|2) and +-ic (sheets 2|3): unique positive solutions of
//   2s - 2t^2/(3s) = a,   2t - 2s^2/(3t) = -c,
// found by bisection on t/s and polished by Newton to ~1e-14.
void solve_st(double a, double c, double* s, double* t);

// Four-sheeted spectral curve attached to a converged equilibrium solution:
// xi-functions assembled from the Cauchy transforms, sheet maps w_j(z) of
// the rational parametrization, g- and phi-functions, and the asymptotic
// constant alpha of the Cauchy-transform expansions.
class SpectralCurve {
 public:
  explicit SpectralCurve(const EquilibriumSolution& sol);

  const EquilibriumSolution& solution() const { return *sol_; }
  double s() const { return s_; }
  double t() const { return t_; }
  // Residuals of the two defining equations for (s, t).
  double st_residual() const;

  // Cauchy transform F_j of mu_j, j = 1..3.
  std::complex<double> F(int j, std::complex<double> z) const;

  // xi restricted to sheet 1..4 (seven-case assembly; principal branches of
  // z^{1/3} and (-z)^{1/3}). z must lie off the sheet's cuts.
  std::complex<double> xi(int sheet, std::complex<double> z) const;

  // Densities reconstructed from the boundary jumps of xi: which = 1 gives
  // dmu1/dx on (-a,a); 2 gives dmu2/d|z| on iR (jump of xi_2 plus sigma);
  // 3 gives dmu3/dx on R (jump of xi_3 minus the |z|^{1/3} term).
  double density_from_xi(int which, double x) const;

  // Roots w_1..w_4 of w^4 - z w^3 + (s^2-t^2) w^2 + s^2 t^2/3 = 0 labeled by
  // sheet: w_1 ~ z at infinity, w_2 glued to w_1 across S(mu1), w_3 glued to
  // w_2 across K_c, w_4 glued to w_3 across R. Labeling by homotopy
  // continuation from a far reference point; points on a cut are resolved
  // toward the side of the (signed-zero aware) imaginary part.
  std::array<std::complex<double>, 4> sheet_maps(std::complex<double> z) const;

  // g_j(z) = int log(z - s) dmu_j(s); principal branch for j = 1, 3 and
  // arg in (-pi/2, 3pi/2) for j = 2.
  std::complex<double> g_function(int j, std::complex<double> z) const;

  // phi_1 from base point a, phi_2 from +-ic (sign of Im z), phi_3 from 0
  // with the pi i/6 offset; integrates the xi differences along a path off
  // the cuts.
  std::complex<double> phi_function(int j, std::complex<double> z) const;

  // alpha fitted from F_2(z) - 2/(3z) ~ -alpha z^{-5/3} on the positive real
  // ray (Richardson-extrapolated in z^{-1/3}); alpha_cross() is the same
  // constant read from the F_3 expansion (omega^2 alpha pattern).
  double alpha() const { return alpha_; }
  double alpha_cross() const { return alpha_cross_; }

  // Internal: w tracked together with the branch of
  // ((w^2-s^2)(w^2+t^2))^{1/2} along the same homotopy path.
  void sheet_maps_with_root(std::complex<double> z, std::array<std::complex<double>, 4>& w,
                            std::array<std::complex<double>, 4>& r) const;

 private:
  void init_tracking();
  void estimate_alpha();

  const EquilibriumSolution* sol_;
  double s_ = 0.0, t_ = 0.0;
  double alpha_ = 0.0, alpha_cross_ = 0.0;
  double scale_ = 1.0;  // max(a, c), sets path radii
  // Labeled reference data at the two anchor points (upper / lower region).
  std::complex<double> anchor_[2];
  std::array<std::complex<double>, 4> w_ref_[2];
  std::array<std::complex<double>, 4> r_ref_[2];
};

struct ParametrixReport {
  double det_deviation = 0.0;      // max |det M - 1| over the sample points
  double jump_residual = 0.0;      // max entrywise jump defect at cut samples
  std::array<double, 3> far_field{};  // ||M A^{-1} - I|| at |z| = 10, 20, 40
};

// Outer parametrix M(z) = C^{-1} Mhat(z) with Mhat_{kj} = N_k(w_j(z)),
// N_k(w) = w^{k-1} / (w ((w^2-s^2)(w^2+t^2))^{1/2}).
class OuterParametrix {
 public:
  explicit OuterParametrix(const SpectralCurve& curve);

  Mat4 M(std::complex<double> z) const;
  Mat4 A(std::complex<double> z) const;  // asymptotic comparison matrix
  ParametrixReport verify() const;

 private:
  Mat4 Mhat(std::complex<double> z) const;

  const SpectralCurve* curve_;
  Mat4 C_inv_;
  Mat4 blocks_[4];  // constant factor of A per quadrant (jump-propagated)
  double det_C_abs_ = 0.0;
};

}  // namespace tmlab
