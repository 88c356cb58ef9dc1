#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "tmlab/grid_measure.hpp"

namespace tmlab {

// Logarithmic potential U^nu(z) = int log(1/|z-x|) dnu(x).
// Nodal densities are integrated exactly against piecewise-linear
// interpolation on each panel (closed-form antiderivatives, valid also when
// z lies on the support), plus the analytic power-law tail contribution.
double log_potential(const GridMeasure& m, std::complex<double> z);

// Complex log integral int log(z - s) dnu(s) used by the g-functions.
// branch_offset pi/2 selects arg in (-pi/2, 3pi/2) for measures on the
// imaginary axis (the g2 convention); 0 gives the principal branch.
std::complex<double> log_integral(const GridMeasure& m, std::complex<double> z);

// Cauchy transform F(z) = int dnu(s)/(z - s), z off the support.
std::complex<double> cauchy_transform(const GridMeasure& m, std::complex<double> z);

// Integral of f against the resolved (non-tail) part of m. f may vary
// rapidly near the reduced coordinate zeta (real part: position along the
// support, imaginary part: distance scale): panels near zeta integrate the
// panel's density interpolant with quadrature graded toward Re zeta, the
// rest by spectral nodal sums. Used for sweeping kernels whose peak width is
// smaller than the local panel size.
double resolved_integral(const GridMeasure& m, std::complex<double> zeta,
                         const std::function<double(double)>& f);

// Density of m read at an arbitrary coordinate through the panel's
// polynomial interpolant (piecewise linear on ad-hoc grids, 0 beyond the
// resolved range); the analytic tail is not included.
double density_at(const GridMeasure& m, double x);

// I(nu) = int U^nu dnu.
double log_energy(const GridMeasure& m);

// I(nu, mu) = int U^mu dnu, evaluated in symmetrized form so that
// mutual_energy(a,b) == mutual_energy(b,a) exactly.
double mutual_energy(const GridMeasure& a, const GridMeasure& b);

// Constraint density on the imaginary axis: (sqrt(3)/2pi) tau^(4/3) |y|^(1/3).
double sigma_density(double tau, double y);

// Even polynomial V(x) = sum_k v[k] x^(2k) (coefficients in increasing even powers).
double poly_even_eval(const std::vector<double>& v, double x);
double poly_even_deriv(const std::vector<double>& v, double x);

struct EnergyValue {
  double direct;     // sum I(nu_j) - sum I(nu_j, nu_j+1) + int (V - (3/4) tau^(4/3)|x|^(4/3)) dnu1
  double rewritten;  // (2/3)I(nu1) + (1/12)I(2nu1 - 3nu2) + (1/4)I(nu2 - 2nu3) + field term,
                     // expanded bilinearly; the convex form with positive coefficients
};

// Energy functional E_V of an admissible triple (masses 1, 2/3, 1/3).
EnergyValue energy_functional(const GridMeasure& n1, const GridMeasure& n2,
                              const GridMeasure& n3, const std::vector<double>& V,
                              double tau);

// Potential of a functional density rho on [lo,hi] (coordinates along one
// axis, zeta the reduced evaluation point: z itself for the real line,
// -i z for the imaginary axis). Composite Gauss-Legendre panels graded
// geometrically toward lo, hi, and the projection of zeta, so integrable
// endpoint and logarithmic singularities converge; used where nodal
// piecewise-linear accuracy is insufficient (singular balayage densities).
double log_potential_fn(const std::function<double(double)>& rho, double lo, double hi,
                        std::complex<double> zeta);

}  // namespace tmlab
