#pragma once

#include <complex>

#include "tmlab/grid_measure.hpp"

namespace tmlab {

// Density at `at` (a coordinate on the target axis) of the balayage of a
// unit point mass onto the target. The source must lie on the real or
// imaginary axis; for K_c targets the point `at` satisfies |at| > c.
// Closed forms:
//   delta_iy -> R   : (1/pi) |y| / (x^2 + y^2)
//   delta_x  -> iR  : (1/pi) |x| / (y^2 + x^2)
//   delta_iy -> K_c : (1/pi) sqrt(c^2-y^2) / (|v-y| sqrt(v^2-c^2))
//   delta_x  -> K_c : (1/pi) |v| sqrt(c^2+x^2) / ((v^2+x^2) sqrt(v^2-c^2))
double balayage_point_density(std::complex<double> source, Axis target, double c, double at);

// Balayage of a unit point mass onto a freshly built target grid of n nodes;
// densities from the closed forms, analytic O(|z|^-2) tail attached.
GridMeasure balayage_point_measure(std::complex<double> source, Axis target, double c,
                                   int n = 400, double xmax = 1e4);

// Balayage of a grid measure: nodal quadrature of the point kernels against
// m (including m's analytic tail). Mass is preserved; when renormalize is
// set the output is scaled so the masses agree exactly.
GridMeasure balayage_measure(const GridMeasure& m, Axis target, double c = 0.0,
                             int n = 400, double xmax = 1e4, bool renormalize = true);

// Same, but evaluated on a caller-provided target grid (densities and tail
// of `target` are overwritten).
void balayage_measure_onto(const GridMeasure& m, GridMeasure& target, double c,
                           bool renormalize = true);

// C_p = 1/(2 sin(p pi/2)) for 1 < p < 2 (< 1 iff p < 5/3).
double cp_constant(double p);

// Closed form pi/(2 cos(p pi/2)) of int_0^inf s^p/(1+s^2) ds, -1 < p < 1;
// cross-validated against quadrature on every call.
double standard_integral(double p);

}  // namespace tmlab
