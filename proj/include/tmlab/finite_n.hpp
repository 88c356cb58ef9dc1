#pragma once

#include <boost/multiprecision/mpfr.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmlab/grid_measure.hpp"

namespace tmlab {

// Variable-precision real; the working precision (in bits) travels with the
// structures below and is installed before every computation.
using MpReal = boost::multiprecision::mpfr_float;

// Thrown when an LDU pivot falls below the resolvable range of the current
// precision; required_bits() names the precision that should be retried.
class InsufficientPrecisionError : public std::runtime_error {
 public:
  InsufficientPrecisionError(const std::string& what, int required_bits)
      : std::runtime_error(what), required_bits_(required_bits) {}
  int required_bits() const { return required_bits_; }

 private:
  int required_bits_;
};

// Bimoment matrix B_{kl} = iint x^k y^l exp(-n(V(x) + y^4/4 - tau x y)) dx dy
// computed as int x^k I_l(x) e^{-nV(x)} dx with the I_l recurrence sharing
// one Pearcey evaluation per quadrature node. Odd k+l entries are exact
// zeros (integrand parity).
struct BimomentMatrix {
  int n = 0;
  int size = 0;
  int bits = 0;
  double tau = 0.0;
  std::vector<double> V;
  double x_cut = 0.0;  // integration cutoff from the integrand decay rate
  std::vector<std::vector<MpReal>> B;
};

BimomentMatrix bimoment_matrix(int n, const std::vector<double>& V, double tau, int size,
                               int bits);

// Monic biorthogonal families p_k, q_k and the norms h_k^2 from the LDU
// factorization of B: p-coefficients are the rows of L^{-1}, q-coefficients
// the rows of U^{-T}, h_k^2 the pivots.
struct BiorthoSystem {
  int n = 0;
  int bits = 0;
  double tau = 0.0;
  std::vector<double> V;
  double x_cut = 0.0;
  std::vector<std::vector<MpReal>> pcoef;  // pcoef[k][m]: x^m coefficient of p_k
  std::vector<std::vector<MpReal>> qcoef;  // qcoef[k][m]: y^m coefficient of q_k
  std::vector<MpReal> h2;

  MpReal eval_p(int k, const MpReal& x) const;
  // Transformed function Q_k(x) = e^{-nV(x)} sum_m qcoef[k][m] I_m(x).
  MpReal eval_Q(int k, const MpReal& x) const;
  // K11(x,y) = sum_{k<n} p_k(x) Q_k(y) / h_k^2.
  MpReal kernel(const MpReal& x, const MpReal& y) const;
  double kernel_K11(double x, double y) const;
  // rho_n(x) = K11(x,x)/n.
  double mean_density(double x) const;
};

// Factorization of a prepared bimoment matrix. Throws
// InsufficientPrecisionError when a pivot drops below 2^{-bits/2} relative
// to the first pivot (or is nonpositive).
BiorthoSystem biortho_polynomials(const BimomentMatrix& B);

// Build with automatic precision escalation: bits doubles on
// InsufficientPrecisionError up to max_bits, then the error propagates.
// size rows/columns are factored (size >= n; pass n+1 to get p_n itself).
BiorthoSystem biortho_system(int n, const std::vector<double>& V, double tau, int bits,
                             int size = -1, int max_bits = 4096);

// Largest off-diagonal |int p_k Q_l dx| relative to the first pivot, plus
// the diagonal defect |int p_k Q_k - h_k^2|, whichever is worse.
double biortho_residual(const BiorthoSystem& sys);

// int K11(x,x) dx (should equal n).
double kernel_trace(const BiorthoSystem& sys);

// Rescaled kernels of the bulk/edge universality statements; rho is the
// local mean density at x_star (bulk) resp. the square-root edge constant
// (edge: density ~ (rho/pi) (a-x)^{1/2}).
double rescaled_bulk_kernel(const BiorthoSystem& sys, double x_star, double rho, double u,
                            double v);
double rescaled_edge_kernel(const BiorthoSystem& sys, double a, double rho, double u,
                            double v);

// Weighted least-squares fit of dmu1/dx against (a-x)^{1/2} over the outer
// 10% of the support.
double edge_density_constant(const GridMeasure& mu1, double a);

}  // namespace tmlab
