#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmlab/grid_measure.hpp"

namespace tmlab {

// Thrown when the external field produces a disconnected support for mu1
// (the solver only handles the one-cut regime).
class MultiCutError : public std::runtime_error {
 public:
  explicit MultiCutError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a quantity the theory guarantees to be monotone (the c_k
// sequence of the iterated balayage, the outer energy trend) drifts the
// wrong way beyond tolerance — a numerical-failure signal.
class NonMonotoneError : public std::runtime_error {
 public:
  explicit NonMonotoneError(const std::string& what) : std::runtime_error(what) {}
};

struct SolveOptions {
  int n1 = 400;        // mu1 grid nodes
  int n2 = 400;        // mu2 grid nodes
  int n3 = 400;        // mu3 grid nodes
  double xmax = 1e4;   // resolved range of the unbounded grids
  int max_outer = 40;  // block-descent sweeps
  double tol = 1e-4;   // outer stop: sup of the variational residuals
};

// Worst-case violations of the three variational conditions, measured at the
// grid nodes (edge nodes excluded where the conditions degenerate):
//   on S(mu1):          2 U^mu1 + V - (3/4) tau^(4/3)|x|^(4/3) - U^mu2 = ell
//   off S(mu1):         ... >= ell                  (ineq_mu1 = worst deficit)
//   on K_c = S(sigma-mu2): 2 U^mu2 = U^mu1 + U^mu3
//   on (-ic, ic):       2 U^mu2 < U^mu1 + U^mu3     (margin_mu2 = smallest gap)
//   on R:               2 U^mu3 = U^mu2
struct ResidualReport {
  double eq_mu1 = 0.0;
  double ineq_mu1 = 0.0;    // worst deficit of the inequality off S(mu1)
  double eq_mu2 = 0.0;
  double ineq_mu2 = 0.0;    // worst violation of 2U^mu2 < U^mu1 + U^mu3 inside
  double eq_mu3 = 0.0;
  double margin_mu2 = 0.0;  // smallest strict gap inside (-ic, ic), informational
};

struct EquilibriumSolution {
  GridMeasure mu1, mu2, mu3;
  std::vector<double> V;  // coefficients of the even polynomial potential
  double tau = 0.0;
  double a = 0.0;    // S(mu1) = [-a, a]
  double c = 0.0;    // saturation endpoint of mu2
  double ell = 0.0;  // Lagrange multiplier of the mu1 condition
  ResidualReport residuals;
  std::vector<double> energy_trace;  // E_V after each block-descent sweep
  int outer_iterations = 0;
  bool one_cut_regular = false;
  double edge_exponent = 0.0;        // fitted vanishing power of dmu1/dx at +-a
  double saturation_exponent = 0.0;  // fitted vanishing power of sigma - mu2 at +-ic
};

// Scalar equilibrium measure with external field Q: minimizes
// I(nu) + int Q dnu over nu >= 0 of the given mass, assuming a single
// interval support [-a, a]; a is located by bisection on the sign of the
// density at the interval ends. Throws MultiCutError when the minimizer
// wants to be negative in the interior.
GridMeasure solve_field_equilibrium(const std::function<double(double)>& Q, double mass,
                                    int n, double a_hint, double* a_out = nullptr,
                                    double* ell_out = nullptr);

// Upper-constrained block solve for mu2 (mu2 <= sigma on the imaginary
// axis): iterated balayage of the excess over the constraint onto K_c.
// Returns the measure on a grid clustered at the saturation points +-ic and
// reports c.
GridMeasure solve_nu2_constrained(const GridMeasure& nu1, const GridMeasure& nu3,
                                  double tau, double c_hint, const SolveOptions& opts,
                                  double* c_out);

// Full constrained vector equilibrium problem for the potential
// V(x) = sum_k V[k] x^(2k) and coupling tau > 0; cyclic block descent over
// (mu3, mu1, mu2) with the energy recorded after every sweep.
EquilibriumSolution solve_vector_equilibrium(const std::vector<double>& V, double tau,
                                             const SolveOptions& opts = {});

// Residuals of a (possibly perturbed) solution triple.
ResidualReport variational_residuals(const EquilibriumSolution& s);

// Least-squares fit of log(dmu1/dx) against log(a - x) over the outer 10%
// of the support (one-cut regular solutions give 1/2).
double fit_edge_exponent(const GridMeasure& mu1, double a);

// Same for the vanishing of sigma - mu2 at +-ic, fitted on the K_c side.
double fit_saturation_exponent(const GridMeasure& mu2, double c, double tau);

// Sufficient one-cut check: x -> V(sqrt(x)) convex on [0, inf). Throws
// MultiCutError when convexity fails on a sample.
void require_one_cut_potential(const std::vector<double>& V);

// Solution bundle I/O: mu1.csv / mu2.csv / mu3.csv plus summary.json in dir.
void write_solution_bundle(const EquilibriumSolution& s, const std::string& dir);
EquilibriumSolution read_solution_bundle(const std::string& dir);

}  // namespace tmlab
