#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

namespace tmlab {

// Support geometry of a measure. Coordinates are real numbers along the axis:
// x for the real line, y for the imaginary axis (point i*y), and y with
// |y| >= c for K_c = (-i*inf,-ic] u [ic, i*inf).
enum class Axis { RealLine, ImagLine, Kc };

// Nonnegative measure given by nodal density values (w.r.t. arclength),
// quadrature weights, and an optional analytic power-law tail
// density ~ tail_coefficient * |x|^(-tail_exponent) beyond `cutoff`
// (applied symmetrically on both unbounded ends).
//
// Grids are composite Gauss-Legendre: nodes_per_panel consecutive nodes form
// one panel whose hull is (panel_edges[2p], panel_edges[2p+1]). Panels tile
// the resolved range |x| <= cutoff without overlap, so quadrature weights and
// the analytic tail never double count. Panel hulls may be separated by gaps
// (the (-c, c) hole of K_c grids). nodes_per_panel == 0 means an ad-hoc grid
// with no panel structure (treated as a single piecewise-linear chain).
struct GridMeasure {
  Axis axis = Axis::RealLine;
  double c = 0.0;  // saturation point, Kc only
  std::vector<double> nodes;    // strictly increasing coordinates
  std::vector<double> density;  // >= 0
  std::vector<double> weights;  // quadrature weights
  int nodes_per_panel = 0;
  std::vector<double> panel_edges;  // lo,hi per panel
  double cutoff = 0.0;              // resolved range bound; 0 = last node
  double tail_exponent = 0.0;
  double tail_coefficient = 0.0;

  std::size_t size() const { return nodes.size(); }
  std::complex<double> point(std::size_t i) const {
    return axis == Axis::RealLine ? std::complex<double>(nodes[i], 0.0)
                                  : std::complex<double>(0.0, nodes[i]);
  }
  // Coordinate beyond which the analytic tail applies.
  double tail_start() const;
  double tail_mass() const;
  double total_mass() const;

  // Validates invariants (density >= 0, finite mass, log-integrable tail,
  // consistent panel structure).
  void validate() const;
};

// Core builder: one q-point Gauss-Legendre rule per panel; edges holds
// (lo, hi) pairs, increasing and non-overlapping.
GridMeasure make_panel_grid(Axis axis, const std::vector<double>& edges, int q);

// Convenience builders; n is rounded down to a multiple of the panel size.
// Bounded grids use cosine-graded panel edges (quadratic clustering at the
// interval ends, where equilibrium densities vanish like square roots).
GridMeasure make_bounded_grid(Axis axis, double lo, double hi, int n);
// Unbounded axes use the compactification x = L*u/(1-u^2) with uniform
// panels in u covering |x| <= xmax; the analytic tail covers the rest.
GridMeasure make_unbounded_grid(Axis axis, double L, int n, double xmax = 1e4);
// Two half-lines |y| >= c; node clustering ~ sqrt near +-c for the
// inverse-square-root balayage densities.
GridMeasure make_kc_grid(double c, double L, int n, double xmax = 1e4);

// Measure with density K/|y|^p on |y| >= 1 of the imaginary axis (the
// sigma_p of the tail-transfer bound); inner disk left empty so the mass
// stays finite for p close to 2.
GridMeasure make_sigma_p(double K, double p, int n, double xmax = 1e4);

// CSV serialization: '#' header lines record schema version, axis kind,
// panel structure and tail data; rows are coordinate,density,weight.
void write_csv(const GridMeasure& m, std::ostream& os);
void write_csv_file(const GridMeasure& m, const std::string& path);
GridMeasure read_csv(std::istream& is);
GridMeasure read_csv_file(const std::string& path);

}  // namespace tmlab
