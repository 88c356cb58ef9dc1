#include "tmlab/grid_measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "tmlab/quadrature.hpp"

namespace tmlab {

double GridMeasure::tail_start() const {
  if (cutoff > 0.0) return cutoff;
  if (nodes.empty()) return 0.0;
  return std::max(std::abs(nodes.front()), std::abs(nodes.back()));
}

double GridMeasure::tail_mass() const {
  if (tail_coefficient <= 0.0) return 0.0;
  const double X = tail_start();
  if (X <= 0.0 || tail_exponent <= 1.0) return 0.0;
  return 2.0 * tail_coefficient * std::pow(X, 1.0 - tail_exponent) / (tail_exponent - 1.0);
}

double GridMeasure::total_mass() const {
  double s = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * density[i];
  return s + tail_mass();
}

void GridMeasure::validate() const {
  if (nodes.size() != density.size() || nodes.size() != weights.size())
    throw std::invalid_argument("GridMeasure: inconsistent array sizes");
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    if (!(nodes[i] < nodes[i + 1]))
      throw std::invalid_argument("GridMeasure: nodes must be strictly increasing");
  for (double d : density)
    if (d < 0.0 || !std::isfinite(d))
      throw std::invalid_argument("GridMeasure: density must be finite and nonnegative");
  if (nodes_per_panel > 0) {
    const std::size_t q = nodes_per_panel;
    if (nodes.size() % q != 0)
      throw std::invalid_argument("GridMeasure: node count not a panel multiple");
    const std::size_t P = nodes.size() / q;
    if (panel_edges.size() != 2 * P)
      throw std::invalid_argument("GridMeasure: panel edge count mismatch");
    for (std::size_t p = 0; p < P; ++p) {
      const double lo = panel_edges[2 * p], hi = panel_edges[2 * p + 1];
      if (!(lo < hi)) throw std::invalid_argument("GridMeasure: degenerate panel");
      if (p > 0 && panel_edges[2 * p - 1] > lo + 1e-12 * (hi - lo))
        throw std::invalid_argument("GridMeasure: overlapping panels");
      if (nodes[p * q] < lo || nodes[p * q + q - 1] > hi)
        throw std::invalid_argument("GridMeasure: node outside its panel");
    }
  }
  if (tail_coefficient > 0.0 && tail_exponent <= 1.0)
    throw std::invalid_argument("GridMeasure: non-integrable tail (exponent must exceed 1)");
  if (!std::isfinite(total_mass()))
    throw std::invalid_argument("GridMeasure: non-finite total mass");
}

GridMeasure make_panel_grid(Axis axis, const std::vector<double>& edges, int q) {
  if (q < 2) throw std::invalid_argument("make_panel_grid: need at least 2 nodes per panel");
  if (edges.size() < 2 || edges.size() % 2 != 0)
    throw std::invalid_argument("make_panel_grid: edges must come in (lo,hi) pairs");
  const QuadRule& rule = gauss_legendre(q);
  const std::size_t P = edges.size() / 2;
  GridMeasure m;
  m.axis = axis;
  m.nodes.reserve(P * q);
  m.weights.reserve(P * q);
  m.nodes_per_panel = q;
  m.panel_edges = edges;
  for (std::size_t p = 0; p < P; ++p) {
    const double mid = 0.5 * (edges[2 * p] + edges[2 * p + 1]);
    const double rad = 0.5 * (edges[2 * p + 1] - edges[2 * p]);
    for (int i = 0; i < q; ++i) {
      m.nodes.push_back(mid + rad * rule.x[i]);
      m.weights.push_back(rad * rule.w[i]);
    }
  }
  m.density.assign(m.nodes.size(), 0.0);
  m.validate();
  return m;
}

namespace {

constexpr int kPanelNodes = 10;

// Half-line panel boundaries 0..X: panels shrinking geometrically toward 0
// (densities can have fractional-power cusps at the origin), uniform panels
// over the core [0, 2L] (density features live at scale L), then
// geometrically widening panels (ratio 2) out to the truncation point X.
std::vector<double> half_line_breaks(double L, double X, int panels) {
  constexpr int kOriginLevels = 4;
  constexpr double kOriginRatio = 8.0;
  const double core = std::min(2.0 * L, 0.5 * X);
  int far = 0;
  for (double x = core; x < X; x *= 2.0) ++far;
  const int ncore = std::max(2, panels - far - kOriginLevels);
  std::vector<double> b;
  const double h0 = core / ncore;
  for (int k = kOriginLevels; k >= 1; --k) b.push_back(h0 * std::pow(kOriginRatio, -k));
  for (int k = 0; k <= ncore; ++k) b.push_back(core * k / ncore);
  double x = core;
  while (x < X) {
    x = std::min(2.0 * x, X);
    b.push_back(x);
  }
  b.back() = X;
  // b starts with the graded origin panels, then 0 — restore ordering.
  std::sort(b.begin(), b.end());
  return b;
}

}  // namespace

GridMeasure make_bounded_grid(Axis axis, double lo, double hi, int n) {
  if (!(lo < hi)) throw std::invalid_argument("make_bounded_grid: empty interval");
  const int P = std::max(2, n / kPanelNodes);
  const double mid = 0.5 * (lo + hi), rad = 0.5 * (hi - lo);
  std::vector<double> edges;
  edges.reserve(2 * P);
  for (int p = 0; p < P; ++p) {
    edges.push_back(mid - rad * std::cos(M_PI * p / P));
    edges.push_back(mid - rad * std::cos(M_PI * (p + 1) / P));
  }
  return make_panel_grid(axis, edges, kPanelNodes);
}

GridMeasure make_unbounded_grid(Axis axis, double L, int n, double xmax) {
  if (L <= 0.0) throw std::invalid_argument("make_unbounded_grid: L must be positive");
  if (xmax <= 2.0 * L) throw std::invalid_argument("make_unbounded_grid: xmax must exceed 2L");
  const std::vector<double> half = half_line_breaks(L, xmax, n / (2 * kPanelNodes));
  std::vector<double> edges;
  edges.reserve(4 * (half.size() - 1));
  for (std::size_t k = half.size() - 1; k >= 1; --k) {
    edges.push_back(-half[k]);
    edges.push_back(-half[k - 1]);
  }
  for (std::size_t k = 0; k + 1 < half.size(); ++k) {
    edges.push_back(half[k]);
    edges.push_back(half[k + 1]);
  }
  GridMeasure m = make_panel_grid(axis, edges, kPanelNodes);
  m.cutoff = xmax;
  return m;
}

GridMeasure make_kc_grid(double c, double L, int n, double xmax) {
  if (c <= 0.0) throw std::invalid_argument("make_kc_grid: c must be positive");
  if (xmax <= 2.0 * L + c) throw std::invalid_argument("make_kc_grid: xmax must exceed 2L + c");
  const double vmax = std::sqrt(xmax * xmax - c * c);
  // Panels laid out in v with y = sqrt(c^2 + v^2): the map clusters the node
  // distribution quadratically at +-c, and Gauss-Legendre in v integrates the
  // inverse-square-root balayage densities spectrally (rho * dy/dv is smooth).
  const std::vector<double> vb = half_line_breaks(L, vmax, n / (2 * kPanelNodes));
  const std::size_t P = vb.size() - 1;
  const QuadRule& rule = gauss_legendre(kPanelNodes);
  GridMeasure m;
  m.axis = Axis::Kc;
  m.c = c;
  m.cutoff = xmax;
  m.nodes_per_panel = kPanelNodes;
  auto ymap = [&](double v) { return std::sqrt(c * c + v * v); };
  auto add_panel = [&](double v0, double v1, bool negative) {
    m.panel_edges.push_back(negative ? -ymap(v1) : ymap(v0));
    m.panel_edges.push_back(negative ? -ymap(v0) : ymap(v1));
    const double mid = 0.5 * (v0 + v1), rad = 0.5 * (v1 - v0);
    for (int i = 0; i < kPanelNodes; ++i) {
      const double v = mid + rad * (negative ? -rule.x[i] : rule.x[i]);
      const double y = ymap(v);
      m.nodes.push_back(negative ? -y : y);
      m.weights.push_back(rad * rule.w[i] * (y > 0.0 ? v / y : 0.0));
    }
  };
  for (std::size_t p = P; p >= 1; --p) add_panel(vb[p - 1], vb[p], true);
  for (std::size_t p = 0; p < P; ++p) add_panel(vb[p], vb[p + 1], false);
  m.density.assign(m.nodes.size(), 0.0);
  m.validate();
  return m;
}

GridMeasure make_sigma_p(double K, double p, int n, double xmax) {
  if (!(p > 1.0 && p < 2.0)) throw std::invalid_argument("make_sigma_p: need 1 < p < 2");
  // Reuse the K_c layout with c = 1 for the two half-lines |y| >= 1.
  GridMeasure m = make_kc_grid(1.0, 2.0, n, xmax);
  m.axis = Axis::ImagLine;
  m.c = 0.0;
  for (std::size_t i = 0; i < m.nodes.size(); ++i)
    m.density[i] = K * std::pow(std::abs(m.nodes[i]), -p);
  m.tail_exponent = p;
  m.tail_coefficient = K;
  return m;
}

static const char* axis_name(Axis a) {
  switch (a) {
    case Axis::RealLine: return "real-line";
    case Axis::ImagLine: return "imaginary-line";
    case Axis::Kc: return "K_c";
  }
  return "?";
}

void write_csv(const GridMeasure& m, std::ostream& os) {
  os << "# schema-version: 1\n";
  os << "# axis: " << axis_name(m.axis) << "\n";
  os << std::setprecision(17);
  if (m.axis == Axis::Kc) os << "# c: " << m.c << "\n";
  if (m.nodes_per_panel > 0) {
    os << "# panel-nodes: " << m.nodes_per_panel << "\n";
    os << "# panel-edges:";
    for (double e : m.panel_edges) os << ' ' << e;
    os << "\n";
  }
  os << "# cutoff: " << m.cutoff << "\n";
  os << "# tail_exponent: " << m.tail_exponent << "\n";
  os << "# tail_coefficient: " << m.tail_coefficient << "\n";
  os << "coordinate,density,weight\n";
  for (std::size_t i = 0; i < m.nodes.size(); ++i)
    os << m.nodes[i] << ',' << m.density[i] << ',' << m.weights[i] << "\n";
}

void write_csv_file(const GridMeasure& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(m, f);
}

GridMeasure read_csv(std::istream& is) {
  GridMeasure m;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key;
      ls >> key;
      if (key == "axis:") {
        std::string v;
        ls >> v;
        if (v == "real-line") m.axis = Axis::RealLine;
        else if (v == "imaginary-line") m.axis = Axis::ImagLine;
        else if (v == "K_c") m.axis = Axis::Kc;
        else throw std::runtime_error("unknown axis kind: " + v);
      } else if (key == "c:") {
        ls >> m.c;
      } else if (key == "panel-nodes:") {
        ls >> m.nodes_per_panel;
      } else if (key == "panel-edges:") {
        double e;
        while (ls >> e) m.panel_edges.push_back(e);
      } else if (key == "cutoff:") {
        ls >> m.cutoff;
      } else if (key == "tail_exponent:") {
        ls >> m.tail_exponent;
      } else if (key == "tail_coefficient:") {
        ls >> m.tail_coefficient;
      }
      continue;
    }
    if (line.rfind("coordinate", 0) == 0) continue;
    std::istringstream ls(line);
    double x, d, w;
    char comma;
    if (ls >> x >> comma >> d >> comma >> w) {
      m.nodes.push_back(x);
      m.density.push_back(d);
      m.weights.push_back(w);
    }
  }
  m.validate();
  return m;
}

GridMeasure read_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return read_csv(f);
}

}  // namespace tmlab
