#pragma once

#include <map>
#include <string>
#include <vector>

namespace tmlab {

// Flat key = value configuration: one pair per line, '#' comments, lists
// comma-separated. Typed getters fall back to the given default when the
// key is absent and throw std::invalid_argument on malformed values.
struct Config {
  std::map<std::string, std::string> kv;

  static Config parse(const std::string& text);
  static Config load_file(const std::string& path);

  bool has(const std::string& key) const { return kv.count(key) != 0; }
  std::string get(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  int get_int(const std::string& key, int def) const;
  std::vector<double> get_list(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;
};

// Commands return process exit codes:
//   0 success, 1 solver/runtime failure, 2 multi-cut detection,
//   3 monotone-trend failure.
// All outputs are deterministic functions of the config (fixed formatting,
// fixed pseudo-random sequences, no clocks).

// Solve the vector equilibrium problem and write the solution bundle
// (mu1/mu2/mu3.csv, summary.json, residual_report.txt) into out_dir.
int cmd_solve(const Config& cfg, const std::string& out_dir);

// Build the spectral curve and outer parametrix from the bundle in out_dir
// and write curve_report.json (Vieta, sheet-sum, continuity, g/phi
// identities, alpha agreement, det M, jump residuals, far field).
int cmd_curve(const Config& cfg, const std::string& out_dir);

// Finite-n kernel pipeline per n: density CSVs (x, rho_n, dmu1/dx), trace
// checks, and an SVG overlay plot of the densities.
int cmd_kernel(const Config& cfg, const std::string& out_dir,
               const std::vector<int>& nlist, int bits);

// Rescaled-kernel universality comparison (mode "bulk" or "edge"):
// k = 1, 2, 3 point determinants on a fixed grid against the sine/Airy
// references, per-n sup errors, monotone-trend verdict.
int cmd_universality(const Config& cfg, const std::string& out_dir,
                     const std::vector<int>& nlist, const std::string& mode, int bits);

}  // namespace tmlab
