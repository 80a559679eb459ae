#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "cesqkd/rates.h"

namespace cesqkd {

struct OptimizerConfig {
  double chi_lo = 1e-3, chi_hi = 0.5;
  double eta_lo = 0.011, eta_hi = 0.84;
  bool dark_coupled = true;        ///< derive dark from eta during the search
  double dark = 1e-5;              ///< used when dark_coupled is off
  std::optional<double> fixed_eta; ///< pins eta; the search runs over chi only
  double alpha = 0.25;
  double alpha0 = 4.0;
  double kappa = 1.22;
  int n_max = 3;
  int seed_grid = 5;               ///< seed grid points per coordinate
  int top_seeds = 0;               ///< ascend from the best K seeds; 0 = all
  double grad_rel_step = 1e-4;     ///< central-difference relative step
  double tol_rel = 1e-4;           ///< stop when relative gain drops below
  int max_iters = 200;
  int max_pairs = -1;
  int threads = 0;
  bool squash = false;
  /// Extra (chi, eta) starting points, e.g. the previous distance's optimum.
  std::vector<std::pair<double, double>> extra_seeds;
};

struct OptimumRecord {
  double ell = 0.0;
  int stations = 1;
  double chi_opt = 0.0;
  double eta_opt = 0.0;
  double dark = 0.0;
  double qber = 0.0;
  double r_max = 0.0;
  long evaluations = 0;
  bool converged = false;
};

/// Quasi-Newton (BFGS) ascent of the secret key rate over (chi, eta) in
/// logit-transformed bounded coordinates, seeded from a coarse grid filtered
/// by QBER feasibility. Returns a non-converged record with r_max = 0 when no
/// seed yields a positive rate.
OptimumRecord maximize_rate(int stations, double ell, const OptimizerConfig& cfg);

struct QberScanRow {
  double chi = 0.0;
  double qber = 0.0;
};

struct QberScan {
  std::vector<QberScanRow> rows;
  double cutoff = 0.0;        ///< qber_cutoff(kappa)
  double crossing_chi = 0.0;  ///< interpolated chi where qber first exceeds it
  bool crossed = false;
};

/// QBER versus chi at fixed eta/dark/distance; one pattern pass serves the
/// whole grid.
QberScan scan_qber_vs_chi(int stations, const std::vector<double>& chi_grid,
                          double eta, double dark, double ell,
                          double alpha = 0.25, double alpha0 = 4.0,
                          double kappa = 1.22, int n_max = 3,
                          const VisibilityOptions& opts = {});

/// Per-distance optimum, warm-started from the previous distance.
std::vector<OptimumRecord> scan_rate_vs_distance(
    int stations, const std::vector<double>& ell_grid,
    const OptimizerConfig& cfg);

/// Largest distance with a positive optimized rate, by bisection to 10 km.
/// The bracket must straddle the feasibility boundary.
double find_lmax(int stations, const OptimizerConfig& cfg, double ell_lo,
                 double ell_hi);

}  // namespace cesqkd
