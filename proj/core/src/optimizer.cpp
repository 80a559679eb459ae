#include "cesqkd/optimizer.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>

namespace cesqkd {

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }
double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

// Bounded coordinate <-> unbounded BFGS coordinate.
struct BoundMap {
  double lo, hi;
  double to_u(double x) const { return logit((x - lo) / (hi - lo)); }
  double to_x(double u) const { return lo + (hi - lo) * sigmoid(u); }
};

/// Rate objective at fixed station count and distance. Visibility profiles
/// are cached per eta so chi moves are nearly free.
class RateObjective {
 public:
  RateObjective(int stations, double ell, const OptimizerConfig& cfg)
      : stations_(stations), ell_(ell), cfg_(cfg),
        cutoff_(qber_cutoff(cfg.kappa)) {}

  struct Value {
    double r = 0.0;
    double q = 0.5;
    bool feasible = false;
  };

  Value eval(double chi, double eta) {
    ++evaluations_;
    const VisibilityProfile& prof = profile(eta);
    Value v;
    v.q = prof.qber(chi);
    if (v.q < 0.0) v.q = 0.0;
    if (v.q >= 0.5) return v;
    const double sp = shor_preskill(v.q, cfg_.kappa);
    if (sp <= 0.0) return v;
    v.feasible = true;
    v.r = sifted_rate(chi, eta, stations_, ell_, cfg_.alpha) * sp;
    return v;
  }

  const VisibilityProfile& profile(double eta) {
    auto it = profiles_.find(eta);
    if (it == profiles_.end()) {
      const double seg = ell_ / (4.0 * stations_);
      DetectorModel det{
          effective_efficiency(eta, seg, cfg_.alpha, cfg_.alpha0),
          cfg_.dark_coupled ? dark_for_eta(eta) : cfg_.dark};
      VisibilityOptions vopts;
      vopts.max_pairs = cfg_.max_pairs;
      vopts.threads = cfg_.threads;
      vopts.squash = cfg_.squash;
      it = profiles_
               .emplace(eta, VisibilityProfile::compute(stations_, cfg_.n_max,
                                                        det, vopts))
               .first;
    }
    return it->second;
  }

  double dark_at(double eta) const {
    return cfg_.dark_coupled ? dark_for_eta(eta) : cfg_.dark;
  }
  double cutoff() const { return cutoff_; }
  long evaluations() const { return evaluations_; }

 private:
  int stations_;
  double ell_;
  OptimizerConfig cfg_;
  double cutoff_;
  std::map<double, VisibilityProfile> profiles_;
  long evaluations_ = 0;
};

struct BfgsResult {
  double chi = 0.0, eta = 0.0, r = 0.0, q = 0.5;
  bool converged = false;
};

// BFGS ascent of log R in logit coordinates; dim is 1 (chi) or 2 (chi, eta).
BfgsResult bfgs_ascend(RateObjective& obj, const OptimizerConfig& cfg, int dim,
                       double chi0, double eta0, const BoundMap& chi_map,
                       const BoundMap& eta_map) {
  auto value_at = [&](const std::array<double, 2>& u) {
    const double chi = chi_map.to_x(u[0]);
    const double eta = dim == 2 ? eta_map.to_x(u[1]) : eta0;
    return obj.eval(chi, eta);
  };

  std::array<double, 2> u{chi_map.to_u(chi0),
                          dim == 2 ? eta_map.to_u(eta0) : 0.0};
  RateObjective::Value best = value_at(u);
  if (!best.feasible) return {chi0, eta0, 0.0, best.q, false};

  auto gradient = [&](const std::array<double, 2>& at,
                      std::array<double, 2>& g) {
    for (int c = 0; c < dim; ++c) {
      const BoundMap& map = c == 0 ? chi_map : eta_map;
      const double x = map.to_x(at[c]);
      double step = cfg.grad_rel_step * std::max(std::abs(x), 1e-6);
      step = std::min(step, 0.25 * (map.hi - x));
      step = std::min(step, 0.25 * (x - map.lo));
      if (step <= 0.0) {
        g[c] = 0.0;
        continue;
      }
      auto up = at, dn = at;
      up[c] = map.to_u(x + step);
      dn[c] = map.to_u(x - step);
      const auto fp = value_at(up), fm = value_at(dn);
      const double lp = fp.feasible ? std::log(fp.r) : -1e30;
      const double lm = fm.feasible ? std::log(fm.r) : -1e30;
      g[c] = (lp - lm) / (up[c] - dn[c]);
    }
  };

  std::array<double, 4> h{1.0, 0.0, 0.0, 1.0};  // inverse Hessian estimate
  std::array<double, 2> g{0.0, 0.0};
  gradient(u, g);

  bool converged = false;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    std::array<double, 2> dir{h[0] * g[0] + h[1] * g[1],
                              h[2] * g[0] + h[3] * g[1]};
    const double slope = dir[0] * g[0] + dir[1] * g[1];
    if (slope <= 0.0) {  // reset to steepest ascent
      h = {1.0, 0.0, 0.0, 1.0};
      dir = g;
    }
    const double f0 = std::log(best.r);
    double t = 1.0;
    std::array<double, 2> u_next = u;
    RateObjective::Value next = best;
    bool accepted = false;
    for (int back = 0; back < 40; ++back) {
      std::array<double, 2> trial{u[0] + t * dir[0], u[1] + t * dir[1]};
      const auto v = value_at(trial);
      if (v.feasible &&
          std::log(v.r) > f0 + 1e-4 * t * (dir[0] * g[0] + dir[1] * g[1])) {
        u_next = trial;
        next = v;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      converged = true;
      break;
    }
    const double rel_gain = (next.r - best.r) / std::max(best.r, 1e-300);
    std::array<double, 2> g_next{0.0, 0.0};
    gradient(u_next, g_next);
    // BFGS update (maximization: apply the standard rule to -F).
    const std::array<double, 2> s{u_next[0] - u[0], u_next[1] - u[1]};
    const std::array<double, 2> y{g[0] - g_next[0], g[1] - g_next[1]};
    const double ys = y[0] * s[0] + y[1] * s[1];
    if (ys > 1e-12) {
      const double rho = 1.0 / ys;
      // H' = (I - rho s y^T) H (I - rho y s^T) + rho s s^T
      std::array<double, 4> a{1.0 - rho * s[0] * y[0], -rho * s[0] * y[1],
                              -rho * s[1] * y[0], 1.0 - rho * s[1] * y[1]};
      std::array<double, 4> ah{a[0] * h[0] + a[1] * h[2],
                               a[0] * h[1] + a[1] * h[3],
                               a[2] * h[0] + a[3] * h[2],
                               a[2] * h[1] + a[3] * h[3]};
      h = {ah[0] * a[0] + ah[1] * a[1] + rho * s[0] * s[0],
           ah[0] * a[2] + ah[1] * a[3] + rho * s[0] * s[1],
           ah[2] * a[0] + ah[3] * a[1] + rho * s[1] * s[0],
           ah[2] * a[2] + ah[3] * a[3] + rho * s[1] * s[1]};
    }
    u = u_next;
    best = next;
    g = g_next;
    if (rel_gain < cfg.tol_rel) {
      converged = true;
      break;
    }
  }
  return {chi_map.to_x(u[0]), dim == 2 ? eta_map.to_x(u[1]) : eta0, best.r,
          best.q, converged};
}

void validate_config(const OptimizerConfig& cfg) {
  if (!(cfg.chi_lo > 0.0 && cfg.chi_lo < cfg.chi_hi && cfg.chi_hi < 1.0))
    throw std::invalid_argument("optimizer: bad chi bounds");
  if (!(cfg.eta_lo > 0.0 && cfg.eta_lo < cfg.eta_hi && cfg.eta_hi <= 1.0))
    throw std::invalid_argument("optimizer: bad eta bounds");
  if (cfg.seed_grid < 1) throw std::invalid_argument("optimizer: seed_grid < 1");
}

}  // namespace

OptimumRecord maximize_rate(int stations, double ell,
                            const OptimizerConfig& cfg_in) {
  OptimizerConfig cfg = cfg_in;
  validate_config(cfg);
  if (cfg.dark_coupled) cfg.eta_hi = std::min(cfg.eta_hi, 0.84);

  RateObjective obj(stations, ell, cfg);

  OptimumRecord record;
  record.ell = ell;
  record.stations = stations;

  std::vector<double> etas;
  if (cfg.fixed_eta) {
    etas.push_back(*cfg.fixed_eta);
  } else {
    for (int i = 0; i < cfg.seed_grid; ++i)
      etas.push_back(cfg.eta_lo + (cfg.eta_hi - cfg.eta_lo) * (i + 0.5) /
                                      cfg.seed_grid);
  }

  // Seed selection: chi grid truncated at the QBER feasibility crossing,
  // so every ascent starts from a positive rate.
  struct Seed {
    double chi, eta, r;
  };
  std::vector<Seed> seeds;
  for (double eta : etas) {
    const VisibilityProfile& prof = obj.profile(eta);
    double chi_top = cfg.chi_hi;
    if (prof.qber(cfg.chi_lo) >= obj.cutoff()) continue;
    if (prof.qber(cfg.chi_hi) >= obj.cutoff()) {
      double lo = cfg.chi_lo, hi = cfg.chi_hi;
      for (int it = 0; it < 60 && hi - lo > 1e-9; ++it) {
        const double mid = 0.5 * (lo + hi);
        (prof.qber(mid) < obj.cutoff() ? lo : hi) = mid;
      }
      chi_top = lo;
    }
    for (int i = 0; i < cfg.seed_grid; ++i) {
      const double chi =
          cfg.chi_lo + (chi_top - cfg.chi_lo) * (i + 0.5) / cfg.seed_grid;
      const auto v = obj.eval(chi, eta);
      if (v.feasible && v.r > 0.0) seeds.push_back({chi, eta, v.r});
    }
  }
  for (const auto& [chi, eta] : cfg_in.extra_seeds) {
    if (chi <= cfg.chi_lo || chi >= cfg.chi_hi) continue;
    if (!cfg.fixed_eta && (eta <= cfg.eta_lo || eta >= cfg.eta_hi)) continue;
    const double use_eta = cfg.fixed_eta ? *cfg.fixed_eta : eta;
    const auto v = obj.eval(chi, use_eta);
    if (v.feasible && v.r > 0.0) seeds.push_back({chi, use_eta, v.r});
  }

  if (seeds.empty()) {
    record.eta_opt = cfg.fixed_eta ? *cfg.fixed_eta : 0.0;
    record.dark = cfg.fixed_eta ? obj.dark_at(*cfg.fixed_eta) : 0.0;
    record.qber = 0.5;
    record.evaluations = obj.evaluations();
    return record;  // r_max = 0, not converged: distance beyond reach
  }

  std::stable_sort(seeds.begin(), seeds.end(),
                   [](const Seed& a, const Seed& b) { return a.r > b.r; });
  if (cfg.top_seeds > 0 && static_cast<int>(seeds.size()) > cfg.top_seeds)
    seeds.resize(cfg.top_seeds);

  const BoundMap chi_map{cfg.chi_lo, cfg.chi_hi};
  const BoundMap eta_map{cfg.eta_lo, cfg.eta_hi};
  const int dim = cfg.fixed_eta ? 1 : 2;

  BfgsResult best;
  double best_seed_r = seeds.front().r;
  for (const Seed& seed : seeds) {
    const auto res =
        bfgs_ascend(obj, cfg, dim, seed.chi, seed.eta, chi_map, eta_map);
    if (res.r > best.r) best = res;
  }
  if (best.r < best_seed_r) {
    // The ascent may never beat an already-optimal seed; keep the dominator.
    const Seed& s = seeds.front();
    best = {s.chi, s.eta, s.r, obj.eval(s.chi, s.eta).q, best.converged};
  }

  record.chi_opt = best.chi;
  record.eta_opt = best.eta;
  record.dark = obj.dark_at(best.eta);
  record.qber = best.q;
  record.r_max = best.r;
  record.converged = best.converged && best.r > 0.0;
  record.evaluations = obj.evaluations();
  return record;
}

QberScan scan_qber_vs_chi(int stations, const std::vector<double>& chi_grid,
                          double eta, double dark, double ell, double alpha,
                          double alpha0, double kappa, int n_max,
                          const VisibilityOptions& opts) {
  for (std::size_t i = 1; i < chi_grid.size(); ++i)
    if (chi_grid[i] <= chi_grid[i - 1])
      throw std::invalid_argument("scan_qber_vs_chi: grid must ascend");
  QberScan scan;
  scan.cutoff = qber_cutoff(kappa);
  const double seg = ell / (4.0 * stations);
  const DetectorModel det{effective_efficiency(eta, seg, alpha, alpha0), dark};
  const auto profile = VisibilityProfile::compute(stations, n_max, det, opts);
  for (double chi : chi_grid)
    scan.rows.push_back({chi, profile.qber(chi)});
  for (std::size_t i = 0; i < scan.rows.size(); ++i) {
    if (scan.rows[i].qber <= scan.cutoff) continue;
    scan.crossed = true;
    if (i == 0) {
      scan.crossing_chi = scan.rows[0].chi;
    } else {
      const auto& lo = scan.rows[i - 1];
      const auto& hi = scan.rows[i];
      scan.crossing_chi = lo.chi + (scan.cutoff - lo.qber) *
                                       (hi.chi - lo.chi) /
                                       (hi.qber - lo.qber);
    }
    break;
  }
  return scan;
}

std::vector<OptimumRecord> scan_rate_vs_distance(
    int stations, const std::vector<double>& ell_grid,
    const OptimizerConfig& cfg) {
  for (std::size_t i = 1; i < ell_grid.size(); ++i)
    if (ell_grid[i] <= ell_grid[i - 1])
      throw std::invalid_argument("scan_rate_vs_distance: grid must ascend");
  std::vector<OptimumRecord> records;
  OptimizerConfig step_cfg = cfg;
  for (double ell : ell_grid) {
    const auto rec = maximize_rate(stations, ell, step_cfg);
    if (rec.r_max > 0.0) {
      step_cfg.extra_seeds = {{rec.chi_opt, rec.eta_opt}};  // warm start
    }
    records.push_back(rec);
  }
  return records;
}

double find_lmax(int stations, const OptimizerConfig& cfg, double ell_lo,
                 double ell_hi) {
  if (!(ell_lo >= 0.0 && ell_hi > ell_lo))
    throw std::invalid_argument("find_lmax: bad bracket");
  OptimizerConfig step_cfg = cfg;
  auto rate_at = [&](double ell) {
    const auto rec = maximize_rate(stations, ell, step_cfg);
    if (rec.r_max > 0.0)
      step_cfg.extra_seeds = {{rec.chi_opt, rec.eta_opt}};
    return rec.r_max;
  };
  if (rate_at(ell_lo) <= 0.0)
    throw std::invalid_argument("find_lmax: lower bracket is infeasible");
  if (rate_at(ell_hi) > 0.0)
    throw std::invalid_argument("find_lmax: upper bracket is feasible");
  while (ell_hi - ell_lo > 10.0) {
    const double mid = 0.5 * (ell_lo + ell_hi);
    (rate_at(mid) > 0.0 ? ell_lo : ell_hi) = mid;
  }
  return ell_lo;
}

}  // namespace cesqkd
