#include "cesqkd/rates.h"

#include <cmath>
#include <stdexcept>

namespace cesqkd {

double shannon_entropy(double q) {
  if (q < 0.0 || q > 1.0)
    throw std::domain_error("shannon_entropy: q outside [0, 1]");
  if (q == 0.0 || q == 1.0) return 0.0;
  return -q * std::log2(q) - (1.0 - q) * std::log2(1.0 - q);
}

double shor_preskill(double q, double kappa) {
  if (q < 0.0 || q > 0.5)
    throw std::domain_error("shor_preskill: q outside [0, 0.5]");
  if (kappa < 1.0) throw std::domain_error("shor_preskill: kappa < 1");
  const double h = shannon_entropy(q);
  return 1.0 - kappa * h - h;
}

double qber_cutoff(double kappa) {
  if (kappa < 1.0) throw std::domain_error("qber_cutoff: kappa < 1");
  double lo = 0.0, hi = 0.5;  // shor_preskill: 1 at lo, negative at hi
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (shor_preskill(mid, kappa) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double sifted_rate(double chi, double eta, int stations, double ell,
                   double alpha) {
  if (stations < 1) throw std::invalid_argument("sifted_rate: stations < 1");
  const double n = stations;
  const double pair_emission = std::pow(chi * chi, 2.0 * n);
  const double transmission =
      std::pow(10.0, -(alpha * ell / (40.0 * n)) * 4.0 * n);
  const double swaps = std::pow(eta * eta / 2.0, 2.0 * n - 1.0);
  return 0.5 * pair_emission * transmission * swaps * eta * eta;
}

double ideal_rate(int stations, double ell, double alpha) {
  if (stations < 1) throw std::invalid_argument("ideal_rate: stations < 1");
  return std::pow(2.0, -2.0 * stations) * std::pow(10.0, -alpha * ell / 10.0);
}

double tgw_bound(double ell, double alpha) {
  if (ell <= 0.0)
    throw std::domain_error("tgw_bound: diverges at ell = 0");
  const double t = std::pow(10.0, -alpha * ell / 10.0);
  return std::log2((1.0 + t) / (1.0 - t));
}

RateBreakdown secret_key_rate(const ResourceParams& params,
                              const Topology& topo, int n_max,
                              const VisibilityOptions& opts) {
  RateBreakdown out;
  out.q = qber(params, topo, n_max, opts);
  const double sp = shor_preskill(out.q, params.kappa);
  out.feasible = sp > 0.0;
  out.r_sp = out.feasible ? sp : 0.0;
  out.r_sif = sifted_rate(params.chi, params.eta, topo.stations, topo.distance,
                          params.alpha);
  out.r = out.r_sif * out.r_sp;
  return out;
}

}  // namespace cesqkd
