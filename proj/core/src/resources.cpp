#include "cesqkd/resources.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cesqkd {

double ResourceParams::effective_dark() const {
  return dark_coupled ? dark_for_eta(eta) : dark;
}

void ResourceParams::validate() const {
  if (!(chi >= 0.0 && chi < 1.0))
    throw std::invalid_argument("chi must be in [0, 1)");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("eta must be in [0, 1]");
  if (!(dark >= 0.0 && dark <= 1.0))
    throw std::invalid_argument("dark must be in [0, 1]");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  if (!(alpha0 >= 0.0)) throw std::invalid_argument("alpha0 must be >= 0");
  if (!(kappa >= 1.0)) throw std::invalid_argument("kappa must be >= 1");
  if (dark_coupled) dark_for_eta(eta);  // rejects the nonphysical regime
}

void Topology::validate() const {
  if (stations < 1) throw std::invalid_argument("stations must be >= 1");
  if (!(distance >= 0.0)) throw std::invalid_argument("distance must be >= 0");
}

double effective_efficiency(double eta, double seg_len, double alpha,
                            double alpha0) {
  if (eta < 0.0 || eta > 1.0 || seg_len < 0.0 || alpha < 0.0 || alpha0 < 0.0)
    throw std::invalid_argument("effective_efficiency: argument out of domain");
  return std::pow(10.0, -(alpha * seg_len + alpha0) / 10.0) * eta;
}

double dark_for_eta(double eta) {
  if (eta < 0.0 || eta > 1.0)
    throw std::invalid_argument("dark_for_eta: eta out of [0, 1]");
  const double p = kDarkTradeoffA * std::exp(kDarkTradeoffB * eta);
  if (p > 1.0)
    throw std::domain_error("dark_for_eta: trade-off exceeds 1 at eta=" +
                            std::to_string(eta));
  return p;
}

DetectorModel detector_for(const ResourceParams& params, const Topology& topo) {
  return DetectorModel{
      effective_efficiency(params.eta, topo.segment_length(), params.alpha,
                           params.alpha0),
      params.effective_dark()};
}

double prob_no_click(int photons, const DetectorModel& det) {
  if (photons < 0) throw std::invalid_argument("prob_no_click: photons < 0");
  return (1.0 - det.dark) * std::pow(1.0 - det.eta_eff, photons);
}

double prob_click(int photons, const DetectorModel& det) {
  return 1.0 - prob_no_click(photons, det);
}

}  // namespace cesqkd
