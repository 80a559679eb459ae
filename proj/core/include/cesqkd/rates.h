#pragma once

#include "cesqkd/coincidence.h"
#include "cesqkd/resources.h"

namespace cesqkd {

/// Binary Shannon entropy in bits, with 0*log2(0) := 0.
double shannon_entropy(double q);

/// Error-correction + privacy-amplification factor 1 - kappa*H2(q) - H2(q).
/// May be negative; callers clip.
double shor_preskill(double q, double kappa);

/// The q in (0, 0.5) where shor_preskill(q, kappa) crosses zero, by bisection
/// to 1e-6 absolute.
double qber_cutoff(double kappa);

/// Sifted-key rate per pulse: pair emission, channel transmission, swap
/// success (capped at 1/2 each), and end detection.
double sifted_rate(double chi, double eta, int stations, double ell,
                   double alpha);

/// Idealized rate for perfect sources and detectors: 2^{-2N} 10^{-alpha*ell/10}.
double ideal_rate(int stations, double ell, double alpha);

/// Repeaterless upper bound log2[(1+t)/(1-t)], t the channel transmittance.
/// Diverges at ell = 0 (domain error).
double tgw_bound(double ell, double alpha);

struct RateBreakdown {
  double r_sif = 0.0;  ///< sifted-key rate per pulse
  double r_sp = 0.0;   ///< Shor-Preskill factor, clipped at 0
  double r = 0.0;      ///< r_sif * r_sp
  double q = 0.0;      ///< QBER used
  bool feasible = false;
};

/// Full secret key-generation rate per pulse: QBER from the coincidence
/// model, then the Shor-Preskill factor times the sifted rate.
RateBreakdown secret_key_rate(const ResourceParams& params,
                              const Topology& topo, int n_max,
                              const VisibilityOptions& opts = {});

}  // namespace cesqkd
