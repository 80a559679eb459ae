#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cesqkd/amplitude.h"
#include "cesqkd/resources.h"

namespace cesqkd {

/// Binary click record for all 8N threshold detectors, in the same order as
/// PhotonPattern: per station the H/V detectors on the left arm and the V/H
/// detectors on the right arm, plus A's H/V and B's V/H end detectors.
struct ClickOutcome {
  int stations = 1;
  std::vector<std::uint8_t> h_left, v_left, v_right, h_right;  // q, r, s, t
  std::uint8_t a_h = 0, a_v = 0;  // q', r'
  std::uint8_t b_v = 0, b_h = 0;  // s', t'

  /// True when every station has at least one click on each side.
  bool station_post_selected() const;
  static ClickOutcome zero(int stations);
};

/// Detector models by site; stations may differ from the ends.
struct SiteDetectors {
  std::vector<DetectorModel> stations;
  DetectorModel end_a, end_b;
  static SiteDetectors uniform(const DetectorModel& det, int stations);
};

/// Product over all 8N detectors of the threshold response given the ideal
/// pattern: P(outcome | pattern).
double click_likelihood(const ClickOutcome& outcome,
                        const PhotonPattern& pattern,
                        const SiteDetectors& detectors);

struct VisibilityOptions {
  AnalyzerAngles angles{};
  bool squash = false;  ///< reassign end double clicks to 01/10 at weight 1/2
  int max_pairs = -1;   ///< optional extra truncation on the total pair count
  int threads = 0;      ///< 0 = hardware concurrency
};

struct VisibilityResult {
  double max_count = 0.0;  ///< post-selected mass with anti-correlated ends
  double min_count = 0.0;  ///< post-selected mass with correlated ends
  double visibility = 0.0;
  double truncation_bound = 0.0;  ///< (tanh^2 chi)^{n_max+1} tail estimate
};

/// chi-independent visibility accumulator. The closed-form amplitude depends
/// on chi only through tanh(chi)^pairs / cosh(chi)^{4N}, so one pattern pass
/// at fixed detector and geometry settings serves every chi.
class VisibilityProfile {
 public:
  static VisibilityProfile compute(int stations, int n_max,
                                   const DetectorModel& det,
                                   const VisibilityOptions& opts = {});
  VisibilityResult at(double chi) const;
  double qber(double chi) const;

 private:
  int stations_ = 1;
  int n_max_ = 3;
  std::vector<double> max_mass_, min_mass_;  // indexed by total pair count
};

/// Coincidence visibility per the post-selected counting protocol: every
/// station shows the two-click swap signature, end events are classified
/// anti-correlated ("max") or correlated ("min").
VisibilityResult visibility(const ResourceParams& params, const Topology& topo,
                            int n_max, const VisibilityOptions& opts = {});

/// Q = (1 - V) / 2.
double qber(const ResourceParams& params, const Topology& topo, int n_max,
            const VisibilityOptions& opts = {});

/// Bayesian coincidence probability of the end clicks joint with the station
/// clicks, normalized by the station-click probability. end_bits order:
/// A_H, A_V, B_V, B_H. Throws std::runtime_error when the station outcome has
/// zero probability at this truncation.
double coincidence_prob(const std::array<std::uint8_t, 4>& end_bits,
                        const ClickOutcome& station_outcome,
                        const ResourceParams& params, const Topology& topo,
                        const AnalyzerAngles& angles, int n_max);

}  // namespace cesqkd
