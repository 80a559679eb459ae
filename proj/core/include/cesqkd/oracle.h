#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "cesqkd/amplitude.h"
#include "cesqkd/resources.h"

namespace cesqkd {
namespace oracle {

/// Sparse pure state over the 8 optical modes of the single-setup geometry.
/// Mode slots: 0 A_H, 1 A_V, 2 station-left H, 3 station-left V,
/// 4 station-right H, 5 station-right V, 6 B_H, 7 B_V. Before the beam
/// splitter slots 2-5 hold the source beams; after it they hold the station
/// output arms in the same positions.
struct TruncatedState {
  std::vector<std::pair<std::uint64_t, std::complex<double>>> terms;  // sorted

  double norm_squared() const;
  std::complex<double> amplitude_at(std::uint64_t key) const;

  static std::uint64_t pack(const std::array<int, 8>& occ);
  static std::array<int, 8> unpack(std::uint64_t key);
};

/// Two PDC sources as four two-mode squeezed pairs, each truncated at n_max
/// pairs: (A_H, SL_H), (A_V, SL_V), (SR_H, B_H), (SR_V, B_V).
TruncatedState build_pdc_state(double chi, int n_max);

/// 50:50 beam splitter at the station plus the two end polarizer rotators.
TruncatedState evolve(const TruncatedState& source, const AnalyzerAngles& angles);

/// Raw (unnormalized) probability of an ideal detection pattern in an evolved
/// state. Exact for patterns whose entries are at most half the source cutoff.
double pattern_probability(const TruncatedState& evolved,
                           const PhotonPattern& pattern);

/// Full click-outcome distribution over the 2^8 threshold-detector outcomes,
/// normalized to the truncated state. Outcome index bit k is detector k in
/// the order A_H, A_V, st_HL, st_VL, st_VR, st_HR, B_V, B_H.
std::array<double, 256> evolve_and_measure(const TruncatedState& source,
                                           const AnalyzerAngles& angles,
                                           const DetectorModel& det);

/// Visibility extracted from an outcome table by the counting protocol:
/// station swap signature post-selection, ends classified anti/correlated.
double table_visibility(const std::array<double, 256>& table);

struct CompareOptions {
  DetectorModel det{0.4, 1e-5};
  /// Fault-injection hook for self-tests: scales the closed-form side's dark
  /// probability so a deliberate mismatch is detectable.
  double closed_form_dark_scale = 1.0;
};

struct Comparison {
  double max_rel_dev_pattern = 0.0;      // per-pattern |amplitude|^2
  double max_rel_dev_coincidence = 0.0;  // post-selected coincidence ratios
  long patterns_checked = 0;
  double max_rel_dev() const {
    return max_rel_dev_pattern > max_rel_dev_coincidence
               ? max_rel_dev_pattern
               : max_rel_dev_coincidence;
  }
};

/// Runs the closed-form pattern sum and the exact Fock evolution on identical
/// settings and returns the worst relative deviation. Both sides are
/// restricted to the common pattern set (entries <= n_max); the oracle source
/// cutoff is 2*n_max so its per-pattern probabilities are exact there.
Comparison compare_closed_form(const std::vector<double>& chi_grid,
                               const std::vector<double>& angle_grid,
                               int n_max, const CompareOptions& opts = {});

}  // namespace oracle
}  // namespace cesqkd
