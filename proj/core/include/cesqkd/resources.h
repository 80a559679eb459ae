#pragma once

namespace cesqkd {

// InGaAs dark-count/efficiency trade-off constants: dark = A * exp(B * eta).
inline constexpr double kDarkTradeoffA = 6.1e-7;
inline constexpr double kDarkTradeoffB = 17.0;

/// Physical resource parameters shared by every computation.
struct ResourceParams {
  double chi = 0.1;      ///< source amplitude; pair production rate is chi^2
  double eta = 0.4;      ///< intrinsic detector efficiency
  double dark = 1e-5;    ///< dark-count probability per detector per time bin
  double alpha = 0.25;   ///< channel loss coefficient, dB/km
  double alpha0 = 4.0;   ///< fixed distance-independent loss, dB
  double kappa = 1.22;   ///< reconciliation efficiency, >= 1
  bool dark_coupled = false;  ///< derive dark from eta via dark_for_eta()

  double effective_dark() const;
  void validate() const;  // throws std::invalid_argument on a bad field
};

/// Chain geometry: N swapping setups spanning a total distance.
/// 2N PDC sources alternate with 2N-1 measurement stations; every photon
/// crosses exactly one segment of length distance/(4N) before detection.
struct Topology {
  int stations = 1;      ///< number of swapping setups N
  double distance = 0.0; ///< total A-to-B distance, km

  double segment_length() const { return distance / (4.0 * stations); }
  void validate() const;
};

/// Threshold-detector response parameters seen by one detector.
struct DetectorModel {
  double eta_eff = 1.0;  ///< net efficiency: channel transmittance x intrinsic
  double dark = 0.0;     ///< dark-count probability
};

/// Net detection efficiency after seg_len km of fiber plus fixed losses.
double effective_efficiency(double eta, double seg_len, double alpha, double alpha0);

/// Dark-count probability implied by the InGaAs trade-off curve.
/// Throws std::domain_error when the result exceeds 1 (eta beyond ~0.84).
double dark_for_eta(double eta);

/// Detector model shared by all 8N detectors of a homogeneous chain.
DetectorModel detector_for(const ResourceParams& params, const Topology& topo);

/// P(no click | i photons incident) = (1 - dark) * (1 - eta_eff)^i.
double prob_no_click(int photons, const DetectorModel& det);
double prob_click(int photons, const DetectorModel& det);

}  // namespace cesqkd
