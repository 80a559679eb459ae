#include "cesqkd/coincidence.h"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace cesqkd {

namespace {

double response(std::uint8_t bit, int photons, const DetectorModel& det) {
  return bit ? prob_click(photons, det) : prob_no_click(photons, det);
}

}  // namespace

bool ClickOutcome::station_post_selected() const {
  for (int s = 0; s < 2 * stations - 1; ++s) {
    if (!(h_left[s] || v_left[s])) return false;
    if (!(v_right[s] || h_right[s])) return false;
  }
  return true;
}

ClickOutcome ClickOutcome::zero(int stations) {
  ClickOutcome o;
  o.stations = stations;
  o.h_left.assign(2 * stations - 1, 0);
  o.v_left.assign(2 * stations - 1, 0);
  o.v_right.assign(2 * stations - 1, 0);
  o.h_right.assign(2 * stations - 1, 0);
  return o;
}

SiteDetectors SiteDetectors::uniform(const DetectorModel& det, int stations) {
  SiteDetectors d;
  d.stations.assign(2 * stations - 1, det);
  d.end_a = det;
  d.end_b = det;
  return d;
}

double click_likelihood(const ClickOutcome& outcome,
                        const PhotonPattern& pattern,
                        const SiteDetectors& detectors) {
  if (outcome.stations != pattern.stations)
    throw std::invalid_argument("click_likelihood: station count mismatch");
  double lik = 1.0;
  for (int s = 0; s < pattern.station_count(); ++s) {
    const DetectorModel& det = detectors.stations[s];
    lik *= response(outcome.h_left[s], pattern.h_left[s], det);
    lik *= response(outcome.v_left[s], pattern.v_left[s], det);
    lik *= response(outcome.v_right[s], pattern.v_right[s], det);
    lik *= response(outcome.h_right[s], pattern.h_right[s], det);
  }
  lik *= response(outcome.a_h, pattern.a_h, detectors.end_a);
  lik *= response(outcome.a_v, pattern.a_v, detectors.end_a);
  lik *= response(outcome.b_v, pattern.b_v, detectors.end_b);
  lik *= response(outcome.b_h, pattern.b_h, detectors.end_b);
  return lik;
}

namespace {

// Per-4-tuple likelihood tables for the hot pattern sum.
struct LikelihoodTables {
  int base;
  std::vector<double> station_ps;  // both swap signatures, summed
  std::vector<double> end_anti;    // A/B strings anti-correlated
  std::vector<double> end_corr;    // A/B strings correlated

  LikelihoodTables(int n_max, const DetectorModel& det, bool squash)
      : base(n_max + 1) {
    const int tuples = base * base * base * base;
    station_ps.resize(tuples);
    end_anti.resize(tuples);
    end_corr.resize(tuples);
    std::vector<double> pc(base), pn(base);
    for (int n = 0; n < base; ++n) {
      pc[n] = prob_click(n, det);
      pn[n] = prob_no_click(n, det);
    }
    for (int i = 0; i < base; ++i)
      for (int j = 0; j < base; ++j)
        for (int k = 0; k < base; ++k)
          for (int l = 0; l < base; ++l) {
            const int idx = ((i * base + j) * base + k) * base + l;
            station_ps[idx] =
                pc[i] * pn[j] * pc[k] * pn[l] + pn[i] * pc[j] * pn[k] * pc[l];
            // End strings are (H, V) per side; tuple order is (ah, av, bv, bh).
            const int ah = i, av = j, bv = k, bh = l;
            const double a10 = pc[ah] * pn[av], a01 = pn[ah] * pc[av];
            const double b10 = pc[bh] * pn[bv], b01 = pn[bh] * pc[bv];
            double anti = a10 * b01 + a01 * b10;
            double corr = a10 * b10 + a01 * b01;
            if (squash) {
              const double a11 = pc[ah] * pc[av], b11 = pc[bh] * pc[bv];
              const double shared =
                  0.5 * (a11 * (b01 + b10 + b11) + b11 * (a10 + a01));
              anti += shared;
              corr += shared;
            }
            end_anti[idx] = anti;
            end_corr[idx] = corr;
          }
  }
};

}  // namespace

VisibilityProfile VisibilityProfile::compute(int stations, int n_max,
                                             const DetectorModel& det,
                                             const VisibilityOptions& opts) {
  VisibilityProfile profile;
  profile.stations_ = stations;
  profile.n_max_ = n_max;
  const int pair_cap =
      opts.max_pairs >= 0 ? opts.max_pairs : 4 * stations * n_max;
  profile.max_mass_.assign(pair_cap + 1, 0.0);
  profile.min_mass_.assign(pair_cap + 1, 0.0);

  const AmplitudeEvaluator eval(stations, n_max, opts.angles);
  const LikelihoodTables tables(n_max, det, opts.squash);
  const int base = n_max + 1;

  const int n_blocks = base * base;
  std::vector<std::vector<double>> block_max(n_blocks), block_min(n_blocks);

  auto run_block = [&](int blk) {
    auto& maxm = block_max[blk];
    auto& minm = block_min[blk];
    maxm.assign(pair_cap + 1, 0.0);
    minm.assign(pair_cap + 1, 0.0);
    const int first_h = blk / base, first_v = blk % base;
    for_each_pattern(
        stations, n_max,
        [&](const PhotonPattern& pat) {
          double station_l = 1.0;
          for (int s = 0; s < pat.station_count(); ++s) {
            station_l *= tables.station_ps[eval.tuple_index(
                pat.h_left[s], pat.v_left[s], pat.v_right[s], pat.h_right[s])];
            if (station_l == 0.0) return;
          }
          const int end_idx =
              eval.tuple_index(pat.a_h, pat.a_v, pat.b_v, pat.b_h);
          const double anti = tables.end_anti[end_idx];
          const double corr = tables.end_corr[end_idx];
          if (anti == 0.0 && corr == 0.0) return;
          const auto red = eval.reduced(pat);
          if (red.value.real() == 0.0 && red.value.imag() == 0.0) return;
          const double weight = std::norm(red.value) * station_l;
          maxm[red.pairs] += weight * anti;
          minm[red.pairs] += weight * corr;
        },
        first_h, first_v, opts.max_pairs);
  };

  int n_threads = opts.threads > 0
                      ? opts.threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  n_threads = std::min(n_threads, n_blocks);
  if (n_threads == 1) {
    for (int blk = 0; blk < n_blocks; ++blk) run_block(blk);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back([&] {
        for (int blk = next.fetch_add(1); blk < n_blocks;
             blk = next.fetch_add(1))
          run_block(blk);
      });
    for (auto& th : pool) th.join();
  }
  // Fixed-order reduction keeps results identical across thread counts.
  for (int blk = 0; blk < n_blocks; ++blk)
    for (int p = 0; p <= pair_cap; ++p) {
      profile.max_mass_[p] += block_max[blk][p];
      profile.min_mass_[p] += block_min[blk][p];
    }
  return profile;
}

VisibilityResult VisibilityProfile::at(double chi) const {
  if (chi < 0.0 || chi >= 1.0)
    throw std::invalid_argument("chi must be in [0, 1)");
  const double t2 = std::tanh(chi) * std::tanh(chi);
  const double vac = std::pow(std::cosh(chi), -8.0 * stations_);
  VisibilityResult res;
  double weight = vac;
  for (std::size_t p = 0; p < max_mass_.size(); ++p) {
    res.max_count += weight * max_mass_[p];
    res.min_count += weight * min_mass_[p];
    weight *= t2;
  }
  const double total = res.max_count + res.min_count;
  if (total <= 0.0)
    throw std::runtime_error(
        "visibility: post-selected probability mass underflowed to zero");
  res.visibility = (res.max_count - res.min_count) / total;
  res.truncation_bound = std::pow(t2, n_max_ + 1);
  return res;
}

double VisibilityProfile::qber(double chi) const {
  return (1.0 - at(chi).visibility) / 2.0;
}

VisibilityResult visibility(const ResourceParams& params, const Topology& topo,
                            int n_max, const VisibilityOptions& opts) {
  params.validate();
  topo.validate();
  const auto profile = VisibilityProfile::compute(
      topo.stations, n_max, detector_for(params, topo), opts);
  return profile.at(params.chi);
}

double qber(const ResourceParams& params, const Topology& topo, int n_max,
            const VisibilityOptions& opts) {
  return (1.0 - visibility(params, topo, n_max, opts).visibility) / 2.0;
}

double coincidence_prob(const std::array<std::uint8_t, 4>& end_bits,
                        const ClickOutcome& station_outcome,
                        const ResourceParams& params, const Topology& topo,
                        const AnalyzerAngles& angles, int n_max) {
  params.validate();
  topo.validate();
  if (station_outcome.stations != topo.stations)
    throw std::invalid_argument("coincidence_prob: station count mismatch");
  if (!station_outcome.station_post_selected())
    throw std::invalid_argument(
        "coincidence_prob: station outcome fails the both-sides-click rule");

  ClickOutcome outcome = station_outcome;
  outcome.a_h = end_bits[0];
  outcome.a_v = end_bits[1];
  outcome.b_v = end_bits[2];
  outcome.b_h = end_bits[3];

  const auto site =
      SiteDetectors::uniform(detector_for(params, topo), topo.stations);
  const AmplitudeEvaluator eval(topo.stations, n_max, angles);

  // Station-only likelihood reuses the full product with silent end bits and
  // unit end response: split the product manually instead.
  double numer = 0.0, denom = 0.0;
  for_each_pattern(topo.stations, n_max, [&](const PhotonPattern& pat) {
    double station_l = 1.0;
    for (int s = 0; s < pat.station_count(); ++s) {
      const DetectorModel& det = site.stations[s];
      station_l *= response(station_outcome.h_left[s], pat.h_left[s], det);
      station_l *= response(station_outcome.v_left[s], pat.v_left[s], det);
      station_l *= response(station_outcome.v_right[s], pat.v_right[s], det);
      station_l *= response(station_outcome.h_right[s], pat.h_right[s], det);
      if (station_l == 0.0) return;
    }
    const auto amp = eval.amplitude(pat, params.chi);
    const double p_pattern = std::norm(amp);
    if (p_pattern == 0.0) return;
    double end_l = response(outcome.a_h, pat.a_h, site.end_a);
    end_l *= response(outcome.a_v, pat.a_v, site.end_a);
    end_l *= response(outcome.b_v, pat.b_v, site.end_b);
    end_l *= response(outcome.b_h, pat.b_h, site.end_b);
    denom += p_pattern * station_l;
    numer += p_pattern * station_l * end_l;
  });
  if (denom <= 0.0)
    throw std::runtime_error(
        "coincidence_prob: station outcome has zero probability at this "
        "cutoff (raise n_max or pick a reachable outcome)");
  return numer / denom;
}

}  // namespace cesqkd
