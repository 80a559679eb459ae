#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <vector>

namespace cesqkd {

/// Polarizer-rotator angles at the two end stations, radians.
/// The closed form is singular at an angle of exactly pi (mod 2pi); angles
/// are reduced to (-pi, pi) and pi is rejected.
struct AnalyzerAngles {
  double alpha_t = 0.0;  ///< A's rotator
  double delta_t = 0.0;  ///< B's rotator
};

/// Ideal-detection occupation multi-index for a chain with N swapping setups.
///
/// Station entries are indexed 0..2N-2 in the closed form's own order:
/// indices 0..N-1 carry the source-side binomial sums, N..2N-2 the auxiliary
/// swap factors. Per station the four counts are the H/V detectors on the
/// left output arm and the V/H detectors on the right output arm. End counts
/// are A's H/V detectors and B's V/H detectors.
struct PhotonPattern {
  int stations = 1;  ///< N
  std::vector<int> h_left, v_left, v_right, h_right;  ///< i, j, k, l strings
  int a_h = 0, a_v = 0;  ///< i', j'
  int b_v = 0, b_h = 0;  ///< k', l'

  int station_count() const { return 2 * stations - 1; }
  int total_photons() const;

  static PhotonPattern zero(int stations);
  /// Convenience for the single-setup geometry.
  static PhotonPattern single(int i, int j, int k, int l,
                              int ah, int av, int bv, int bh);
};

/// Evaluates the closed-form amplitude for patterns bounded by a per-entry
/// cutoff. Construction precomputes every combinatorial table the per-pattern
/// evaluation needs, so repeated calls are cheap; instances are immutable and
/// safe to share across threads.
class AmplitudeEvaluator {
 public:
  AmplitudeEvaluator(int stations, int n_max, const AnalyzerAngles& angles);

  /// chi-independent reduced value: the full amplitude is
  ///   reduced.value * tanh(chi)^reduced.pairs / cosh(chi)^{4N}.
  struct Reduced {
    std::complex<double> value{0.0, 0.0};
    int pairs = 0;
  };
  Reduced reduced(const PhotonPattern& pattern) const;

  std::complex<double> amplitude(const PhotonPattern& pattern, double chi) const;

  int stations() const { return stations_; }
  int n_max() const { return n_max_; }
  const AnalyzerAngles& angles() const { return angles_; }

  /// Flat index of an end-count or station-count 4-tuple in the tables below.
  int tuple_index(int a, int b, int c, int d) const;

 private:
  std::complex<double> end_factor(int ah, int av, int bv, int bh,
                                  int a_sum, int b_sum) const;

  int stations_ = 1;
  int n_max_ = 3;
  AnalyzerAngles angles_{};
  int base_ = 4;       // n_max + 1
  int chain_max_ = 6;  // 2 * n_max

  std::vector<double> station_prefactor_;     // per source-side 4-tuple
  std::vector<double> aux_prefactor_;         // per auxiliary 4-tuple
  std::vector<std::int64_t> split_table_;     // signed_split_sum(a,b,m)
  std::vector<std::int64_t> omega_table_;     // omega(m; i_aux, l_aux)
  std::vector<std::complex<double>> end_table_;  // end factor per (tuple,a,b)

  std::int64_t split(int a, int b, int m) const;
  std::int64_t omega_at(int m, int i_aux, int l_aux) const;
};

/// One-shot evaluation of the closed-form amplitude.
std::complex<double> amplitude(const PhotonPattern& pattern,
                               const AnalyzerAngles& angles, double chi,
                               int n_max);

namespace detail {

/// Chain bookkeeping shared by the evaluator and the enumerator: offsets of
/// the per-station split sums and the interval of admissible first-station
/// splits implied by the Kronecker deltas.
struct ChainInfo {
  std::vector<int> c, d;      // H- and V-chain offsets, per source-side station
  int m_lo = 0, m_hi = 0;     // first-station H-split interval
  int w_lo = 0, w_hi = 0;     // first-station V-split interval
  int s1 = 0;                 // first-station total count
  bool feasible = false;
  static ChainInfo build(const PhotonPattern& pattern);
};

}  // namespace detail

/// Enumerates all patterns with every entry <= n_max whose Kronecker-delta
/// constraints are satisfiable, in deterministic lexicographic order of
/// (station tuples in index order, then end counts). Entries are propagated
/// through the delta constraints, so infeasible end counts are never visited.
///
/// The callback receives a reused pattern buffer; copy it if it must outlive
/// the call. When first_h/first_v are >= 0 the traversal is restricted to
/// patterns whose first station has those H-left/V-left counts, which
/// partitions the space for parallel consumption.
template <typename F>
void for_each_pattern(int stations, int n_max, F&& fn,
                      int first_h = -1, int first_v = -1,
                      int max_pairs = -1);

/// Materialized enumeration (small cutoffs only).
std::vector<PhotonPattern> enumerate_patterns(int stations, int n_max);

// --- template implementation -------------------------------------------

namespace detail {

template <typename F>
void visit_patterns(int stations, int n_max, F& fn, int first_h, int first_v,
                    int max_pairs) {
  const int n_st = 2 * stations - 1;
  PhotonPattern pat;
  pat.stations = stations;
  pat.h_left.assign(n_st, 0);
  pat.v_left.assign(n_st, 0);
  pat.v_right.assign(n_st, 0);
  pat.h_right.assign(n_st, 0);

  // Per-station H/V arm sums, filled as the recursion descends.
  std::vector<int> hl(n_st, 0), vv(n_st, 0);

  const int pair_cap = max_pairs >= 0 ? max_pairs : 4 * stations * n_max;

  // Recursive lambda over station index; at the end stage the deltas pin
  // k'+l' and restrict (i', j') to values with an admissible chain split.
  auto rec = [&](auto&& self, int s, int primary_pairs, int aux_sum) -> void {
    if (s == n_st) {
      if (aux_sum > primary_pairs) return;  // ends would need negative photons
      // Chain offsets for source-side stations 0..N-1.
      const int n_src = stations;
      int c_last = 0, d_last = 0;
      int m_lo = 0, m_hi = hl[0], w_lo = 0, w_hi = vv[0];
      {
        int c = 0, d = 0;
        for (int p = 1; p < n_src; ++p) {
          c += hl[p] - hl[n_src - 1 + p];
          d += vv[p] - vv[n_src - 1 + p];
          m_lo = std::max(m_lo, -c);
          m_hi = std::min(m_hi, hl[p] - c);
          w_lo = std::max(w_lo, -d);
          w_hi = std::min(w_hi, vv[p] - d);
        }
        c_last = c;
        d_last = d;
      }
      if (m_lo > m_hi || w_lo > w_hi) return;
      const int s1 = hl[0] + vv[0];
      for (int ah = 0; ah <= n_max; ++ah) {
        for (int av = 0; av <= n_max; ++av) {
          const int k_split = ah + av - c_last - d_last;  // m1 + w1
          if (k_split < m_lo + w_lo || k_split > m_hi + w_hi) continue;
          const int ends_b = s1 - k_split;  // k' + l'
          if (ends_b < 0 || ends_b > 2 * n_max) continue;
          if (ah + av + ends_b != primary_pairs - aux_sum) continue;
          pat.a_h = ah;
          pat.a_v = av;
          const int bv_lo = std::max(0, ends_b - n_max);
          const int bv_hi = std::min(n_max, ends_b);
          for (int bv = bv_lo; bv <= bv_hi; ++bv) {
            pat.b_v = bv;
            pat.b_h = ends_b - bv;
            fn(static_cast<const PhotonPattern&>(pat));
          }
        }
      }
      return;
    }
    const bool primary = s < stations;
    const bool fixed_first = (s == 0 && first_h >= 0 && first_v >= 0);
    const int i_lo = fixed_first ? first_h : 0;
    const int i_hi = fixed_first ? first_h : n_max;
    const int j_lo = fixed_first ? first_v : 0;
    const int j_hi = fixed_first ? first_v : n_max;
    for (int i = i_lo; i <= i_hi; ++i) {
      pat.h_left[s] = i;
      for (int j = j_lo; j <= j_hi; ++j) {
        pat.v_left[s] = j;
        for (int k = 0; k <= n_max; ++k) {
          pat.v_right[s] = k;
          for (int l = 0; l <= n_max; ++l) {
            pat.h_right[s] = l;
            const int sum = i + j + k + l;
            if (primary) {
              if (primary_pairs + sum > pair_cap) continue;
            } else {
              if (aux_sum + sum > primary_pairs) continue;
            }
            hl[s] = i + l;
            vv[s] = j + k;
            self(self, s + 1, primary_pairs + (primary ? sum : 0),
                 aux_sum + (primary ? 0 : sum));
          }
        }
      }
    }
  };
  rec(rec, 0, 0, 0);
}

}  // namespace detail

template <typename F>
void for_each_pattern(int stations, int n_max, F&& fn,
                      int first_h, int first_v, int max_pairs) {
  detail::visit_patterns(stations, n_max, fn, first_h, first_v, max_pairs);
}

}  // namespace cesqkd
