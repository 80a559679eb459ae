#include "cesqkd/oracle.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "cesqkd/combinatorics.h"
#include "cesqkd/coincidence.h"

namespace cesqkd {
namespace oracle {

namespace {

using Complex = std::complex<double>;
using TermMap = std::unordered_map<std::uint64_t, Complex>;

TruncatedState from_map(TermMap&& map) {
  TruncatedState state;
  state.terms.reserve(map.size());
  for (auto& [key, amp] : map)
    if (amp != Complex{0.0, 0.0}) state.terms.emplace_back(key, amp);
  std::sort(state.terms.begin(), state.terms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return state;
}

int occ_of(std::uint64_t key, int mode) { return int(key >> (8 * mode)) & 0xff; }

std::uint64_t with_occ(std::uint64_t key, int mode, int value) {
  key &= ~(std::uint64_t{0xff} << (8 * mode));
  return key | (std::uint64_t(value) << (8 * mode));
}

/// Substitutes the creation operators of two modes by the unitary combination
///   a' = u00 a + u01 b,  b' = u10 a + u11 b
/// (a, b the operators of modes m1, m2 in their own slots).
TruncatedState apply_two_mode(const TruncatedState& in, int m1, int m2,
                              Complex u00, Complex u01, Complex u10,
                              Complex u11) {
  TermMap out;
  out.reserve(in.terms.size() * 4);
  std::vector<double> sqrt_fact(64);
  for (int n = 0; n < 64; ++n) sqrt_fact[n] = std::exp(0.5 * log_factorial(n));

  for (const auto& [key, amp] : in.terms) {
    const int na = occ_of(key, m1);
    const int nb = occ_of(key, m2);
    const Complex base = amp / (sqrt_fact[na] * sqrt_fact[nb]);
    // (u00 A + u01 B)^na (u10 A + u11 B)^nb expanded binomially.
    for (int p = 0; p <= na; ++p) {
      const Complex pa = double(binomial(na, p)) * std::pow(u00, p) *
                         std::pow(u01, na - p);
      if (pa == Complex{0.0, 0.0}) continue;
      for (int q = 0; q <= nb; ++q) {
        const Complex pb = double(binomial(nb, q)) * std::pow(u10, q) *
                           std::pow(u11, nb - q);
        if (pb == Complex{0.0, 0.0}) continue;
        const int n1 = p + q, n2 = na + nb - p - q;
        const std::uint64_t new_key = with_occ(with_occ(key, m1, n1), m2, n2);
        out[new_key] += base * pa * pb * sqrt_fact[n1] * sqrt_fact[n2];
      }
    }
  }
  return from_map(std::move(out));
}

}  // namespace

std::uint64_t TruncatedState::pack(const std::array<int, 8>& occ) {
  std::uint64_t key = 0;
  for (int m = 0; m < 8; ++m) key |= std::uint64_t(occ[m]) << (8 * m);
  return key;
}

std::array<int, 8> TruncatedState::unpack(std::uint64_t key) {
  std::array<int, 8> occ{};
  for (int m = 0; m < 8; ++m) occ[m] = occ_of(key, m);
  return occ;
}

double TruncatedState::norm_squared() const {
  double n = 0.0;
  for (const auto& [key, amp] : terms) n += std::norm(amp);
  return n;
}

Complex TruncatedState::amplitude_at(std::uint64_t key) const {
  auto it = std::lower_bound(
      terms.begin(), terms.end(), key,
      [](const auto& term, std::uint64_t k) { return term.first < k; });
  if (it == terms.end() || it->first != key) return {0.0, 0.0};
  return it->second;
}

TruncatedState build_pdc_state(double chi, int n_max) {
  if (n_max < 1) throw std::invalid_argument("build_pdc_state: n_max < 1");
  if (chi < 0.0 || chi >= 1.0)
    throw std::invalid_argument("build_pdc_state: chi outside [0, 1)");
  const double t = std::tanh(chi);
  const double inv_cosh = 1.0 / std::cosh(chi);
  // Pair-mode slots of the four squeezers.
  constexpr int kPairs[4][2] = {{0, 2}, {1, 3}, {4, 6}, {5, 7}};

  TermMap map;
  std::array<int, 4> n{};
  for (n[0] = 0; n[0] <= n_max; ++n[0])
    for (n[1] = 0; n[1] <= n_max; ++n[1])
      for (n[2] = 0; n[2] <= n_max; ++n[2])
        for (n[3] = 0; n[3] <= n_max; ++n[3]) {
          const int total = n[0] + n[1] + n[2] + n[3];
          if (t == 0.0 && total > 0) continue;
          std::array<int, 8> occ{};
          for (int s = 0; s < 4; ++s) {
            occ[kPairs[s][0]] = n[s];
            occ[kPairs[s][1]] = n[s];
          }
          // Each squeezer term carries (i tanh chi)^n / cosh chi.
          Complex amp = std::pow(Complex{0.0, 1.0}, total) *
                        std::pow(t, total) * std::pow(inv_cosh, 4.0);
          map[TruncatedState::pack(occ)] = amp;
        }
  return from_map(std::move(map));
}

TruncatedState evolve(const TruncatedState& source,
                      const AnalyzerAngles& angles) {
  const double r2 = 1.0 / std::sqrt(2.0);
  // Station beam splitter per polarization: left/right outputs land back in
  // slots 2/4 (H) and 3/5 (V).
  TruncatedState s = apply_two_mode(source, 2, 4, r2, r2, r2, -r2);
  s = apply_two_mode(s, 3, 5, r2, r2, r2, -r2);
  // End polarizer rotators.
  const Complex ca{std::cos(angles.alpha_t / 2.0), 0.0};
  const Complex sa{0.0, std::sin(angles.alpha_t / 2.0)};
  s = apply_two_mode(s, 0, 1, ca, sa, sa, ca);
  const Complex cd{std::cos(angles.delta_t / 2.0), 0.0};
  const Complex sd{0.0, std::sin(angles.delta_t / 2.0)};
  s = apply_two_mode(s, 6, 7, cd, sd, sd, cd);
  return s;
}

double pattern_probability(const TruncatedState& evolved,
                           const PhotonPattern& pattern) {
  if (pattern.stations != 1)
    throw std::invalid_argument("oracle covers the single-setup geometry only");
  const std::array<int, 8> occ{pattern.a_h,        pattern.a_v,
                               pattern.h_left[0],  pattern.v_left[0],
                               pattern.h_right[0], pattern.v_right[0],
                               pattern.b_h,        pattern.b_v};
  return std::norm(evolved.amplitude_at(TruncatedState::pack(occ)));
}

std::array<double, 256> evolve_and_measure(const TruncatedState& source,
                                           const AnalyzerAngles& angles,
                                           const DetectorModel& det) {
  const TruncatedState evolved = evolve(source, angles);
  const double norm = evolved.norm_squared();
  if (norm <= 0.0)
    throw std::runtime_error("evolve_and_measure: empty state");

  // Detector order for outcome bits: A_H, A_V, st_HL, st_VL, st_VR, st_HR,
  // B_V, B_H mapped to mode slots.
  constexpr int kDetectorSlot[8] = {0, 1, 2, 3, 5, 4, 7, 6};

  std::array<double, 256> table{};
  std::array<double, 256> buf;
  for (const auto& [key, amp] : evolved.terms) {
    buf[0] = std::norm(amp);
    int size = 1;
    for (int d = 0; d < 8; ++d) {
      const double pc = prob_click(occ_of(key, kDetectorSlot[d]), det);
      for (int o = 0; o < size; ++o) {
        buf[o + size] = buf[o] * pc;
        buf[o] *= 1.0 - pc;
      }
      size *= 2;
    }
    for (int o = 0; o < 256; ++o) table[o] += buf[o];
  }
  for (double& p : table) p /= norm;
  return table;
}

double table_visibility(const std::array<double, 256>& table) {
  double max_mass = 0.0, min_mass = 0.0;
  for (int o = 0; o < 256; ++o) {
    const bool st_hl = o & 4, st_vl = o & 8, st_vr = o & 16, st_hr = o & 32;
    const bool sig = (st_hl && st_vr && !st_vl && !st_hr) ||
                     (st_vl && st_hr && !st_hl && !st_vr);
    if (!sig) continue;
    const bool a_h = o & 1, a_v = o & 2, b_v = o & 64, b_h = o & 128;
    const bool a10 = a_h && !a_v, a01 = !a_h && a_v;
    const bool b10 = b_h && !b_v, b01 = !b_h && b_v;
    if ((a10 && b01) || (a01 && b10)) max_mass += table[o];
    if ((a10 && b10) || (a01 && b01)) min_mass += table[o];
  }
  if (max_mass + min_mass <= 0.0)
    throw std::runtime_error("table_visibility: no post-selected mass");
  return (max_mass - min_mass) / (max_mass + min_mass);
}

Comparison compare_closed_form(const std::vector<double>& chi_grid,
                               const std::vector<double>& angle_grid,
                               int n_max, const CompareOptions& opts) {
  Comparison cmp;
  constexpr double kFloor = 1e-26;  // absolute noise floor for cancelled terms
  const auto patterns = enumerate_patterns(1, n_max);

  DetectorModel closed_det = opts.det;
  closed_det.dark *= opts.closed_form_dark_scale;

  for (double chi : chi_grid) {
    const TruncatedState source = build_pdc_state(chi, 2 * n_max);
    for (double angle : angle_grid) {
      const AnalyzerAngles angles{angle, angle};
      const TruncatedState evolved = evolve(source, angles);
      const AmplitudeEvaluator eval(1, n_max, angles);

      // Per-pattern probabilities.
      std::vector<double> p_closed(patterns.size()), p_oracle(patterns.size());
      for (std::size_t i = 0; i < patterns.size(); ++i) {
        p_closed[i] = std::norm(eval.amplitude(patterns[i], chi));
        p_oracle[i] = pattern_probability(evolved, patterns[i]);
        const double dev = std::abs(p_closed[i] - p_oracle[i]) /
                           std::max({p_closed[i], p_oracle[i], kFloor});
        cmp.max_rel_dev_pattern = std::max(cmp.max_rel_dev_pattern, dev);
      }
      cmp.patterns_checked += static_cast<long>(patterns.size());

      // Coincidence ratios over the post-selected station signatures and all
      // end outcomes, both sides summed over the same pattern set.
      auto resp = [](std::uint8_t bit, int n, const DetectorModel& d) {
        return bit ? prob_click(n, d) : prob_no_click(n, d);
      };
      for (int sig = 0; sig < 2; ++sig) {
        ClickOutcome outcome = ClickOutcome::zero(1);
        outcome.h_left[0] = sig == 0;
        outcome.v_right[0] = sig == 0;
        outcome.v_left[0] = sig == 1;
        outcome.h_right[0] = sig == 1;
        for (int ends = 0; ends < 16; ++ends) {
          outcome.a_h = ends & 1;
          outcome.a_v = (ends >> 1) & 1;
          outcome.b_v = (ends >> 2) & 1;
          outcome.b_h = (ends >> 3) & 1;
          double num_c = 0.0, den_c = 0.0, num_o = 0.0, den_o = 0.0;
          for (std::size_t i = 0; i < patterns.size(); ++i) {
            const PhotonPattern& pat = patterns[i];
            auto accumulate = [&](const DetectorModel& d, double p_pattern,
                                  double& num, double& den) {
              double st = resp(outcome.h_left[0], pat.h_left[0], d) *
                          resp(outcome.v_left[0], pat.v_left[0], d) *
                          resp(outcome.v_right[0], pat.v_right[0], d) *
                          resp(outcome.h_right[0], pat.h_right[0], d);
              double end = resp(outcome.a_h, pat.a_h, d) *
                           resp(outcome.a_v, pat.a_v, d) *
                           resp(outcome.b_v, pat.b_v, d) *
                           resp(outcome.b_h, pat.b_h, d);
              den += p_pattern * st;
              num += p_pattern * st * end;
            };
            accumulate(closed_det, p_closed[i], num_c, den_c);
            accumulate(opts.det, p_oracle[i], num_o, den_o);
          }
          if (den_c <= 0.0 || den_o <= 0.0) continue;
          const double pc = num_c / den_c, po = num_o / den_o;
          const double dev = std::abs(pc - po) / std::max({pc, po, kFloor});
          cmp.max_rel_dev_coincidence =
              std::max(cmp.max_rel_dev_coincidence, dev);
        }
      }
    }
  }
  return cmp;
}

}  // namespace oracle
}  // namespace cesqkd
