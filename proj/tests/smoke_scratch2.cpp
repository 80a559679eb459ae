// Last convention hypotheses for the N=2 crossing gap.
#include <cmath>
#include <complex>
#include <cstdio>
#include <vector>

#include "cesqkd/amplitude.h"
#include "cesqkd/coincidence.h"

using namespace cesqkd;

namespace {

// anti/corr masses vs chi with a pluggable station post-selection rule.
struct Masses {
  std::vector<double> anti, corr;
  double qber(double chi) const {
    const double t2 = std::tanh(chi) * std::tanh(chi);
    double a = 0, c = 0, w = 1;
    for (std::size_t p = 0; p < anti.size(); ++p) {
      a += w * anti[p];
      c += w * corr[p];
      w *= t2;
    }
    return c / (a + c);
  }
};

enum class StationRule { kBothSignatures, kSameSignatureOnly };

Masses masses(int stations, int n_max, const DetectorModel& det,
              const AnalyzerAngles& angles, StationRule rule) {
  AmplitudeEvaluator eval(stations, n_max, angles);
  const int base = n_max + 1;
  std::vector<double> pc(base), pn(base);
  for (int n = 0; n < base; ++n) {
    pc[n] = prob_click(n, det);
    pn[n] = prob_no_click(n, det);
  }
  const int tuples = base * base * base * base;
  std::vector<double> sig_a(tuples), sig_b(tuples), e_anti(tuples),
      e_corr(tuples);
  for (int i = 0; i < base; ++i)
    for (int j = 0; j < base; ++j)
      for (int k = 0; k < base; ++k)
        for (int l = 0; l < base; ++l) {
          const int idx = ((i * base + j) * base + k) * base + l;
          sig_a[idx] = pc[i] * pn[j] * pc[k] * pn[l];
          sig_b[idx] = pn[i] * pc[j] * pn[k] * pc[l];
          const int ah = i, av = j, bv = k, bh = l;
          const double a10 = pc[ah] * pn[av], a01 = pn[ah] * pc[av];
          const double b10 = pc[bh] * pn[bv], b01 = pn[bh] * pc[bv];
          e_anti[idx] = a10 * b01 + a01 * b10;
          e_corr[idx] = a10 * b10 + a01 * b01;
        }
  Masses m;
  m.anti.assign(4 * stations * n_max + 1, 0.0);
  m.corr.assign(4 * stations * n_max + 1, 0.0);
  for_each_pattern(stations, n_max, [&](const PhotonPattern& pat) {
    double ps = 0.0;
    if (rule == StationRule::kBothSignatures) {
      ps = 1.0;
      for (int s = 0; s < pat.station_count(); ++s) {
        const int idx = eval.tuple_index(pat.h_left[s], pat.v_left[s],
                                         pat.v_right[s], pat.h_right[s]);
        ps *= sig_a[idx] + sig_b[idx];
        if (ps == 0.0) return;
      }
    } else {
      double all_a = 1.0, all_b = 1.0;
      for (int s = 0; s < pat.station_count(); ++s) {
        const int idx = eval.tuple_index(pat.h_left[s], pat.v_left[s],
                                         pat.v_right[s], pat.h_right[s]);
        all_a *= sig_a[idx];
        all_b *= sig_b[idx];
      }
      ps = all_a + all_b;
      if (ps == 0.0) return;
    }
    const int eidx = eval.tuple_index(pat.a_h, pat.a_v, pat.b_v, pat.b_h);
    if (e_anti[eidx] == 0.0 && e_corr[eidx] == 0.0) return;
    const auto red = eval.reduced(pat);
    const double w = std::norm(red.value) * ps;
    m.anti[red.pairs] += w * e_anti[eidx];
    m.corr[red.pairs] += w * e_corr[eidx];
  });
  return m;
}

double crossing(const Masses& m, double cutoff) {
  double lo = 0.02, hi = 0.5;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (m.qber(mid) < cutoff ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

int main() {
  const double a0 = std::pow(10.0, -0.4);
  const DetectorModel fig2{0.4 * a0, 1e-5};
  const AnalyzerAngles zz{0, 0};
  const AnalyzerAngles xx{M_PI / 2, M_PI / 2};

  auto m_zz = masses(2, 2, fig2, zz, StationRule::kBothSignatures);
  auto m_xx = masses(2, 2, fig2, xx, StationRule::kBothSignatures);
  auto m_same = masses(2, 2, fig2, zz, StationRule::kSameSignatureOnly);
  std::printf("N=2 n_max=2 crossings: zz=%.4f xx=%.4f same-sig=%.4f\n",
              crossing(m_zz, 0.11), crossing(m_xx, 0.11),
              crossing(m_same, 0.11));
  return 0;
}
