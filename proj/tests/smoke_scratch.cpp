// Temporary scratch harness used while bringing the library up.
#include <cmath>
#include <complex>
#include <cstdio>
#include <vector>

#include "cesqkd/amplitude.h"
#include "cesqkd/resources.h"

using namespace cesqkd;

namespace {

struct Conv {
  bool end_squash = false;
};

// Per-pair-count anti/corr masses with the singlet-signature herald rule.
struct Masses {
  std::vector<double> anti, corr;
  int stations;
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

Masses masses(int stations, int n_max, const DetectorModel& det,
              const AnalyzerAngles& angles, const Conv& conv) {
  AmplitudeEvaluator eval(stations, n_max, angles);
  const int base = n_max + 1;
  std::vector<double> pc(base), pn(base);
  for (int n = 0; n < base; ++n) {
    pc[n] = prob_click(n, det);
    pn[n] = prob_no_click(n, det);
  }
  const int tuples = base * base * base * base;
  std::vector<double> st_ps(tuples), e_anti(tuples), e_corr(tuples);
  for (int i = 0; i < base; ++i)
    for (int j = 0; j < base; ++j)
      for (int k = 0; k < base; ++k)
        for (int l = 0; l < base; ++l) {
          const int idx = ((i * base + j) * base + k) * base + l;
          st_ps[idx] = pc[i] * pn[j] * pc[k] * pn[l] +
                       pn[i] * pc[j] * pn[k] * pc[l];
          const int ah = i, av = j, bv = k, bh = l;
          double a10 = pc[ah] * pn[av], a01 = pn[ah] * pc[av];
          double b10 = pc[bh] * pn[bv], b01 = pn[bh] * pc[bv];
          if (conv.end_squash) {
            a10 += 0.5 * pc[ah] * pc[av];
            a01 += 0.5 * pc[ah] * pc[av];
            b10 += 0.5 * pc[bh] * pc[bv];
            b01 += 0.5 * pc[bh] * pc[bv];
          }
          e_anti[idx] = a10 * b01 + a01 * b10;
          e_corr[idx] = a10 * b10 + a01 * b01;
        }
  Masses m;
  m.stations = stations;
  m.anti.assign(4 * stations * n_max + 1, 0.0);
  m.corr.assign(4 * stations * n_max + 1, 0.0);
  for_each_pattern(stations, n_max, [&](const PhotonPattern& pat) {
    double stl = 1.0;
    for (int s = 0; s < pat.station_count(); ++s) {
      stl *= st_ps[eval.tuple_index(pat.h_left[s], pat.v_left[s],
                                    pat.v_right[s], pat.h_right[s])];
      if (stl == 0.0) return;
    }
    const int eidx = eval.tuple_index(pat.a_h, pat.a_v, pat.b_v, pat.b_h);
    if (e_anti[eidx] == 0.0 && e_corr[eidx] == 0.0) return;
    const auto red = eval.reduced(pat);
    const double w = std::norm(red.value) * stl;
    m.anti[red.pairs] += w * e_anti[eidx];
    m.corr[red.pairs] += w * e_corr[eidx];
  });
  return m;
}

double crossing(const Masses& m, double cutoff, double lo, double hi) {
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (m.qber(mid) < cutoff ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

int main() {
  const AnalyzerAngles zz{0, 0};
  const double a0 = std::pow(10.0, -0.4);
  const DetectorModel fig2{0.4 * a0, 1e-5};
  const DetectorModel perfect{a0, 0.0};

  for (bool endsq : {false, true}) {
    std::printf("=== end_squash=%d ===\n", endsq);
    const Conv conv{endsq};
    {
      const auto m1 = masses(1, 3, fig2, zz, conv);
      std::printf("N=1 fig2: Q(0.2)=%.5f crossing(0.11)=%.4f\n", m1.qber(0.2),
                  crossing(m1, 0.11, 0.05, 0.5));
      const auto p1 = masses(1, 3, perfect, zz, conv);
      std::printf("N=1 perf: Q(0.2)=%.5f\n", p1.qber(0.2));
    }
    {
      const auto m2 = masses(2, 3, fig2, zz, conv);
      std::printf("N=2 fig2: Q(0.08)=%.5f crossing(0.11)=%.4f\n", m2.qber(0.08),
                  crossing(m2, 0.11, 0.02, 0.5));
      const auto p2 = masses(2, 2, perfect, zz, conv);
      std::printf("N=2 perf (n_max=2): Q(0.10)=%.5f\n", p2.qber(0.10));
    }
  }
  return 0;
}
