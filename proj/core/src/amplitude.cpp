#include "cesqkd/amplitude.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cesqkd/combinatorics.h"

namespace cesqkd {

namespace {

constexpr int kMaxCutoff = 12;  // keeps every binomial inside int64

double reduce_angle(double angle) {
  double a = std::remainder(angle, 2.0 * M_PI);
  if (std::abs(std::cos(a / 2.0)) < 1e-12)
    throw std::domain_error(
        "analyzer angle at pi (mod 2pi) is outside the closed form's domain");
  return a;
}

// i^k for integer k >= 0.
std::complex<double> imaginary_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace

int PhotonPattern::total_photons() const {
  int total = a_h + a_v + b_v + b_h;
  for (int s = 0; s < station_count(); ++s)
    total += h_left[s] + v_left[s] + v_right[s] + h_right[s];
  return total;
}

PhotonPattern PhotonPattern::zero(int stations) {
  PhotonPattern p;
  p.stations = stations;
  p.h_left.assign(2 * stations - 1, 0);
  p.v_left.assign(2 * stations - 1, 0);
  p.v_right.assign(2 * stations - 1, 0);
  p.h_right.assign(2 * stations - 1, 0);
  return p;
}

PhotonPattern PhotonPattern::single(int i, int j, int k, int l,
                                    int ah, int av, int bv, int bh) {
  PhotonPattern p = zero(1);
  p.h_left[0] = i;
  p.v_left[0] = j;
  p.v_right[0] = k;
  p.h_right[0] = l;
  p.a_h = ah;
  p.a_v = av;
  p.b_v = bv;
  p.b_h = bh;
  return p;
}

namespace detail {

ChainInfo ChainInfo::build(const PhotonPattern& pat) {
  ChainInfo info;
  const int n_src = pat.stations;
  info.c.assign(n_src, 0);
  info.d.assign(n_src, 0);
  info.m_lo = 0;
  info.m_hi = pat.h_left[0] + pat.h_right[0];
  info.w_lo = 0;
  info.w_hi = pat.v_left[0] + pat.v_right[0];
  for (int p = 1; p < n_src; ++p) {
    const int aux = n_src - 1 + p;
    info.c[p] = info.c[p - 1] + (pat.h_left[p] + pat.h_right[p]) -
                (pat.h_left[aux] + pat.h_right[aux]);
    info.d[p] = info.d[p - 1] + (pat.v_left[p] + pat.v_right[p]) -
                (pat.v_left[aux] + pat.v_right[aux]);
    info.m_lo = std::max(info.m_lo, -info.c[p]);
    info.m_hi = std::min(info.m_hi, pat.h_left[p] + pat.h_right[p] - info.c[p]);
    info.w_lo = std::max(info.w_lo, -info.d[p]);
    info.w_hi = std::min(info.w_hi, pat.v_left[p] + pat.v_right[p] - info.d[p]);
  }
  info.s1 = pat.h_left[0] + pat.v_left[0] + pat.v_right[0] + pat.h_right[0];
  info.feasible = info.m_lo <= info.m_hi && info.w_lo <= info.w_hi;
  return info;
}

}  // namespace detail

AmplitudeEvaluator::AmplitudeEvaluator(int stations, int n_max,
                                       const AnalyzerAngles& angles)
    : stations_(stations), n_max_(n_max), angles_(angles) {
  if (stations < 1) throw std::invalid_argument("stations must be >= 1");
  if (n_max < 0 || n_max > kMaxCutoff)
    throw std::invalid_argument("n_max outside supported arithmetic range");
  angles_.alpha_t = reduce_angle(angles.alpha_t);
  angles_.delta_t = reduce_angle(angles.delta_t);
  base_ = n_max_ + 1;
  chain_max_ = 2 * n_max_;

  const int tuples = base_ * base_ * base_ * base_;
  station_prefactor_.resize(tuples);
  aux_prefactor_.resize(tuples);
  for (int a = 0; a <= n_max_; ++a)
    for (int b = 0; b <= n_max_; ++b)
      for (int c = 0; c <= n_max_; ++c)
        for (int d = 0; d <= n_max_; ++d) {
          const int sum = a + b + c + d;
          const double lf = log_factorial(a) + log_factorial(b) +
                            log_factorial(c) + log_factorial(d);
          const int idx = tuple_index(a, b, c, d);
          station_prefactor_[idx] = std::exp(-0.5 * (sum * M_LN2 + lf));
          aux_prefactor_[idx] = std::exp(0.5 * (lf - sum * M_LN2));
        }

  split_table_.resize(base_ * base_ * (chain_max_ + 1));
  for (int a = 0; a <= n_max_; ++a)
    for (int b = 0; b <= n_max_; ++b)
      for (int m = 0; m <= chain_max_; ++m)
        split_table_[(a * base_ + b) * (chain_max_ + 1) + m] =
            signed_split_sum(a, b, m);

  omega_table_.resize((chain_max_ + 1) * base_ * base_);
  for (int m = 0; m <= chain_max_; ++m)
    for (int i = 0; i <= n_max_; ++i)
      for (int l = 0; l <= n_max_; ++l)
        omega_table_[(m * base_ + i) * base_ + l] = omega(m, 0, i, l);

  const int ab = chain_max_ + 1;
  end_table_.resize(static_cast<std::size_t>(tuples) * ab * ab);
  for (int ah = 0; ah <= n_max_; ++ah)
    for (int av = 0; av <= n_max_; ++av)
      for (int bv = 0; bv <= n_max_; ++bv)
        for (int bh = 0; bh <= n_max_; ++bh) {
          const std::size_t t = tuple_index(ah, av, bv, bh);
          for (int a = 0; a <= chain_max_; ++a)
            for (int b = 0; b <= chain_max_; ++b)
              end_table_[(t * ab + a) * ab + b] = end_factor(ah, av, bv, bh, a, b);
        }
}

int AmplitudeEvaluator::tuple_index(int a, int b, int c, int d) const {
  return ((a * base_ + b) * base_ + c) * base_ + d;
}

std::int64_t AmplitudeEvaluator::split(int a, int b, int m) const {
  if (m < 0 || m > chain_max_) return 0;
  return split_table_[(a * base_ + b) * (chain_max_ + 1) + m];
}

std::int64_t AmplitudeEvaluator::omega_at(int m, int i_aux, int l_aux) const {
  if (m < 0 || m > chain_max_) return 0;
  return omega_table_[(m * base_ + i_aux) * base_ + l_aux];
}

// The analyzer-rotation factor of the closed form: everything that depends on
// the end counts, the last source-side V split (a_sum) and the first-station
// V remainder (b_sum). Factorials are assembled in the log domain; powers of
// i and the tangent signs are tracked as a unit phase.
std::complex<double> AmplitudeEvaluator::end_factor(int ah, int av, int bv,
                                                    int bh, int a_sum,
                                                    int b_sum) const {
  const double tan_a = std::tan(angles_.alpha_t / 2.0);
  const double cos_a = std::cos(angles_.alpha_t / 2.0);
  const double tan_d = std::tan(angles_.delta_t / 2.0);
  const double cos_d = std::cos(angles_.delta_t / 2.0);
  const double log_abs_tan_a = tan_a == 0.0 ? 0.0 : std::log(std::abs(tan_a));
  const double log_abs_tan_d = tan_d == 0.0 ? 0.0 : std::log(std::abs(tan_d));

  const double base_log = log_factorial(a_sum) + log_factorial(b_sum) +
                          0.5 * (log_factorial(av) + log_factorial(bv) -
                                 log_factorial(ah) - log_factorial(bh));

  std::complex<double> sum{0.0, 0.0};
  for (int na = 0; na <= std::min(av, a_sum); ++na) {
    const int e_alpha = a_sum + av - 2 * na;  // power of i*tan(alpha/2)
    if (tan_a == 0.0 && e_alpha > 0) continue;
    const int q_alpha = ah + av - 2 * na;     // power of cos(alpha/2)
    for (int nd = 0; nd <= std::min(bv, b_sum); ++nd) {
      const int e_delta = bv + b_sum - 2 * nd;
      if (tan_d == 0.0 && e_delta > 0) continue;
      const int q_delta = bh + bv - 2 * nd;

      double lm = base_log;
      lm += log_factorial(ah + av - na) + log_factorial(bh + bv - nd);
      lm -= log_factorial(na) + log_factorial(nd) + log_factorial(av - na) +
            log_factorial(bv - nd) + log_factorial(a_sum - na) +
            log_factorial(b_sum - nd);
      if (e_alpha > 0) lm += e_alpha * log_abs_tan_a;
      if (e_delta > 0) lm += e_delta * log_abs_tan_d;
      lm += q_alpha * std::log(cos_a) + q_delta * std::log(cos_d);

      std::complex<double> phase = imaginary_power(e_alpha + e_delta);
      if (tan_a < 0.0 && (e_alpha % 2) != 0) phase = -phase;
      if (tan_d < 0.0 && (e_delta % 2) != 0) phase = -phase;
      sum += phase * std::exp(lm);
    }
  }
  return sum;
}

AmplitudeEvaluator::Reduced AmplitudeEvaluator::reduced(
    const PhotonPattern& pat) const {
  if (pat.stations != stations_)
    throw std::invalid_argument("pattern station count mismatch");
  const int n_st = pat.station_count();
  auto in_range = [&](int v) { return v >= 0 && v <= n_max_; };
  for (int s = 0; s < n_st; ++s)
    if (!in_range(pat.h_left[s]) || !in_range(pat.v_left[s]) ||
        !in_range(pat.v_right[s]) || !in_range(pat.h_right[s]))
      throw std::invalid_argument("pattern entry outside evaluator cutoff");
  if (!in_range(pat.a_h) || !in_range(pat.a_v) || !in_range(pat.b_v) ||
      !in_range(pat.b_h))
    throw std::invalid_argument("pattern end count outside evaluator cutoff");

  Reduced out;
  for (int p = 0; p < stations_; ++p)
    out.pairs += pat.h_left[p] + pat.v_left[p] + pat.v_right[p] + pat.h_right[p];

  const auto info = detail::ChainInfo::build(pat);
  if (!info.feasible) return out;

  const int k_split = info.s1 - (pat.b_v + pat.b_h);  // m1 + w1
  if (k_split < 0) return out;
  const int n_src = stations_;
  if (pat.a_h + pat.a_v != k_split + info.c[n_src - 1] + info.d[n_src - 1])
    return out;  // end delta at A fails

  double prefactor = 1.0;
  for (int p = 0; p < n_src; ++p)
    prefactor *= station_prefactor_[tuple_index(pat.h_left[p], pat.v_left[p],
                                                pat.v_right[p], pat.h_right[p])];
  for (int s = n_src; s < n_st; ++s)
    prefactor *= aux_prefactor_[tuple_index(pat.h_left[s], pat.v_left[s],
                                            pat.v_right[s], pat.h_right[s])];

  const int vv0 = pat.v_left[0] + pat.v_right[0];
  const int ab = chain_max_ + 1;
  const std::size_t end_base =
      static_cast<std::size_t>(tuple_index(pat.a_h, pat.a_v, pat.b_v, pat.b_h)) *
      ab * ab;

  const int m1_lo = std::max(info.m_lo, k_split - info.w_hi);
  const int m1_hi = std::min(info.m_hi, k_split - info.w_lo);
  std::complex<double> accum{0.0, 0.0};
  for (int m1 = m1_lo; m1 <= m1_hi; ++m1) {
    const int w1 = k_split - m1;
    double combin = 1.0;
    for (int p = 0; p < n_src && combin != 0.0; ++p) {
      combin *= static_cast<double>(
          split(pat.h_left[p], pat.h_right[p], m1 + info.c[p]));
      combin *= static_cast<double>(
          split(pat.v_left[p], pat.v_right[p], w1 + info.d[p]));
    }
    if (combin == 0.0) continue;
    for (int n = 1; n < n_src && combin != 0.0; ++n) {
      const int aux = n_src - 1 + n;
      combin *= static_cast<double>(omega_at(
          m1 + info.c[n - 1], pat.h_left[aux], pat.h_right[aux]));
      combin *= static_cast<double>(omega_at(
          w1 + info.d[n - 1], pat.v_left[aux], pat.v_right[aux]));
    }
    if (combin == 0.0) continue;
    const int a_sum = w1 + info.d[n_src - 1];
    const int b_sum = vv0 - w1;
    accum += combin * end_table_[end_base + static_cast<std::size_t>(a_sum) * ab +
                                 b_sum];
  }
  out.value = prefactor * accum;
  return out;
}

std::complex<double> AmplitudeEvaluator::amplitude(const PhotonPattern& pat,
                                                   double chi) const {
  if (chi < 0.0) throw std::invalid_argument("chi must be >= 0");
  const Reduced r = reduced(pat);
  if (chi == 0.0) return r.pairs == 0 ? r.value : std::complex<double>{0.0, 0.0};
  const double scale = std::exp(r.pairs * std::log(std::tanh(chi)) -
                                4.0 * stations_ * std::log(std::cosh(chi)));
  return r.value * scale;
}

std::complex<double> amplitude(const PhotonPattern& pattern,
                               const AnalyzerAngles& angles, double chi,
                               int n_max) {
  const AmplitudeEvaluator eval(pattern.stations, n_max, angles);
  return eval.amplitude(pattern, chi);
}

std::vector<PhotonPattern> enumerate_patterns(int stations, int n_max) {
  std::vector<PhotonPattern> out;
  for_each_pattern(stations, n_max,
                   [&](const PhotonPattern& p) { out.push_back(p); });
  return out;
}

}  // namespace cesqkd
