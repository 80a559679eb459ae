#include "cesqkd/combinatorics.h"

#include <array>
#include <cmath>
#include <stdexcept>

namespace cesqkd {

namespace {

constexpr int kLogFactCache = 256;

std::array<double, kLogFactCache> build_log_fact_table() {
  std::array<double, kLogFactCache> t{};
  for (int n = 0; n < kLogFactCache; ++n) t[n] = std::lgamma(n + 1.0);
  return t;
}

}  // namespace

double log_factorial(int n) {
  static const std::array<double, kLogFactCache> table = build_log_fact_table();
  if (n < 0) throw std::domain_error("log_factorial: negative argument");
  if (n < kLogFactCache) return table[n];
  return std::lgamma(n + 1.0);
}

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n || n < 0) return 0;
  if (k > n - k) k = n - k;
  std::int64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;  // exact: product of i consecutive ints
  }
  return result;
}

std::int64_t omega(int mu, int lambda, int i_aux, int l_aux) {
  const int m = mu + lambda;
  const int rest = i_aux + l_aux - m;
  std::int64_t sum = 0;
  for (int gamma = 0; gamma <= m; ++gamma) {
    const std::int64_t term = binomial(m, gamma) * binomial(rest, i_aux - gamma);
    sum += ((m - gamma) % 2 == 0) ? term : -term;
  }
  return sum;
}

std::int64_t signed_split_sum(int a, int b, int m) {
  if (m < 0 || m > a + b) return 0;
  std::int64_t sum = 0;
  const int mu_lo = std::max(0, m - b);
  const int mu_hi = std::min(a, m);
  for (int mu = mu_lo; mu <= mu_hi; ++mu) {
    const std::int64_t term = binomial(a, mu) * binomial(b, m - mu);
    sum += (mu % 2 == 0) ? term : -term;
  }
  return sum;
}

}  // namespace cesqkd
