#pragma once

#include <cstdint>

namespace cesqkd {

/// log(n!) via a cached lgamma table; n >= 0.
double log_factorial(int n);

/// Binomial coefficient as an exact integer; 0 when k < 0 or k > n.
std::int64_t binomial(int n, int k);

/// Signed combinatorial swap factor
///   Omega(mu, lambda, i, l) =
///     sum_gamma C(mu+lambda, gamma) C(i+l-mu-lambda, i-gamma) (-1)^{mu+lambda-gamma},
/// with out-of-range binomials contributing 0. Depends on mu and lambda only
/// through their sum.
std::int64_t omega(int mu, int lambda, int i_aux, int l_aux);

/// Coefficient of x^m in (1-x)^a (1+x)^b: the signed sum over ways to draw m
/// photons from a station's two output arms.
std::int64_t signed_split_sum(int a, int b, int m);

}  // namespace cesqkd
