#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace sdosim::comb {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Largest n served by the floating-point binomial table.
inline constexpr int kMaxTableN = 512;

/// C(n, k) as a double from a Pascal table; 0 when k < 0, k > n or n < 0
/// (so C(-1, i) = 0, which makes empty pools contribute nothing).
/// Throws std::out_of_range for n > kMaxTableN.
double binomial(int n, int k);

/// Exact C(n, k) with the same zero convention.
BigInt binomial_exact(int n, int k);

/// Binomial pmf B(n, k, p) = C(n, k) p^k (1 - p)^(n - k), with 0^0 = 1.
double binomial_pmf(int n, int k, double p);

/// P[Bin(n, p) >= k_min]; 1 when k_min <= 0, 0 when k_min > n.
double binomial_upper_tail(int n, int k_min, double p);

}  // namespace sdosim::comb
