#include "sdosim/combinatorics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace sdosim::comb {
namespace {

// Row-major lower triangle: row n holds C(n, 0..n).
const std::vector<double>& pascal() {
  static const std::vector<double> table = [] {
    std::vector<double> t;
    t.reserve(static_cast<std::size_t>((kMaxTableN + 1) * (kMaxTableN + 2) / 2));
    for (int n = 0; n <= kMaxTableN; ++n) {
      const std::size_t prev = t.size() - static_cast<std::size_t>(n);  // start of row n-1
      for (int k = 0; k <= n; ++k) {
        if (k == 0 || k == n) {
          t.push_back(1.0);
        } else {
          t.push_back(t[prev + static_cast<std::size_t>(k) - 1] +
                      t[prev + static_cast<std::size_t>(k)]);
        }
      }
    }
    return t;
  }();
  return table;
}

}  // namespace

double binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0.0;
  if (n > kMaxTableN) throw std::out_of_range("binomial table limited to n <= 512");
  const auto row = static_cast<std::size_t>(n) * static_cast<std::size_t>(n + 1) / 2;
  return pascal()[row + static_cast<std::size_t>(k)];
}

BigInt binomial_exact(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

double binomial_pmf(int n, int k, double p) {
  if (k < 0 || k > n) return 0.0;
  return binomial(n, k) * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

double binomial_upper_tail(int n, int k_min, double p) {
  if (k_min <= 0) return 1.0;
  double sum = 0.0;
  for (int j = k_min; j <= n; ++j) sum += binomial_pmf(n, j, p);
  return sum;
}

}  // namespace sdosim::comb
