#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "../oracles/brute_force.hpp"
#include "sdosim/analytic.hpp"
#include "sdosim/errors.hpp"

using namespace sdosim;
using namespace sdosim::analytic;

namespace {

double to_double(const oracle::Q& q) { return q.convert_to<double>(); }

}  // namespace

TEST_CASE("phase-1 compromise probability") {
  CHECK(p_cxc_phase1(0.2, 0.0) == 0.0);
  CHECK(p_cxc_phase1(0.2, 1.0) == 1.0);
  CHECK(p_cxc_phase1(0.2, 1.0 / 3.0) == doctest::Approx(0.135135).epsilon(1e-5));
  CHECK_THROWS_AS(p_cxc_phase1(0.0, 1.0), DegenerateError);
}

TEST_CASE("conditional rates at the edges") {
  CHECK(fn_given_counts(1, 10, 3, 2) == 0.0);
  CHECK(fn_given_counts(10, 10, 3, 2) == 1.0);
  CHECK(fn_given_counts(0, 10, 3, 2) == 0.0);
  CHECK(fp_given_counts(10, 10, 3, 2) == 0.0);
  CHECK(fp_given_counts(0, 10, 3, 2) == 0.0);
  // 34 of the C(9,3) = 84 candidate subsets hold at least two compromised exits.
  CHECK(fn_given_counts_exact(5, 10, 3, 2) == comb::Rational(17, 42));
  CHECK(fn_given_counts(5, 10, 3, 2) == doctest::Approx(17.0 / 42.0));
  CHECK_THROWS_AS(fn_given_counts(11, 10, 3, 2), std::invalid_argument);
}

TEST_CASE("exact tails equal exhaustive subset enumeration for N <= 8") {
  for (int n = 2; n <= 8; ++n)
    for (int k = 1; k < n; ++k)
      for (int th = 1; th <= k; ++th)
        for (int c = 0; c <= n; ++c) {
          CAPTURE(n);
          CAPTURE(k);
          CAPTURE(th);
          CAPTURE(c);
          REQUIRE(fn_given_counts_exact(c, n, k, th) == oracle::fn_given_counts(c, n, k, th));
          REQUIRE(fp_given_counts_exact(c, n, k, th) == oracle::fp_given_counts(c, n, k, th));
          CHECK(fn_given_counts(c, n, k, th) ==
                doctest::Approx(to_double(oracle::fn_given_counts(c, n, k, th))).epsilon(1e-14));
        }
}

TEST_CASE("tails and complements sum to one") {
  for (int n = 2; n <= 15; ++n)
    for (int k = 1; k < n; ++k)
      for (int th = 1; th <= k; ++th)
        for (int c = 1; c <= n; ++c) {
          CHECK(fn_given_counts(c, n, k, th) + fp_given_counts(n - c, n, k, th) ==
                doctest::Approx(1.0).epsilon(1e-12));
          CHECK(fn_given_counts_exact(c, n, k, th) + fp_given_counts_exact(n - c, n, k, th) == 1);
        }
}

TEST_CASE("pool conditionals with probe failures match enumeration") {
  const oracle::Q f(23, 100);
  for (int n = 1; n <= 6; ++n)
    for (int c = 0; c <= n; ++c)
      for (int k = 1; k <= 5; ++k)
        for (int th = 1; th <= k; ++th) {
          CAPTURE(n);
          CAPTURE(c);
          CAPTURE(k);
          CAPTURE(th);
          CHECK(fn_given_pool(c, n - c, k, th, 0.23) ==
                doctest::Approx(to_double(oracle::fn_given_counts(c, n, k, th, f))).epsilon(1e-12));
          CHECK(fp_given_pool(c, n - c, k, th, 0.23) ==
                doctest::Approx(to_double(oracle::fp_given_counts(c, n, k, th, f))).epsilon(1e-12));
        }
}

TEST_CASE("headline rates match enumeration of classes and lapses") {
  // t = 1/5, g = 1/3 gives q = (1/15) / (37/75) = 5/37.
  const oracle::Q q(5, 37);
  for (const auto& [f_num, f_den] : {std::pair{0, 1}, std::pair{23, 100}}) {
    const oracle::Q f(f_num, f_den);
    for (int n = 2; n <= 5; ++n)
      for (int k = 1; k < n; ++k)
        for (int th = 1; th <= k; ++th) {
          CAPTURE(n);
          CAPTURE(k);
          CAPTURE(th);
          const ModelParams p{0.2, 1.0 / 3.0, static_cast<double>(f_num) / f_den, 1.0, n, k, th};
          const ErrorRates r = error_rates(p);
          const oracle::Rates ref = oracle::rates(n, k, th, q, f);
          CHECK(r.fn == doctest::Approx(to_double(ref.fn)).epsilon(1e-12));
          CHECK(r.fp == doctest::Approx(to_double(ref.fp)).epsilon(1e-12));
        }
  }
}

TEST_CASE("failure model reduces to the no-failure model at f = 0") {
  for (double g : {0.0, 0.2, 1.0 / 3.0, 2.0 / 3.0, 1.0})
    for (int n : {2, 5, 10, 20})
      for (int k = 1; k < n && k <= 10; ++k)
        for (int th = 1; th <= k; ++th) {
          const ModelParams p{0.2, g, 0.0, 1.0, n, k, th};
          CHECK(std::abs(fn_rate_failures(p) - fn_rate(p)) < 1e-12);
          CHECK(std::abs(fp_rate_failures(p) - fp_rate(p)) < 1e-12);
        }
}

TEST_CASE("reference operating point") {
  ModelParams p{0.2, 1.0 / 3.0, 0.0, 1.0, 10, 3, 2};
  CHECK(fn_rate(p) == doctest::Approx(0.018264).epsilon(1e-4));
  CHECK(fp_rate(p) == doctest::Approx(0.061430).epsilon(1e-4));
  p.f = 0.23;
  const ErrorRates r = error_rates(p);
  CHECK(r.fn == doctest::Approx(0.009060).epsilon(1e-3));
  CHECK(r.fp == doctest::Approx(0.283074).epsilon(1e-4));
}

TEST_CASE("trivial regimes") {
  const ModelParams honest{0.2, 0.0, 0.0, 1.0, 10, 3, 2};
  CHECK(fp_rate(honest) == 0.0);
  CHECK(fn_rate(honest) == 0.0);
  CHECK(psi(honest) == 1.0);
  CHECK(eta(honest) == doctest::Approx(4.5625));

  const ModelParams doomed{0.2, 1.0, 0.0, 1.0, 10, 3, 2};
  CHECK(fn_rate(doomed) == doctest::Approx(1.0));
  CHECK(fp_rate(doomed) == 0.0);

  const ModelParams doomed_strict{0.2, 1.0, 0.0, 1.0, 10, 3, 2};
  CHECK_THROWS_AS(psi(0.2, 1.0, ErrorRates{0.0, 0.0}), DegenerateError);
  CHECK(psi(doomed_strict) == doctest::Approx(0.0));

  ModelParams partial = honest;
  partial.d = 0.5;
  CHECK_THROWS_AS(fn_rate(partial), std::invalid_argument);
}

TEST_CASE("security and overhead stay in range") {
  for (double g : {0.0, 0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0})
    for (double f : {0.0, 0.1, 0.23})
      for (int k = 1; k < 10; ++k)
        for (int th = 1; th <= k; ++th) {
          const ModelParams p{0.2, g, f, 1.0, 10, k, th};
          const double s = psi(p);
          CHECK(s >= 0.0);
          CHECK(s <= 1.0);
          CHECK(eta(p) >= 1.0);
          CHECK(eta_with_failures(p) >= eta(p) - 1e-12);
        }
}

TEST_CASE("failure-aware overhead equals the plain one at f = 0") {
  const ModelParams p{0.2, 1.0 / 3.0, 0.0, 1.0, 10, 3, 2};
  CHECK(eta_with_failures(p) == doctest::Approx(eta(p)));
}

TEST_CASE("FN falls and FP rises with the threshold") {
  for (double f : {0.0, 0.23})
    for (int k = 1; k <= 10; ++k)
      for (int th = 2; th <= k; ++th) {
        const ErrorRates lo = error_rates({0.2, 1.0 / 3.0, f, 1.0, 20, k, th - 1});
        const ErrorRates hi = error_rates({0.2, 1.0 / 3.0, f, 1.0, 20, k, th});
        CHECK(hi.fn <= lo.fn + 1e-15);
        CHECK(hi.fp >= lo.fp - 1e-15);
      }
}

TEST_CASE("conventional security baselines") {
  CHECK(conventional_security(0.2, 1.0 / 3.0) == doctest::Approx(0.8649).epsilon(1e-3));
  CHECK(conventional_security(0.2, 2.0 / 3.0) == doctest::Approx(0.6154).epsilon(1e-3));
}

TEST_CASE("candidate compromised-exit probability endpoints") {
  for (double t : {0.05, 0.1, 0.2, 0.3, 0.5})
    for (double g : {0.0, 0.2, 1.0 / 3.0, 2.0 / 3.0, 0.9}) {
      CHECK(candidate_comp_exit_prob(t, g, 0.0) == doctest::Approx(t).epsilon(1e-12));
      CHECK(candidate_comp_exit_prob(t, g, 1.0) ==
            doctest::Approx(p_cxc_phase1(t, g)).epsilon(1e-12));
      CHECK(shrewd_comp_exit_prob(t, g, 0.0) == doctest::Approx(t).epsilon(1e-12));
      CHECK(shrewd_comp_exit_prob(t, g, 1.0) ==
            doctest::Approx(t / (t + (1 - g) * (1 - t) * (1 - t))).epsilon(1e-12));
      for (int i = 0; i <= 10; ++i) {
        const double d = i / 10.0;
        CHECK(shrewd_comp_exit_prob(t, g, d) >= candidate_comp_exit_prob(t, g, d) - 1e-12);
      }
    }
  const double mid = candidate_comp_exit_prob(0.2, 1.0 / 3.0, 0.5);
  const double at0 = candidate_comp_exit_prob(0.2, 1.0 / 3.0, 0.0);
  const double at1 = candidate_comp_exit_prob(0.2, 1.0 / 3.0, 1.0);
  CHECK(mid > std::min(at0, at1));
  CHECK(mid < std::max(at0, at1));
}

TEST_CASE("forwarding fractions") {
  const double t = 0.2, g = 1.0 / 3.0;
  CHECK(noncomp_forward_fraction(t, g, 1.0) ==
        doctest::Approx((1 - g) * t / (t + (1 - g) * (1 - t) * (1 - t))));
  CHECK(noncomp_forward_fraction(t, 1.0, 1.0) == 0.0);
  CHECK(noncomp_forward_fraction(t, g, 0.0) > noncomp_forward_fraction(t, g, 1.0));
  CHECK(simple_noncomp_forward_fraction(t, g, 1.0) == 0.0);
  CHECK(simple_noncomp_forward_fraction(t, g, 0.0) ==
        doctest::Approx(1.0 - survival_probability(t, g)));
}

TEST_CASE("usage probabilities and redefined security") {
  const UsageProbabilities u = usage_probabilities({2, 6, 4}, 0.5);
  CHECK(u.cxc == doctest::Approx(0.2));
  CHECK(u.hhh == doctest::Approx(0.6));
  CHECK(u.others == doctest::Approx(0.2));
  const UsageProbabilities clean = usage_probabilities({0, 10, 0}, 0.3);
  CHECK(clean.cxc == 0.0);
  CHECK(clean.hhh == 1.0);
  CHECK(usage_probabilities({1, 1, 5}, 1.0).others == 0.0);
  CHECK_THROWS_AS(usage_probabilities({0, 0, 3}, 1.0), DegenerateError);

  CHECK(redefined_psi({0.0, 0.7, 0.3}, 0.4) == 1.0);
  CHECK(redefined_psi({0.5, 0.0, 0.0}, 0.4) == 0.0);
  CHECK_THROWS_AS(redefined_psi({0.0, 0.0, 0.0}, 0.4), DegenerateError);
}

TEST_CASE("phase-1 size") {
  CHECK(compute_n(0.2, 2.0 / 3.0) == 10);
  CHECK(compute_n(0.2, 0.0) == 6);
  CHECK(compute_n(0.2, 1.0 / 3.0) == 7);
  CHECK_THROWS_AS(compute_n(0.2, 1.0), DegenerateError);
  CHECK(expected_phase1_attempts(0.2, 1.0 / 3.0, 10) == doctest::Approx(20.27).epsilon(1e-3));
}

TEST_CASE("parameter ranges") {
  const ParamRanges r = param_ranges(0.2, 1.0 / 3.0, 10);
  CHECK(r.n_cxc == doctest::Approx(1.351).epsilon(1e-3));
  CHECK(r.m_max == doctest::Approx(7.4));
  CHECK(r.k_min == doctest::Approx(2.70).epsilon(1e-3));
  CHECK(r.k_max == doctest::Approx(10.0));
  REQUIRE(r.thresholds.size() == 7);
  CHECK(r.thresholds.front().k == 3);
  CHECK(r.thresholds.back().k == 9);
  for (const ThresholdRange& tr : r.thresholds) {
    CHECK(tr.th_min == static_cast<int>(std::ceil(tr.k - r.n_cxc)));
    CHECK(tr.th_max == tr.k - 1);
  }
  CHECK_FALSE(r.empty());

  const ParamRanges none = param_ranges(0.2, 0.0, 10);
  CHECK(std::isinf(none.m_max));
  CHECK(none.k_max == 10.0);
  CHECK(none.empty());

  CHECK(param_ranges(0.2, 1.0, 10).empty());
  CHECK(param_ranges(0.6, 0.9, 10).empty());
}

TEST_CASE("crossover search") {
  const auto rows = crossover_tuning(0.2, 1.0 / 3.0, 0.23, 1.0, 20, 10);
  REQUIRE(rows.size() == 10);
  CHECK(rows[0].k == 1);
  CHECK(rows[0].kind == CrossoverKind::BelowRange);
  for (const Crossover& c : rows) {
    CHECK(c.th_low >= 1);
    CHECK(c.th_high <= c.k);
    CHECK(c.th_low <= c.th_high);
    if (c.kind == CrossoverKind::Bracketed) {
      CHECK(c.th_high == c.th_low + 1);
      CHECK(c.fn_low > c.fp_low);
      CHECK(c.fn_high <= c.fp_high);
    }
  }
  CHECK_THROWS_AS(crossover_tuning(0.2, 1.0 / 3.0, 0.23, 1.0, 10, 10), std::invalid_argument);

  // Honest guards: FN vanishes, so every row sits on the lower boundary.
  for (const Crossover& c : crossover_tuning(0.2, 0.0, 0.0, 1.0, 12, 6)) {
    CHECK(c.kind == CrossoverKind::BelowRange);
  }
}

TEST_CASE("probe bandwidth") {
  CHECK(bandwidth_overhead(4, 300, 3, 3600, 1) == 1.0);
  CHECK(bandwidth_overhead(4, 300, 3, 3600, 6) == 6.0);
  CHECK(bandwidth_overhead(4, 0, 3, 3600, 6) == 0.0);
  CHECK_THROWS_AS(bandwidth_overhead(4, 300, 3, 0, 6), std::invalid_argument);
}

TEST_CASE("guard-free selective DoS quantities") {
  CHECK(selective_dos_compromise_fraction(0.2) == doctest::Approx(0.0725).epsilon(1e-3));
  // 0.544 / 0.552
  CHECK(honest_middle_probability(0.2) == doctest::Approx(0.985507).epsilon(1e-5));
}
