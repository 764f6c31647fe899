#include "sdosim/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sdosim/errors.hpp"

namespace sdosim::analytic {
namespace {

void require_fraction(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  }
}

void require_counts(int c, int n, int k, int threshold) {
  if (n < 2) throw std::invalid_argument("N must be at least 2");
  if (c < 0 || c > n) throw std::invalid_argument("c must lie in [0, N]");
  if (k < 1 || threshold < 1) throw std::invalid_argument("K and Th must be positive");
}

void require_full_drop(const ModelParams& p) {
  p.validate();
  if (p.d != 1.0) {
    throw std::invalid_argument("closed-form FN/FP assume d = 1; use simulation for d < 1");
  }
}

double honest_weight(double t, double g) { return (1.0 - g) * (1.0 - t) * (1.0 - t); }

// Denominator shared by psi and eta: expected accepted-and-usable mass.
double usable_mass(double t, double g, const ErrorRates& r) {
  const double den = g * t * r.fn + honest_weight(t, g) * (1.0 - r.fp);
  if (!(den > 0.0)) throw DegenerateError("no circuit is accepted in expectation");
  return den;
}

struct Clamped {
  int k;
  int th;
};

Clamped clamp(int k, int threshold, int pool) {
  const int kk = std::min(k, pool);
  return {kk, std::min(threshold, kk)};
}

template <typename T, typename Binom>
T hyper_tail(int successes, int failures, int k, int lo, int hi, Binom&& binom) {
  T sum = 0;
  for (int i = lo; i <= hi; ++i) sum += binom(successes, i) * binom(failures, k - i);
  return sum;
}

}  // namespace

void ModelParams::validate() const {
  require_fraction(t, "t");
  require_fraction(g, "g");
  require_fraction(f, "f");
  require_fraction(d, "d");
  if (f >= 1.0) throw std::invalid_argument("f must be below 1");
  if (n < 2) throw std::invalid_argument("N must be at least 2");
  if (n > comb::kMaxTableN) throw std::invalid_argument("N must not exceed 512");
  if (k < 1 || k >= n) throw std::invalid_argument("K must satisfy 1 <= K < N");
  if (threshold < 1 || threshold > k) throw std::invalid_argument("Th must satisfy 1 <= Th <= K");
}

double survival_probability(double t, double g) noexcept {
  return g * t + honest_weight(t, g);
}

double p_cxc_phase1(double t, double g) {
  require_fraction(t, "t");
  require_fraction(g, "g");
  const double s = survival_probability(t, g);
  if (!(s > 0.0)) throw DegenerateError("gt + (1-g)(1-t)^2 is zero");
  return g * t / s;
}

double fn_given_counts(int c, int n, int k, int threshold) {
  require_counts(c, n, k, threshold);
  const auto [kk, th] = clamp(k, threshold, n - 1);
  const double num = hyper_tail<double>(c - 1, n - c, kk, th, kk, comb::binomial);
  return num / comb::binomial(n - 1, kk);
}

double fp_given_counts(int c, int n, int k, int threshold) {
  require_counts(c, n, k, threshold);
  const auto [kk, th] = clamp(k, threshold, n - 1);
  const double num = hyper_tail<double>(n - c - 1, c, kk, 0, th - 1, comb::binomial);
  return num / comb::binomial(n - 1, kk);
}

comb::Rational fn_given_counts_exact(int c, int n, int k, int threshold) {
  require_counts(c, n, k, threshold);
  const auto [kk, th] = clamp(k, threshold, n - 1);
  const comb::BigInt num =
      hyper_tail<comb::BigInt>(c - 1, n - c, kk, th, kk, comb::binomial_exact);
  return comb::Rational(num, comb::binomial_exact(n - 1, kk));
}

comb::Rational fp_given_counts_exact(int c, int n, int k, int threshold) {
  require_counts(c, n, k, threshold);
  const auto [kk, th] = clamp(k, threshold, n - 1);
  const comb::BigInt num =
      hyper_tail<comb::BigInt>(n - c - 1, c, kk, 0, th - 1, comb::binomial_exact);
  return comb::Rational(num, comb::binomial_exact(n - 1, kk));
}

double fn_given_pool(int c_live, int h_live, int k, int threshold, double f) {
  if (c_live < 0 || h_live < 0) throw std::invalid_argument("pool counts must be non-negative");
  if (c_live < 1) return 0.0;
  const int pool = c_live + h_live - 1;
  const auto [kk, th] = clamp(k, threshold, pool);
  double sum = 0.0;
  for (int i = th; i <= kk; ++i) {
    const double w = comb::binomial(c_live - 1, i) * comb::binomial(h_live, kk - i);
    if (w == 0.0) continue;
    sum += w * comb::binomial_upper_tail(i, th, 1.0 - f);
  }
  return sum / comb::binomial(pool, kk);
}

double fp_given_pool(int c_live, int h_live, int k, int threshold, double f) {
  if (c_live < 0 || h_live < 0) throw std::invalid_argument("pool counts must be non-negative");
  if (h_live < 1) return 0.0;
  const int pool = c_live + h_live - 1;
  const auto [kk, th] = clamp(k, threshold, pool);
  double sum = 0.0;
  for (int i = 0; i <= kk; ++i) {
    const double w = comb::binomial(h_live - 1, i) * comb::binomial(c_live, kk - i);
    if (w == 0.0) continue;
    sum += w * (1.0 - comb::binomial_upper_tail(i, th, 1.0 - f));
  }
  return sum / comb::binomial(pool, kk);
}

double fn_rate(const ModelParams& p) {
  require_full_drop(p);
  const double q = p_cxc_phase1(p.t, p.g);
  double sum = 0.0;
  for (int c = 1; c <= p.n; ++c) {
    sum += comb::binomial_pmf(p.n, c, q) * fn_given_counts(c, p.n, p.k, p.threshold);
  }
  return sum;
}

double fp_rate(const ModelParams& p) {
  require_full_drop(p);
  const double q = p_cxc_phase1(p.t, p.g);
  double sum = 0.0;
  for (int c = 0; c < p.n; ++c) {
    sum += comb::binomial_pmf(p.n, c, q) * fp_given_counts(c, p.n, p.k, p.threshold);
  }
  return sum;
}

ErrorRates error_rates(const ModelParams& p) {
  require_full_drop(p);
  const double q = p_cxc_phase1(p.t, p.g);
  const double live = 1.0 - p.f;
  const int n = p.n;

  // weight[c'][h'] = sum_c Pr(C=c) Pr(C'=c' | c) Pr(H'=h' | N-c)
  std::vector<double> weight(static_cast<std::size_t>((n + 1) * (n + 1)), 0.0);
  for (int c = 0; c <= n; ++c) {
    const double pc = comb::binomial_pmf(n, c, q);
    if (pc == 0.0) continue;
    for (int cl = 0; cl <= c; ++cl) {
      const double pcl = pc * comb::binomial_pmf(c, cl, live);
      if (pcl == 0.0) continue;
      for (int hl = 0; hl <= n - c; ++hl) {
        weight[static_cast<std::size_t>(cl * (n + 1) + hl)] +=
            pcl * comb::binomial_pmf(n - c, hl, live);
      }
    }
  }

  ErrorRates r;
  for (int cl = 0; cl <= n; ++cl) {
    for (int hl = 0; cl + hl <= n; ++hl) {
      const double w = weight[static_cast<std::size_t>(cl * (n + 1) + hl)];
      if (w == 0.0) continue;
      r.fn += w * fn_given_pool(cl, hl, p.k, p.threshold, p.f);
      r.fp += w * fp_given_pool(cl, hl, p.k, p.threshold, p.f);
    }
  }
  return r;
}

double fn_rate_failures(const ModelParams& p) { return error_rates(p).fn; }
double fp_rate_failures(const ModelParams& p) { return error_rates(p).fp; }

double psi(double t, double g, const ErrorRates& rates) {
  return 1.0 - g * t * rates.fn / usable_mass(t, g, rates);
}

double psi(const ModelParams& p) { return psi(p.t, p.g, error_rates(p)); }

double eta(double t, double g, int k, const ErrorRates& rates) {
  return (1.0 + survival_probability(t, g) * k) / usable_mass(t, g, rates);
}

double eta(const ModelParams& p) { return eta(p.t, p.g, p.k, error_rates(p)); }

double eta_with_failures(const ModelParams& p) {
  const ErrorRates r = error_rates(p);
  const double live = 1.0 - p.f;
  const double probes = 1.0 / live + survival_probability(p.t, p.g) * live * p.k;
  return probes / (live * usable_mass(p.t, p.g, r));
}

double conventional_security(double t, double g) { return 1.0 - p_cxc_phase1(t, g); }

double candidate_comp_exit_prob(double t, double g, double d) {
  require_fraction(t, "t");
  require_fraction(g, "g");
  require_fraction(d, "d");
  const double h = honest_weight(t, g);
  const double num = g * t + ((1.0 - g) * (1.0 - t) * t + (1.0 - g) * t * t) * (1.0 - d);
  const double den = h + g * t + (1.0 - h - g * t) * (1.0 - d);
  if (!(den > 0.0)) throw DegenerateError("no circuit survives");
  return num / den;
}

double shrewd_comp_exit_prob(double t, double g, double d) {
  require_fraction(t, "t");
  require_fraction(g, "g");
  require_fraction(d, "d");
  const double h = honest_weight(t, g);
  const double den = h + t + (1.0 - h - t) * (1.0 - d);
  if (!(den > 0.0)) throw DegenerateError("no circuit survives");
  return t / den;
}

double noncomp_forward_fraction(double t, double g, double d) {
  require_fraction(t, "t");
  require_fraction(g, "g");
  require_fraction(d, "d");
  const double h = honest_weight(t, g);
  const double spared = (1.0 - t - h) * (1.0 - d);
  const double den = spared + t + h;
  if (!(den > 0.0)) throw DegenerateError("no circuit survives");
  return (spared + (1.0 - g) * t) / den;
}

double simple_noncomp_forward_fraction(double t, double g, double d) {
  require_fraction(t, "t");
  require_fraction(g, "g");
  require_fraction(d, "d");
  const double s = survival_probability(t, g);
  const double spared = (1.0 - s) * (1.0 - d);
  const double den = s + spared;
  if (!(den > 0.0)) throw DegenerateError("no circuit survives");
  return spared / den;
}

UsageProbabilities usage_probabilities(const ClassCounts& counts, double d) {
  require_fraction(d, "d");
  if (counts.cxc < 0.0 || counts.hhh < 0.0 || counts.others < 0.0) {
    throw std::invalid_argument("class counts must be non-negative");
  }
  const double others = (1.0 - d) * counts.others;
  const double den = counts.hhh + counts.cxc + others;
  if (!(den > 0.0)) throw DegenerateError("no usable accepted circuit");
  return {counts.cxc / den, counts.hhh / den, others / den};
}

double redefined_psi(const UsageProbabilities& pr, double d) {
  require_fraction(d, "d");
  const double den = pr.cxc + pr.hhh + (1.0 - d) * pr.others;
  if (!(den > 0.0)) throw DegenerateError("usage probabilities are all zero");
  return 1.0 - pr.cxc / den;
}

int compute_n(double t, double g, int circuits_per_hour) {
  require_fraction(t, "t");
  require_fraction(g, "g");
  if (circuits_per_hour < 1) throw std::invalid_argument("circuits per hour must be positive");
  const double h = honest_weight(t, g);
  if (!(h > 0.0)) throw DegenerateError("N tends to infinity when no honest circuit survives");
  const double raw = circuits_per_hour * survival_probability(t, g) / h;
  return static_cast<int>(std::ceil(raw - 1e-9));
}

double expected_phase1_attempts(double t, double g, int n) {
  const double s = survival_probability(t, g);
  if (!(s > 0.0)) throw DegenerateError("no circuit survives");
  return n / s;
}

bool ParamRanges::empty() const noexcept {
  return std::all_of(thresholds.begin(), thresholds.end(),
                     [](const ThresholdRange& r) { return r.empty(); });
}

ParamRanges param_ranges(double t, double g, int n) {
  require_fraction(t, "t");
  require_fraction(g, "g");
  if (n < 2) throw std::invalid_argument("N must be at least 2");
  const double s = survival_probability(t, g);
  if (!(s > 0.0)) throw DegenerateError("gt + (1-g)(1-t)^2 is zero");

  ParamRanges r;
  r.n_cxc = n * g * t / s;
  const double gt = g * t;
  r.m_max = gt > 0.0 ? 1.0 + honest_weight(t, g) / gt : std::numeric_limits<double>::infinity();
  r.k_min = r.m_min * r.n_cxc;
  r.k_max = std::min(r.m_max * r.n_cxc, static_cast<double>(n));
  if (gt <= 0.0) r.k_max = n;
  if (!(r.m_max > r.m_min)) return r;

  constexpr double eps = 1e-9;
  for (int k = std::max(1, static_cast<int>(std::floor(r.k_min + eps)) + 1);
       k < n && k < r.k_max - eps; ++k) {
    const int lo = std::max(1, static_cast<int>(std::ceil(k - r.n_cxc - eps)));
    r.thresholds.push_back({k, lo, k - 1});
  }
  return r;
}

std::vector<Crossover> crossover_tuning(double t, double g, double f, double d, int n,
                                        int k_max) {
  if (k_max < 1 || k_max >= n) throw std::invalid_argument("Kmax must satisfy 1 <= Kmax < N");
  std::vector<Crossover> out;
  for (int k = 1; k <= k_max; ++k) {
    std::vector<ErrorRates> curve;
    for (int th = 1; th <= k; ++th) curve.push_back(error_rates({t, g, f, d, n, k, th}));

    Crossover row;
    row.k = k;
    const auto at = [&](int th) { return curve[static_cast<std::size_t>(th - 1)]; };
    int first = 0;
    for (int th = 1; th <= k; ++th) {
      if (at(th).fn <= at(th).fp) {
        first = th;
        break;
      }
    }
    if (first == 1) {
      row.kind = CrossoverKind::BelowRange;
      row.th_low = row.th_high = 1;
    } else if (first == 0) {
      row.kind = CrossoverKind::AboveRange;
      row.th_low = row.th_high = k;
    } else {
      row.kind = CrossoverKind::Bracketed;
      row.th_low = first - 1;
      row.th_high = first;
    }
    row.fn_low = at(row.th_low).fn;
    row.fp_low = at(row.th_low).fp;
    row.fn_high = at(row.th_high).fn;
    row.fp_high = at(row.th_high).fp;
    out.push_back(row);
  }
  return out;
}

double bandwidth_overhead(double probes_per_usable, double probe_size_kb, double guards,
                          double interval_sec, double circuits_per_hour) {
  if (probes_per_usable < 0.0 || probe_size_kb < 0.0 || guards < 0.0 ||
      circuits_per_hour < 0.0) {
    throw std::invalid_argument("overhead inputs must be non-negative");
  }
  if (!(interval_sec > 0.0)) throw std::invalid_argument("interval must be positive");
  return guards * probe_size_kb * probes_per_usable / interval_sec * circuits_per_hour;
}

double selective_dos_compromise_fraction(double t) {
  require_fraction(t, "t");
  const double both = t * t;
  const double honest = (1.0 - t) * (1.0 - t) * (1.0 - t);
  return both / (both + honest);
}

double honest_middle_probability(double t) {
  require_fraction(t, "t");
  const double u = 1.0 - t;
  return (u * u * u + t * t * u) / (u * u * u + t * t);
}

}  // namespace sdosim::analytic
