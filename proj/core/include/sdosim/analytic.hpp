#pragma once

#include <limits>
#include <vector>

#include "sdosim/combinatorics.hpp"

namespace sdosim::analytic {

/// Environment and tunables for the closed-form model.
struct ModelParams {
  double t = 0.2;        // compromised bandwidth fraction
  double g = 1.0 / 3.0;  // compromised guard fraction
  double f = 0.0;        // per-retrieval network failure rate
  double d = 1.0;        // adversary drop rate
  int n = 10;
  int k = 3;
  int threshold = 2;

  /// Fractions in [0,1], f < 1, N >= 2, 1 <= K < N, 1 <= Th <= K.
  void validate() const;
};

struct ErrorRates {
  double fn = 0.0;
  double fp = 0.0;
};

/// gt / (gt + (1-g)(1-t)^2): share of phase-1 survivors that are CXC when
/// every other compromised circuit is dropped.
double p_cxc_phase1(double t, double g);

/// S = gt + (1-g)(1-t)^2, the per-attempt survival probability at d = 1, f = 0.
double survival_probability(double t, double g) noexcept;

/// Probability that a CXC circuit among N survivors with c compromised
/// passes the K-probe test (no failures). K' = min(K, N-1), Th' = min(Th, K').
double fn_given_counts(int c, int n, int k, int threshold);
/// Probability that an HHH circuit is rejected under the same setting.
double fp_given_counts(int c, int n, int k, int threshold);

comb::Rational fn_given_counts_exact(int c, int n, int k, int threshold);
comb::Rational fp_given_counts_exact(int c, int n, int k, int threshold);

/// Conditional rates once failures have thinned the pool to c' compromised
/// and h' honest live circuits; each probe additionally fails with f.
/// K' = min(K, c'+h'-1). Zero when the evaluated class is absent.
double fn_given_pool(int c_live, int h_live, int k, int threshold, double f);
double fp_given_pool(int c_live, int h_live, int k, int threshold, double f);

/// No-failure model (f ignored); requires d = 1.
double fn_rate(const ModelParams& p);
double fp_rate(const ModelParams& p);

/// Failure model; equals the no-failure model at f = 0. Requires d = 1.
double fn_rate_failures(const ModelParams& p);
double fp_rate_failures(const ModelParams& p);

/// Failure model for both rates in one pass.
ErrorRates error_rates(const ModelParams& p);

/// 1 - gt*FN / (gt*FN + (1-g)(1-t)^2 (1-FP)).
double psi(double t, double g, const ErrorRates& rates);
double psi(const ModelParams& p);

/// Expected probes per usable circuit, (1 + S*K) / (gt*FN + (1-g)(1-t)^2 (1-FP)).
/// The first term ignores f.
double eta(double t, double g, int k, const ErrorRates& rates);
double eta(const ModelParams& p);

/// Variant of eta that also charges failed attempts and failed probes:
/// [1/(1-f) + S(1-f)K] / [(1-f)(gt*FN + (1-g)(1-t)^2 (1-FP))].
double eta_with_failures(const ModelParams& p);

/// Security of plain path selection under selective DoS: 1 - p_cxc_phase1.
double conventional_security(double t, double g);

/// Probability that a phase-2 candidate has a compromised exit when the
/// adversary drops every non-CXC compromised circuit with probability d.
double candidate_comp_exit_prob(double t, double g, double d);
/// Same when the adversary spares every circuit with a compromised exit.
double shrewd_comp_exit_prob(double t, double g, double d);

/// Fraction of surviving circuits that are not compromised, shrewd adversary.
double noncomp_forward_fraction(double t, double g, double d);
/// Counterpart for the simple adversary: [1-S](1-d) / (S + [1-S](1-d)).
double simple_noncomp_forward_fraction(double t, double g, double d);

struct ClassCounts {
  double cxc = 0.0;
  double hhh = 0.0;
  double others = 0.0;
};

struct UsageProbabilities {
  double cxc = 0.0;
  double hhh = 0.0;
  double others = 0.0;
};

/// Usage shares of accepted circuits when Others are only usable with
/// probability 1 - d.
UsageProbabilities usage_probabilities(const ClassCounts& counts, double d);

/// 1 - PrCXC / (PrCXC + PrHHH + (1-d) PrOthers).
double redefined_psi(const UsageProbabilities& pr, double d);

/// Phase-1 size needed for `circuits_per_hour` honest circuits on average.
int compute_n(double t, double g, int circuits_per_hour = 6);

/// Expected phase-1 attempts to collect N working circuits (f = 0, d = 1).
double expected_phase1_attempts(double t, double g, int n);

struct ThresholdRange {
  int k = 0;
  int th_min = 0;  // inclusive
  int th_max = 0;  // inclusive; th_min > th_max means empty

  bool empty() const noexcept { return th_min > th_max; }
};

struct ParamRanges {
  double n_cxc = 0.0;
  double m_min = 2.0;
  double m_max = std::numeric_limits<double>::infinity();  // exclusive
  double k_min = 0.0;                                      // exclusive
  double k_max = 0.0;                                      // exclusive
  /// Integer K values strictly inside (k_min, k_max), with their Th ranges.
  std::vector<ThresholdRange> thresholds;

  bool empty() const noexcept;
};

/// K = m * n(CXC) with 2 < m < 1 + (1-g)(1-t)^2/(gt), capped by N, and
/// (m-1) n(CXC) <= Th < K.
ParamRanges param_ranges(double t, double g, int n);

enum class CrossoverKind {
  Bracketed,   // FN > FP at th_low, FN <= FP at th_high
  BelowRange,  // FN <= FP already at Th = 1
  AboveRange,  // FN > FP for every Th <= K
};

struct Crossover {
  int k = 0;
  int th_low = 0;
  int th_high = 0;
  CrossoverKind kind = CrossoverKind::Bracketed;
  double fn_low = 0.0, fp_low = 0.0, fn_high = 0.0, fp_high = 0.0;
};

/// For each K in 1..k_max, where the failure-model FN and FP curves cross
/// as Th increases.
std::vector<Crossover> crossover_tuning(double t, double g, double f, double d, int n,
                                        int k_max);

/// Probe bandwidth per user in KB/s.
double bandwidth_overhead(double probes_per_usable, double probe_size_kb, double guards,
                          double interval_sec, double circuits_per_hour);

/// Guard-free selective DoS: t^2 / (t^2 + (1-t)^3).
double selective_dos_compromise_fraction(double t);

/// Guard-free: probability that a survivor's middle is honest.
double honest_middle_probability(double t);

}  // namespace sdosim::analytic
