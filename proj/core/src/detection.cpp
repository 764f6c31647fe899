#include "sdosim/detection.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "sdosim/errors.hpp"

namespace sdosim {
namespace {

// Stream tags for phase-2 randomness.
constexpr std::uint64_t kLiveness = 1;
constexpr std::uint64_t kCandidates = 2;
constexpr std::uint64_t kProbe = 3;

template <typename Build>
Phase1Result run_phase1(const AdversaryStrategy& strategy, const Environment& env, int n,
                        Rng& rng, const Phase1Options& options, Build&& build) {
  if (n < 1) throw std::invalid_argument("phase 1 needs N >= 1");
  strategy.validate();
  env.validate();
  const std::uint64_t budget =
      options.attempt_budget > 0 ? options.attempt_budget
                                 : 1000 * static_cast<std::uint64_t>(n) + 1000;

  Phase1Result out;
  out.circuits.reserve(static_cast<std::size_t>(n));
  while (out.circuits.size() < static_cast<std::size_t>(n)) {
    if (out.attempts >= budget) {
      throw BudgetExceeded("phase 1 collected " + std::to_string(out.circuits.size()) + " of " +
                           std::to_string(n) + " working circuits in " +
                           std::to_string(budget) + " attempts");
    }
    ++out.attempts;
    const Circuit c = build();
    const auto outcome = attempt_retrieval_detailed(c.pattern(), strategy, env, rng);
    if (outcome.success()) {
      out.circuits.push_back(c);
    } else if (outcome.adversary_passed) {
      ++out.network_failures;
    }
  }
  return out;
}

RelayIndex pick_probe_middle(const Directory& dir, const Circuit& base, RelayIndex exit,
                             const std::vector<RelayIndex>& pool_middles,
                             std::vector<RelayIndex>& used, SamplingMode mode, Rng& rng) {
  const bool realistic = mode == SamplingMode::Realistic;
  std::vector<RelayIndex> options;
  for (RelayIndex m : pool_middles) {
    if (std::find(used.begin(), used.end(), m) != used.end()) continue;
    if (realistic && (!path_compatible(dir, base.entry.relay, m) ||
                      !path_compatible(dir, m, exit))) {
      continue;
    }
    options.push_back(m);
  }
  RelayIndex chosen = 0;
  if (!options.empty()) {
    chosen = options[rng.below(options.size())];
  } else if (realistic) {
    PathExclusions ex = PathExclusions::around(dir, {base.entry.relay, exit});
    for (RelayIndex u : used) ex.add_relay(u);
    chosen = weighted_sample(dir, Role::Middle, ex, rng);
  } else {
    chosen = dir.draw(Role::Middle, rng);
  }
  used.push_back(chosen);
  return chosen;
}

}  // namespace

void DetectionParams::validate() const {
  if (n < 2) throw std::invalid_argument("N must be at least 2");
  if (k < 1 || k >= n) throw std::invalid_argument("K must satisfy 1 <= K < N");
  if (threshold < 1 || threshold > k) {
    throw std::invalid_argument("Th must satisfy 1 <= Th <= K");
  }
}

Phase1Result phase1(const Directory& dir, const GuardSet& guards,
                    const AdversaryStrategy& strategy, const Environment& env, int n, Rng& rng,
                    const Phase1Options& options) {
  return run_phase1(strategy, env, n, rng, options,
                    [&] { return build_circuit(dir, guards, rng, options.path); });
}

Phase1Result phase1_unguarded(const Directory& dir, const AdversaryStrategy& strategy,
                              const Environment& env, int n, Rng& rng,
                              const Phase1Options& options) {
  return run_phase1(strategy, env, n, rng, options,
                    [&] { return build_unguarded_circuit(dir, rng, options.path); });
}

DetectionResult phase2(std::span<const Circuit> survivors, const DetectionParams& params,
                       const AdversaryStrategy& strategy, const Environment& env,
                       const Directory& dir, const Phase2Options& options,
                       std::uint64_t stream_seed) {
  if (survivors.size() < 2) throw std::invalid_argument("phase 2 needs at least 2 survivors");
  if (params.k < 1 || params.threshold < 1 || params.threshold > params.k) {
    throw std::invalid_argument("phase 2 needs 1 <= Th <= K");
  }
  strategy.validate();
  env.validate();

  const bool realistic = options.mode == SamplingMode::Realistic;
  const std::size_t count = survivors.size();

  DetectionResult result;
  result.verdicts.reserve(count);

  // Circuits that passed phase 1 may still fail before they are cross-checked.
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = Rng::stream(stream_seed, {kLiveness, i});
    CircuitVerdict v;
    v.circuit = survivors[i];
    v.live = !rng.bernoulli(env.failure_rate);
    if (v.live) {
      live.push_back(i);
    } else {
      ++result.lapsed;
    }
    result.verdicts.push_back(v);
  }

  std::vector<RelayIndex> pool_middles;
  if (options.randomize_middle) {
    for (std::size_t i : live) {
      const RelayIndex m = survivors[i].middle.relay;
      if (std::find(pool_middles.begin(), pool_middles.end(), m) == pool_middles.end()) {
        pool_middles.push_back(m);
      }
    }
  }

  std::vector<std::size_t> eligible;
  std::vector<RelayIndex> used_middles;
  for (std::size_t i : live) {
    const Circuit& x = survivors[i];
    CircuitVerdict& verdict = result.verdicts[i];

    eligible.clear();
    for (std::size_t j : live) {
      if (j == i) continue;
      const RelayIndex exit = survivors[j].exit.relay;
      if (realistic) {
        if (exit == x.exit.relay || !path_compatible(dir, x.entry.relay, exit)) continue;
        if (!options.randomize_middle && !path_compatible(dir, x.middle.relay, exit)) continue;
      }
      eligible.push_back(j);
    }

    const int k_eff = std::min<int>(params.k, static_cast<int>(eligible.size()));
    const int th_eff = std::min(params.threshold, k_eff);
    if (k_eff < params.k) ++result.shrunk;

    // Partial Fisher-Yates: the first k_eff slots are a uniform sample
    // without replacement.
    Rng pick = Rng::stream(stream_seed, {kCandidates, i});
    for (int s = 0; s < k_eff; ++s) {
      const auto u = static_cast<std::size_t>(s);
      std::swap(eligible[u], eligible[u + pick.below(eligible.size() - u)]);
    }

    used_middles.clear();
    int successes = 0;
    for (int s = 0; s < k_eff; ++s) {
      const RelayIndex exit = survivors[eligible[static_cast<std::size_t>(s)]].exit.relay;
      std::optional<RelayIndex> middle;
      if (options.randomize_middle) {
        middle = pick_probe_middle(dir, x, exit, pool_middles, used_middles, options.mode, pick);
      }
      const ProbeCircuit probe = make_probe_circuit(dir, x, exit, middle, options.mode);
      Rng probe_rng = Rng::stream(stream_seed, {kProbe, i, static_cast<std::uint64_t>(s)});
      if (attempt_retrieval(probe.circuit().pattern(), strategy, env, probe_rng)) {
        ++successes;
      }
    }

    verdict.probes = k_eff;
    verdict.required = th_eff;
    verdict.successes = successes;
    verdict.accepted = successes >= th_eff;
    result.phase2_probes += static_cast<std::uint64_t>(k_eff);
  }

  for (const CircuitVerdict& v : result.verdicts) {
    (v.accepted ? result.accepted : result.rejected).push_back(v.circuit);
  }
  return result;
}

DetectionResult run_detection(const Directory& tagged, const GuardSet& guards,
                              const DetectionConfig& config) {
  config.params.validate();
  Rng rng = Rng::stream(config.seed, {0x9a5e1});
  Phase1Options p1;
  p1.path.mode = config.mode;
  p1.attempt_budget = config.attempt_budget;
  const Phase1Result first =
      phase1(tagged, guards, config.strategy, config.env, config.params.n, rng, p1);

  DetectionResult result =
      phase2(first.circuits, config.params, config.strategy, config.env, tagged,
             Phase2Options{config.mode, config.randomize_middle},
             derive_seed(config.seed, {0x9a5e2}));
  result.phase1_attempts = first.attempts;
  result.phase1_network_failures = first.network_failures;
  return result;
}

DetectionResult run_detection(const Directory& tagged, const DetectionConfig& config) {
  const GuardSet guards = select_guard_set(tagged, config.guard_count, config.g,
                                           derive_seed(config.seed, {0x6a7d5e7}));
  return run_detection(tagged, guards, config);
}

}  // namespace sdosim
