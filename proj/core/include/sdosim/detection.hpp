#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sdosim/adversary.hpp"
#include "sdosim/circuit.hpp"
#include "sdosim/directory.hpp"
#include "sdosim/rng.hpp"

namespace sdosim {

/// Tunables of the two-phase filter: N working circuits, K probes per
/// evaluated circuit, acceptance threshold Th.
struct DetectionParams {
  int n = 10;
  int k = 3;
  int threshold = 2;

  /// Requires N >= 2, 1 <= K < N, 1 <= Th <= K.
  void validate() const;
};

struct Phase1Result {
  std::vector<Circuit> circuits;
  std::uint64_t attempts = 0;
  /// Attempts the adversary let through but the network failed.
  std::uint64_t network_failures = 0;
};

struct Phase1Options {
  PathOptions path;
  /// Maximum attempts before BudgetExceeded; 0 selects 1000 * N + 1000.
  std::uint64_t attempt_budget = 0;
};

/// Builds and tests random circuits until `n` of them work.
Phase1Result phase1(const Directory& dir, const GuardSet& guards,
                    const AdversaryStrategy& strategy, const Environment& env, int n, Rng& rng,
                    const Phase1Options& options = {});

/// Same, with entries drawn from all guard relays instead of a guard set.
Phase1Result phase1_unguarded(const Directory& dir, const AdversaryStrategy& strategy,
                              const Environment& env, int n, Rng& rng,
                              const Phase1Options& options = {});

struct Phase2Options {
  SamplingMode mode = SamplingMode::Realistic;
  bool randomize_middle = false;
};

struct CircuitVerdict {
  Circuit circuit;
  /// False when the circuit lapsed (network failure) before cross-checking;
  /// lapsed circuits are rejected and never used as candidates.
  bool live = true;
  int probes = 0;            // K' actually used
  int required = 0;          // Th' = min(Th, K')
  int successes = 0;
  bool accepted = false;
};

struct DetectionResult {
  std::vector<Circuit> accepted;
  std::vector<Circuit> rejected;
  /// One entry per phase-1 survivor, in phase-1 order.
  std::vector<CircuitVerdict> verdicts;
  std::uint64_t phase1_attempts = 0;
  std::uint64_t phase1_network_failures = 0;
  std::uint64_t phase2_probes = 0;
  std::size_t lapsed = 0;
  /// Evaluated circuits that had fewer than K eligible candidates.
  std::size_t shrunk = 0;
};

/// Cross-checks every live survivor against K' = min(K, eligible) other
/// live survivors' exits, drawn without replacement, and accepts it when at
/// least min(Th, K') probes succeed. Randomness is keyed by
/// (stream_seed, circuit index, probe index), so results do not depend on
/// evaluation order.
DetectionResult phase2(std::span<const Circuit> survivors, const DetectionParams& params,
                       const AdversaryStrategy& strategy, const Environment& env,
                       const Directory& dir, const Phase2Options& options,
                       std::uint64_t stream_seed);

struct DetectionConfig {
  double g = 1.0 / 3.0;
  std::size_t guard_count = 3;
  AdversaryStrategy strategy;
  Environment env;
  DetectionParams params;
  SamplingMode mode = SamplingMode::Realistic;
  bool randomize_middle = false;
  std::uint64_t seed = 1;
  std::uint64_t attempt_budget = 0;
};

/// Guard selection, phase 1 and phase 2 on an already-tagged directory.
/// Deterministic for a given seed.
DetectionResult run_detection(const Directory& tagged, const DetectionConfig& config);

/// Both phases with a caller-supplied guard set (config.g is ignored).
DetectionResult run_detection(const Directory& tagged, const GuardSet& guards,
                              const DetectionConfig& config);

}  // namespace sdosim
