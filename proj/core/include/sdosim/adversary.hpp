#pragma once

#include <cstdint>
#include <string_view>

#include "sdosim/circuit.hpp"
#include "sdosim/rng.hpp"

namespace sdosim {

enum class StrategyKind : std::uint8_t { None, SimpleSelective, Shrewd };

std::string_view to_string(StrategyKind k) noexcept;
/// Accepts "none", "simple" and "shrewd". Throws std::invalid_argument.
StrategyKind parse_strategy(std::string_view text);

/// Drop policy of the compromised relays.
///
/// SimpleSelective lets HHH and CXC through and drops every other pattern
/// with probability `drop_rate` (d = 1 is plain selective DoS). Shrewd also
/// always forwards HHC and HCC, and drops only HCH, CHH and CCH with
/// probability `drop_rate`.
struct AdversaryStrategy {
  StrategyKind kind = StrategyKind::SimpleSelective;
  double drop_rate = 1.0;

  /// Throws std::invalid_argument unless drop_rate is in [0, 1].
  void validate() const;
  /// True when this strategy ever drops circuits with pattern `p` (d > 0).
  bool targets(Pattern p) const noexcept;
};

struct Environment {
  double failure_rate = 0.23;

  void validate() const;
};

struct RetrievalOutcome {
  bool adversary_passed = true;
  bool network_ok = true;

  bool success() const noexcept { return adversary_passed && network_ok; }
};

/// Consumes exactly one uniform draw whatever the pattern and strategy, so
/// runs that differ only in strategy stay in lock-step.
bool circuit_survives_adversary(Pattern p, const AdversaryStrategy& strategy, Rng& rng);

/// Adversary decision, then an independent Bernoulli(1 - f) network gate.
/// Consumes exactly two draws.
RetrievalOutcome attempt_retrieval_detailed(Pattern p, const AdversaryStrategy& strategy,
                                            const Environment& env, Rng& rng);

inline bool attempt_retrieval(Pattern p, const AdversaryStrategy& strategy,
                              const Environment& env, Rng& rng) {
  return attempt_retrieval_detailed(p, strategy, env, rng).success();
}

/// The adversary links a user to a destination only on CXC circuits.
constexpr bool is_compromised_usage(CircuitClass c) noexcept {
  return c.kind == ClassKind::CXC;
}

}  // namespace sdosim
