#include "sdosim/adversary.hpp"

#include <stdexcept>
#include <string>

namespace sdosim {

std::string_view to_string(StrategyKind k) noexcept {
  switch (k) {
    case StrategyKind::None: return "none";
    case StrategyKind::SimpleSelective: return "simple";
    case StrategyKind::Shrewd: return "shrewd";
  }
  return "?";
}

StrategyKind parse_strategy(std::string_view text) {
  if (text == "none") return StrategyKind::None;
  if (text == "simple") return StrategyKind::SimpleSelective;
  if (text == "shrewd") return StrategyKind::Shrewd;
  throw std::invalid_argument("unknown strategy '" + std::string(text) +
                              "' (expected none, simple or shrewd)");
}

void AdversaryStrategy::validate() const {
  if (!(drop_rate >= 0.0 && drop_rate <= 1.0)) {
    throw std::invalid_argument("drop rate must be in [0, 1]");
  }
}

bool AdversaryStrategy::targets(Pattern p) const noexcept {
  switch (kind) {
    case StrategyKind::None:
      return false;
    case StrategyKind::SimpleSelective:
      return classify(p).kind == ClassKind::Other;
    case StrategyKind::Shrewd:
      // Anything ending in a compromised exit is let through, as is HHH.
      return p == Pattern::HCH || p == Pattern::CHH || p == Pattern::CCH;
  }
  return false;
}

void Environment::validate() const {
  if (!(failure_rate >= 0.0 && failure_rate < 1.0)) {
    throw std::invalid_argument("failure rate must be in [0, 1)");
  }
}

bool circuit_survives_adversary(Pattern p, const AdversaryStrategy& strategy, Rng& rng) {
  const double u = rng.uniform();
  return !(strategy.targets(p) && u < strategy.drop_rate);
}

RetrievalOutcome attempt_retrieval_detailed(Pattern p, const AdversaryStrategy& strategy,
                                            const Environment& env, Rng& rng) {
  RetrievalOutcome out;
  out.adversary_passed = circuit_survives_adversary(p, strategy, rng);
  out.network_ok = !rng.bernoulli(env.failure_rate);
  return out;
}

}  // namespace sdosim
