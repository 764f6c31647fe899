#include "sdosim/circuit.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "sdosim/errors.hpp"

namespace sdosim {
namespace {

// Uniform over the guard set in both modes, so the entry is compromised
// with probability exactly g.
RelayIndex draw_entry(const GuardSet& guards, Rng& rng) {
  return guards.guards[rng.below(guards.guards.size())];
}

template <typename EntryFn>
Circuit build_with(const Directory& dir, Rng& rng, const PathOptions& options,
                   EntryFn&& draw_entry_relay) {
  if (options.mode == SamplingMode::AnalyticMatching) {
    const RelayIndex entry = draw_entry_relay();
    const RelayIndex exit = dir.draw(Role::Exit, rng);
    const RelayIndex middle = dir.draw(Role::Middle, rng);
    return {hop_of(dir, entry), hop_of(dir, middle), hop_of(dir, exit)};
  }

  const int attempts = std::max(1, options.max_retries);
  for (int attempt = 1;; ++attempt) {
    const RelayIndex entry = draw_entry_relay();
    try {
      // Tor picks the exit first; entry is fixed by the guard set here.
      const RelayIndex exit =
          weighted_sample(dir, Role::Exit, PathExclusions::around(dir, {entry}), rng);
      const RelayIndex middle =
          weighted_sample(dir, Role::Middle, PathExclusions::around(dir, {entry, exit}), rng);
      return {hop_of(dir, entry), hop_of(dir, middle), hop_of(dir, exit)};
    } catch (const ConstraintError&) {
      if (attempt >= attempts) {
        throw ConstraintError("circuit construction exhausted " + std::to_string(attempts) +
                              " retries: no eligible middle/exit");
      }
    }
  }
}

}  // namespace

std::string_view to_string(Pattern p) noexcept {
  static constexpr std::array<std::string_view, 8> names{"HHH", "HHC", "HCH", "HCC",
                                                         "CHH", "CHC", "CCH", "CCC"};
  return names[static_cast<std::size_t>(p)];
}

std::string_view to_string(ClassKind k) noexcept {
  switch (k) {
    case ClassKind::HHH: return "HHH";
    case ClassKind::CXC: return "CXC";
    case ClassKind::Other: return "Other";
  }
  return "?";
}

std::string_view to_string(SamplingMode m) noexcept {
  return m == SamplingMode::AnalyticMatching ? "match" : "realistic";
}

Hop hop_of(const Directory& dir, RelayIndex relay) { return {relay, dir[relay].compromised}; }

Circuit build_circuit(const Directory& dir, const GuardSet& guards, Rng& rng,
                      const PathOptions& options) {
  if (guards.guards.empty()) throw std::invalid_argument("guard set is empty");
  return build_with(dir, rng, options,
                    [&] { return draw_entry(guards, rng); });
}

Circuit build_unguarded_circuit(const Directory& dir, Rng& rng, const PathOptions& options) {
  return build_with(dir, rng, options, [&] { return dir.draw(Role::Guard, rng); });
}

ProbeCircuit make_probe_circuit(const Directory& dir, const Circuit& base,
                                RelayIndex candidate_exit, std::optional<RelayIndex> middle,
                                SamplingMode mode) {
  if (candidate_exit >= dir.size() || (middle && *middle >= dir.size())) {
    throw std::invalid_argument("relay index out of range");
  }
  if (!dir[candidate_exit].flags.exit) {
    throw ConstraintError("candidate relay '" + dir[candidate_exit].id + "' is not an exit");
  }
  const RelayIndex middle_relay = middle.value_or(base.middle.relay);

  if (mode == SamplingMode::Realistic) {
    if (candidate_exit == base.exit.relay) {
      throw ConstraintError("candidate exit equals the evaluated circuit's exit");
    }
    if (!path_compatible(dir, base.entry.relay, candidate_exit)) {
      throw ConstraintError("candidate exit shares /16 or family with the entry");
    }
    if (!path_compatible(dir, middle_relay, candidate_exit)) {
      throw ConstraintError("candidate exit shares /16 or family with the middle");
    }
    if (middle && !path_compatible(dir, base.entry.relay, *middle)) {
      throw ConstraintError("randomized middle shares /16 or family with the entry");
    }
  }

  ProbeCircuit probe{base, hop_of(dir, candidate_exit), std::nullopt};
  if (middle) probe.swapped_middle = hop_of(dir, *middle);
  return probe;
}

}  // namespace sdosim
