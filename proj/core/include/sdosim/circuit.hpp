#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "sdosim/directory.hpp"
#include "sdosim/rng.hpp"

namespace sdosim {

/// Honesty pattern of (entry, middle, exit); bit 2 = entry compromised,
/// bit 1 = middle, bit 0 = exit.
enum class Pattern : std::uint8_t { HHH = 0, HHC, HCH, HCC, CHH, CHC, CCH, CCC };

inline constexpr std::array<Pattern, 8> kPatterns{Pattern::HHH, Pattern::HHC, Pattern::HCH,
                                                  Pattern::HCC, Pattern::CHH, Pattern::CHC,
                                                  Pattern::CCH, Pattern::CCC};

constexpr Pattern pattern_of(bool entry, bool middle, bool exit) noexcept {
  return static_cast<Pattern>((entry ? 4 : 0) | (middle ? 2 : 0) | (exit ? 1 : 0));
}
constexpr bool entry_compromised(Pattern p) noexcept { return (static_cast<int>(p) & 4) != 0; }
constexpr bool middle_compromised(Pattern p) noexcept { return (static_cast<int>(p) & 2) != 0; }
constexpr bool exit_compromised(Pattern p) noexcept { return (static_cast<int>(p) & 1) != 0; }

std::string_view to_string(Pattern p) noexcept;

enum class ClassKind : std::uint8_t { HHH, CXC, Other };

std::string_view to_string(ClassKind k) noexcept;

/// CXC iff entry and exit are compromised (the middle never matters);
/// HHH iff all honest; everything else is Other and keeps its pattern.
struct CircuitClass {
  ClassKind kind;
  Pattern pattern;

  friend constexpr bool operator==(CircuitClass, CircuitClass) = default;
};

constexpr CircuitClass classify(Pattern p) noexcept {
  if (entry_compromised(p) && exit_compromised(p)) return {ClassKind::CXC, p};
  if (p == Pattern::HHH) return {ClassKind::HHH, p};
  return {ClassKind::Other, p};
}

struct Hop {
  RelayIndex relay = 0;
  bool compromised = false;

  friend constexpr bool operator==(Hop, Hop) = default;
};

Hop hop_of(const Directory& dir, RelayIndex relay);

struct Circuit {
  Hop entry;
  Hop middle;
  Hop exit;

  Pattern pattern() const noexcept {
    return pattern_of(entry.compromised, middle.compromised, exit.compromised);
  }

  friend constexpr bool operator==(const Circuit&, const Circuit&) = default;
};

inline CircuitClass classify(const Circuit& c) noexcept { return classify(c.pattern()); }

/// Analytic-matching draws hops with replacement and ignores /16 and family
/// constraints. Realistic enforces every constraint. Both pick the entry
/// uniformly from the guard set.
enum class SamplingMode : std::uint8_t { AnalyticMatching, Realistic };

std::string_view to_string(SamplingMode m) noexcept;

struct PathOptions {
  SamplingMode mode = SamplingMode::Realistic;
  int max_retries = 100;
};

/// Builds a circuit whose entry comes from `guards`.
Circuit build_circuit(const Directory& dir, const GuardSet& guards, Rng& rng,
                      const PathOptions& options = {});

/// Builds a circuit whose entry is drawn from every guard-flagged relay
/// (no fixed guard set), as in the guard-free compromise model.
Circuit build_unguarded_circuit(const Directory& dir, Rng& rng,
                                const PathOptions& options = {});

/// Phase-2 probe: the base circuit with its exit replaced by a candidate's
/// exit and, optionally, a different middle.
struct ProbeCircuit {
  Circuit base;
  Hop swapped_exit;
  std::optional<Hop> swapped_middle;

  Circuit circuit() const noexcept {
    return {base.entry, swapped_middle.value_or(base.middle), swapped_exit};
  }
  CircuitClass classify() const noexcept { return sdosim::classify(circuit()); }
};

/// Checks constraints only against the hops the probe keeps. In realistic
/// mode the new exit must differ from the base exit and be path-compatible
/// with the entry and the middle in use; violations throw ConstraintError.
ProbeCircuit make_probe_circuit(const Directory& dir, const Circuit& base,
                                RelayIndex candidate_exit,
                                std::optional<RelayIndex> middle, SamplingMode mode);

}  // namespace sdosim
