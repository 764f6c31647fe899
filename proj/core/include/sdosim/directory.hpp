#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdosim/rng.hpp"

namespace sdosim {

using RelayIndex = std::uint32_t;

enum class Role : std::uint8_t { Guard = 0, Middle = 1, Exit = 2 };

inline constexpr std::array<Role, 3> kRoles{Role::Guard, Role::Middle, Role::Exit};

std::string_view to_string(Role role) noexcept;

struct RoleFlags {
  bool guard = false;
  bool exit = false;
  // Every relay in the (pre-filtered) population may serve as a middle.
  bool middle = true;
};

struct Relay {
  std::string id;
  double bandwidth = 0.0;
  RoleFlags flags;
  std::string subnet16;
  std::string family;  // empty when the relay declares no family
  bool compromised = false;

  bool has_role(Role role) const noexcept;
};

/// Outcome of tagging a bandwidth fraction as compromised. Discrete relays
/// rarely hit the target exactly, so the residual is kept with the directory.
struct TaggingReport {
  double target = 0.0;
  std::uint64_t seed = 0;
  std::array<double, 3> achieved{};  // indexed by Role

  double max_abs_error() const noexcept;
};

/// Immutable relay population with cached per-role bandwidth totals and
/// sampling tables. Safe for concurrent readers.
class Directory {
 public:
  /// Validates relays (positive bandwidth, unique non-empty ids, non-empty
  /// subnet, at least one role). Throws std::invalid_argument otherwise.
  explicit Directory(std::vector<Relay> relays,
                     std::optional<TaggingReport> tagging = std::nullopt);

  std::span<const Relay> relays() const noexcept { return relays_; }
  std::size_t size() const noexcept { return relays_.size(); }
  const Relay& operator[](RelayIndex i) const { return relays_[i]; }

  std::uint32_t subnet_key(RelayIndex i) const { return subnet_keys_[i]; }
  /// -1 when the relay has no family.
  std::int64_t family_key(RelayIndex i) const { return family_keys_[i]; }

  std::span<const RelayIndex> eligible(Role role) const noexcept {
    return by_role_[index(role)];
  }
  double total_bandwidth(Role role) const noexcept { return total_[index(role)]; }
  double compromised_bandwidth(Role role) const noexcept {
    return compromised_[index(role)];
  }
  double compromised_fraction(Role role) const noexcept;

  const std::optional<TaggingReport>& tagging() const noexcept { return tagging_; }

  /// Draws a relay of `role` proportionally to bandwidth, ignoring
  /// exclusions. Requires a non-empty role.
  RelayIndex draw(Role role, Rng& rng) const;

 private:
  static constexpr std::size_t index(Role r) noexcept { return static_cast<std::size_t>(r); }

  std::vector<Relay> relays_;
  std::vector<std::uint32_t> subnet_keys_;
  std::vector<std::int64_t> family_keys_;
  std::array<std::vector<RelayIndex>, 3> by_role_;
  std::array<std::vector<double>, 3> cumulative_;
  std::array<double, 3> total_{};
  std::array<double, 3> compromised_{};
  std::optional<TaggingReport> tagging_;
};

/// Relays that may not be picked for a hop: relays already in the circuit
/// and anything sharing their /16 or family.
class PathExclusions {
 public:
  PathExclusions() = default;

  /// Excludes each hop together with its /16 and family.
  static PathExclusions around(const Directory& dir,
                               std::initializer_list<RelayIndex> hops);

  void add_relay(RelayIndex relay);
  void add_subnet(std::uint32_t subnet);
  void add_family(std::int64_t family);
  void add_neighbourhood(const Directory& dir, RelayIndex relay);

  bool excludes(const Directory& dir, RelayIndex relay) const;
  bool empty() const noexcept {
    return relays_.empty() && subnets_.empty() && families_.empty();
  }

 private:
  std::vector<RelayIndex> relays_;
  std::vector<std::uint32_t> subnets_;
  std::vector<std::int64_t> families_;
};

/// True when two distinct relays may share a circuit (different /16 and
/// family).
bool path_compatible(const Directory& dir, RelayIndex a, RelayIndex b);

struct BandwidthDist {
  enum class Kind { Constant, Uniform, Pareto };

  Kind kind = Kind::Pareto;
  // Constant: a = value. Uniform: [a, b]. Pareto: a = shape, b = scale (minimum).
  double a = 1.5;
  double b = 50.0;

  static BandwidthDist constant(double value) { return {Kind::Constant, value, 0.0}; }
  static BandwidthDist uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
  static BandwidthDist pareto(double shape, double scale) {
    return {Kind::Pareto, shape, scale};
  }

  /// Parses "constant:V", "uniform:LO:HI" or "pareto:SHAPE:SCALE".
  static BandwidthDist parse(std::string_view text);

  /// Throws std::invalid_argument for non-positive or inverted parameters.
  void validate() const;
  std::string to_string() const;
};

/// Fractions of relays carrying each role combination; the remainder are
/// middle-only relays.
struct RoleMix {
  double guard_only = 0.30;
  double exit_only = 0.20;
  double guard_exit = 0.10;

  void validate() const;
};

/// Builds a deterministic synthetic population. Bandwidths are rounded to
/// positive integers so the result round-trips through the CSV format.
Directory synthesize_directory(std::size_t relays, const BandwidthDist& bandwidth,
                               const RoleMix& mix, std::uint64_t seed);

/// CSV schema: `id,bandwidth,guard,exit,subnet16,family`.
Directory load_directory(const std::filesystem::path& path);
Directory parse_directory(std::istream& in);
void write_directory(std::ostream& out, const Directory& dir);

/// Tags relays compromised so that each role's compromised bandwidth
/// fraction approximates t. Prior tags are discarded, so re-tagging with the
/// same seed is idempotent.
Directory tag_compromised(const Directory& dir, double t, std::uint64_t seed);

struct GuardSet {
  std::vector<RelayIndex> guards;
  std::size_t compromised_count = 0;

  double compromised_fraction() const noexcept {
    return guards.empty() ? 0.0
                          : static_cast<double>(compromised_count) /
                                static_cast<double>(guards.size());
  }
};

/// Picks exactly round(g*G) compromised and the rest honest guards,
/// bandwidth-weighted without replacement within each honesty class.
/// g*G must be an integer (within 1e-3, so 0.3333 is accepted for 1/3).
GuardSet select_guard_set(const Directory& dir, std::size_t guard_count, double g,
                          std::uint64_t seed);

/// Bandwidth-weighted draw of a relay with `role` that violates no
/// exclusion. Throws ConstraintError when nothing is eligible.
RelayIndex weighted_sample(const Directory& dir, Role role,
                           const PathExclusions& exclusions, Rng& rng);

}  // namespace sdosim
