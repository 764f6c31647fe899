#include "sdosim/directory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <limits>

#include "sdosim/errors.hpp"

namespace sdosim {
namespace {

constexpr std::string_view kCsvHeader = "id,bandwidth,guard,exit,subnet16,family";

// Rejection draws before falling back to an exact scan of the eligible set.
constexpr int kRejectionTries = 64;

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw std::invalid_argument("invalid " + std::string(what) + " '" +
                                std::string(text) + "'");
  }
  return value;
}

// Fisher-Yates with our own generator so the order is bit-stable.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[rng.below(i)]);
  }
}

// Disjoint role classes used for tagging: every role is a union of them, so
// hitting t in each class hits t in each role.
enum class RoleClass { GuardOnly, ExitOnly, GuardExit, MiddleOnly };

RoleClass role_class(const Relay& r) {
  if (r.flags.guard && r.flags.exit) return RoleClass::GuardExit;
  if (r.flags.guard) return RoleClass::GuardOnly;
  if (r.flags.exit) return RoleClass::ExitOnly;
  return RoleClass::MiddleOnly;
}

}  // namespace

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::Guard: return "guard";
    case Role::Middle: return "middle";
    case Role::Exit: return "exit";
  }
  return "?";
}

bool Relay::has_role(Role role) const noexcept {
  switch (role) {
    case Role::Guard: return flags.guard;
    case Role::Middle: return flags.middle;
    case Role::Exit: return flags.exit;
  }
  return false;
}

double TaggingReport::max_abs_error() const noexcept {
  double worst = 0.0;
  for (double a : achieved) worst = std::max(worst, std::abs(a - target));
  return worst;
}

Directory::Directory(std::vector<Relay> relays, std::optional<TaggingReport> tagging)
    : relays_(std::move(relays)), tagging_(std::move(tagging)) {
  if (relays_.empty()) throw std::invalid_argument("directory has no relays");
  if (relays_.size() > std::numeric_limits<RelayIndex>::max()) {
    throw std::invalid_argument("directory too large");
  }

  std::unordered_set<std::string> ids;
  std::unordered_map<std::string, std::uint32_t> subnets;
  std::unordered_map<std::string, std::int64_t> families;
  subnet_keys_.reserve(relays_.size());
  family_keys_.reserve(relays_.size());

  for (std::size_t i = 0; i < relays_.size(); ++i) {
    const Relay& r = relays_[i];
    if (r.id.empty()) throw std::invalid_argument("relay with empty id");
    if (!ids.insert(r.id).second) {
      throw std::invalid_argument("duplicate relay id '" + r.id + "'");
    }
    if (!(r.bandwidth > 0.0) || !std::isfinite(r.bandwidth)) {
      throw std::invalid_argument("relay '" + r.id + "' has non-positive bandwidth");
    }
    if (!r.flags.guard && !r.flags.exit && !r.flags.middle) {
      throw std::invalid_argument("relay '" + r.id + "' has no role");
    }
    if (r.subnet16.empty()) {
      throw std::invalid_argument("relay '" + r.id + "' has empty subnet16");
    }
    subnet_keys_.push_back(
        subnets.try_emplace(r.subnet16, static_cast<std::uint32_t>(subnets.size()))
            .first->second);
    family_keys_.push_back(
        r.family.empty()
            ? -1
            : families.try_emplace(r.family, static_cast<std::int64_t>(families.size()))
                  .first->second);

    for (Role role : kRoles) {
      if (!r.has_role(role)) continue;
      const auto k = index(role);
      by_role_[k].push_back(static_cast<RelayIndex>(i));
      total_[k] += r.bandwidth;
      cumulative_[k].push_back(total_[k]);
      if (r.compromised) compromised_[k] += r.bandwidth;
    }
  }
}

double Directory::compromised_fraction(Role role) const noexcept {
  const double total = total_bandwidth(role);
  return total > 0.0 ? compromised_bandwidth(role) / total : 0.0;
}

RelayIndex Directory::draw(Role role, Rng& rng) const {
  const auto k = index(role);
  const auto& cum = cumulative_[k];
  if (cum.empty()) {
    throw ConstraintError("no relay has role " + std::string(to_string(role)));
  }
  const double x = rng.uniform() * total_[k];
  auto it = std::upper_bound(cum.begin(), cum.end(), x);
  if (it == cum.end()) --it;
  return by_role_[k][static_cast<std::size_t>(it - cum.begin())];
}

PathExclusions PathExclusions::around(const Directory& dir,
                                      std::initializer_list<RelayIndex> hops) {
  PathExclusions ex;
  for (RelayIndex hop : hops) ex.add_neighbourhood(dir, hop);
  return ex;
}

void PathExclusions::add_relay(RelayIndex relay) { relays_.push_back(relay); }
void PathExclusions::add_subnet(std::uint32_t subnet) { subnets_.push_back(subnet); }
void PathExclusions::add_family(std::int64_t family) {
  if (family >= 0) families_.push_back(family);
}

void PathExclusions::add_neighbourhood(const Directory& dir, RelayIndex relay) {
  add_relay(relay);
  add_subnet(dir.subnet_key(relay));
  add_family(dir.family_key(relay));
}

bool PathExclusions::excludes(const Directory& dir, RelayIndex relay) const {
  if (std::find(relays_.begin(), relays_.end(), relay) != relays_.end()) return true;
  if (std::find(subnets_.begin(), subnets_.end(), dir.subnet_key(relay)) != subnets_.end()) {
    return true;
  }
  const auto fam = dir.family_key(relay);
  return fam >= 0 && std::find(families_.begin(), families_.end(), fam) != families_.end();
}

bool path_compatible(const Directory& dir, RelayIndex a, RelayIndex b) {
  if (a == b) return false;
  if (dir.subnet_key(a) == dir.subnet_key(b)) return false;
  const auto fa = dir.family_key(a);
  return fa < 0 || fa != dir.family_key(b);
}

RelayIndex weighted_sample(const Directory& dir, Role role,
                           const PathExclusions& exclusions, Rng& rng) {
  if (exclusions.empty()) return dir.draw(role, rng);
  for (int i = 0; i < kRejectionTries; ++i) {
    const RelayIndex r = dir.draw(role, rng);
    if (!exclusions.excludes(dir, r)) return r;
  }
  // Most of the role's bandwidth is excluded: sample exactly from the rest.
  double total = 0.0;
  for (RelayIndex r : dir.eligible(role)) {
    if (!exclusions.excludes(dir, r)) total += dir[r].bandwidth;
  }
  if (total <= 0.0) {
    throw ConstraintError("no eligible " + std::string(to_string(role)) +
                          " relay after path exclusions");
  }
  double x = rng.uniform() * total;
  RelayIndex last = 0;
  for (RelayIndex r : dir.eligible(role)) {
    if (exclusions.excludes(dir, r)) continue;
    last = r;
    x -= dir[r].bandwidth;
    if (x < 0.0) return r;
  }
  return last;
}

BandwidthDist BandwidthDist::parse(std::string_view text) {
  const auto parts = split(text, ':');
  BandwidthDist dist;
  const auto& name = parts.front();
  if (name == "constant" && parts.size() == 2) {
    dist = constant(parse_double(parts[1], "bandwidth value"));
  } else if (name == "uniform" && parts.size() == 3) {
    dist = uniform(parse_double(parts[1], "uniform low"),
                   parse_double(parts[2], "uniform high"));
  } else if (name == "pareto" && parts.size() == 3) {
    dist = pareto(parse_double(parts[1], "pareto shape"),
                  parse_double(parts[2], "pareto scale"));
  } else {
    throw std::invalid_argument("invalid bandwidth distribution '" + std::string(text) +
                                "' (expected constant:V, uniform:LO:HI or pareto:SHAPE:SCALE)");
  }
  dist.validate();
  return dist;
}

void BandwidthDist::validate() const {
  switch (kind) {
    case Kind::Constant:
      if (!(a >= 1.0)) throw std::invalid_argument("constant bandwidth must be >= 1");
      return;
    case Kind::Uniform:
      if (!(a >= 1.0) || !(b >= a)) {
        throw std::invalid_argument("uniform bandwidth needs 1 <= low <= high");
      }
      return;
    case Kind::Pareto:
      if (!(a > 0.0) || !(b >= 1.0)) {
        throw std::invalid_argument("pareto bandwidth needs shape > 0 and scale >= 1");
      }
      return;
  }
}

std::string BandwidthDist::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Constant: os << "constant:" << a; break;
    case Kind::Uniform: os << "uniform:" << a << ':' << b; break;
    case Kind::Pareto: os << "pareto:" << a << ':' << b; break;
  }
  return os.str();
}

void RoleMix::validate() const {
  for (double f : {guard_only, exit_only, guard_exit}) {
    if (!(f >= 0.0) || f > 1.0) throw std::invalid_argument("role fractions must be in [0, 1]");
  }
  if (guard_only + exit_only + guard_exit > 1.0 + 1e-12) {
    throw std::invalid_argument("role fractions sum to more than 1");
  }
}

Directory synthesize_directory(std::size_t relays, const BandwidthDist& bandwidth,
                               const RoleMix& mix, std::uint64_t seed) {
  if (relays < 10) throw std::invalid_argument("synthetic directory needs at least 10 relays");
  bandwidth.validate();
  mix.validate();

  Rng rng = Rng::stream(seed, {0x5e1a75});
  const auto count = [relays](double frac) {
    return static_cast<std::size_t>(std::llround(frac * static_cast<double>(relays)));
  };

  // Exact role counts, then a shuffle; keeps role totals within 1/n of the mix.
  std::vector<RoleFlags> roles;
  roles.reserve(relays);
  roles.insert(roles.end(), count(mix.guard_exit), RoleFlags{true, true, true});
  roles.insert(roles.end(), count(mix.guard_only), RoleFlags{true, false, true});
  roles.insert(roles.end(), count(mix.exit_only), RoleFlags{false, true, true});
  if (roles.size() > relays) roles.resize(relays);
  roles.resize(relays, RoleFlags{false, false, true});
  shuffle(roles, rng);

  const std::size_t subnet_count = std::max<std::size_t>(2, relays / 2);

  std::vector<Relay> out(relays);
  for (std::size_t i = 0; i < relays; ++i) {
    Relay& r = out[i];
    r.id = "relay" + std::to_string(i);
    r.flags = roles[i];

    double bw = 0.0;
    switch (bandwidth.kind) {
      case BandwidthDist::Kind::Constant: bw = bandwidth.a; break;
      case BandwidthDist::Kind::Uniform:
        bw = bandwidth.a + rng.uniform() * (bandwidth.b - bandwidth.a);
        break;
      case BandwidthDist::Kind::Pareto:
        // Inverse CDF; 1 - u lies in (0, 1].
        bw = bandwidth.b * std::pow(1.0 - rng.uniform(), -1.0 / bandwidth.a);
        bw = std::min(bw, bandwidth.b * 1e4);
        break;
    }
    r.bandwidth = std::max(1.0, std::round(bw));

    const std::size_t subnet = rng.below(subnet_count);
    r.subnet16 = std::to_string(10 + subnet / 256) + "." + std::to_string(subnet % 256);
  }

  // About 5% of relays belong to small operator families of 2 or 3.
  std::vector<std::size_t> order(relays);
  for (std::size_t i = 0; i < relays; ++i) order[i] = i;
  shuffle(order, rng);
  const std::size_t family_members = relays / 20;
  std::size_t family_id = 0;
  for (std::size_t pos = 0; pos + 1 < family_members;) {
    const std::size_t size = 2 + rng.below(2);
    for (std::size_t j = 0; j < size && pos < family_members; ++j, ++pos) {
      out[order[pos]].family = "fam" + std::to_string(family_id);
    }
    ++family_id;
  }

  return Directory(std::move(out));
}

Directory parse_directory(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;

  const auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line()) throw SchemaError(1, "missing header");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (line != kCsvHeader) {
    throw SchemaError(line_no, "expected header '" + std::string(kCsvHeader) + "'");
  }

  std::vector<Relay> relays;
  std::unordered_set<std::string> ids;
  while (next_line()) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 6) {
      throw SchemaError(line_no, "expected 6 fields, found " + std::to_string(fields.size()));
    }
    Relay r;
    r.id = std::string(fields[0]);
    if (r.id.empty()) throw SchemaError(line_no, "empty id");
    if (!ids.insert(r.id).second) throw SchemaError(line_no, "duplicate id '" + r.id + "'");

    std::uint64_t bw = 0;
    const auto bwf = fields[1];
    const auto [ptr, ec] = std::from_chars(bwf.data(), bwf.data() + bwf.size(), bw);
    if (ec != std::errc{} || ptr != bwf.data() + bwf.size() || bw == 0) {
      throw SchemaError(line_no, "bandwidth must be a positive integer, got '" +
                                     std::string(bwf) + "'");
    }
    r.bandwidth = static_cast<double>(bw);

    const auto flag = [&](std::string_view f, std::string_view name) {
      if (f == "0") return false;
      if (f == "1") return true;
      throw SchemaError(line_no, std::string(name) + " must be 0 or 1, got '" +
                                     std::string(f) + "'");
    };
    r.flags.guard = flag(fields[2], "guard");
    r.flags.exit = flag(fields[3], "exit");
    r.subnet16 = std::string(fields[4]);
    if (r.subnet16.empty()) throw SchemaError(line_no, "empty subnet16");
    r.family = std::string(fields[5]);
    relays.push_back(std::move(r));
  }
  if (relays.empty()) throw SchemaError(line_no, "no relay rows");
  return Directory(std::move(relays));
}

Directory load_directory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open directory file '" + path.string() + "'");
  return parse_directory(in);
}

void write_directory(std::ostream& out, const Directory& dir) {
  out << kCsvHeader << '\n';
  for (const Relay& r : dir.relays()) {
    out << r.id << ',' << static_cast<std::uint64_t>(std::llround(r.bandwidth)) << ','
        << (r.flags.guard ? 1 : 0) << ',' << (r.flags.exit ? 1 : 0) << ',' << r.subnet16
        << ',' << r.family << '\n';
  }
}

Directory tag_compromised(const Directory& dir, double t, std::uint64_t seed) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("t must be in [0, 1]");

  std::vector<Relay> relays(dir.relays().begin(), dir.relays().end());
  std::array<std::vector<std::size_t>, 4> classes;
  for (std::size_t i = 0; i < relays.size(); ++i) {
    relays[i].compromised = false;
    classes[static_cast<std::size_t>(role_class(relays[i]))].push_back(i);
  }

  for (std::size_t c = 0; c < classes.size(); ++c) {
    auto& members = classes[c];
    Rng rng = Rng::stream(seed, {0x7a66, c});
    shuffle(members, rng);
    double total = 0.0;
    for (auto i : members) total += relays[i].bandwidth;
    const double target = t * total;
    // Take a relay whenever it moves the running sum closer to the target.
    double tagged = 0.0;
    for (auto i : members) {
      const double bw = relays[i].bandwidth;
      if (tagged + 0.5 * bw < target) {
        relays[i].compromised = true;
        tagged += bw;
      }
    }
  }

  Directory tagged(std::move(relays));
  TaggingReport report;
  report.target = t;
  report.seed = seed;
  for (Role role : kRoles) {
    report.achieved[static_cast<std::size_t>(role)] = tagged.compromised_fraction(role);
  }
  std::vector<Relay> copy(tagged.relays().begin(), tagged.relays().end());
  return Directory(std::move(copy), report);
}

GuardSet select_guard_set(const Directory& dir, std::size_t guard_count, double g,
                          std::uint64_t seed) {
  if (guard_count == 0) throw std::invalid_argument("guard set size must be positive");
  if (!(g >= 0.0 && g <= 1.0)) throw std::invalid_argument("g must be in [0, 1]");
  const double want = g * static_cast<double>(guard_count);
  const double rounded = std::round(want);
  if (std::abs(want - rounded) > 1e-3) {
    throw std::invalid_argument("g * G must be an integer (g=" + std::to_string(g) +
                                ", G=" + std::to_string(guard_count) + ")");
  }
  const auto bad = static_cast<std::size_t>(rounded);

  std::vector<RelayIndex> compromised, honest;
  for (RelayIndex r : dir.eligible(Role::Guard)) {
    (dir[r].compromised ? compromised : honest).push_back(r);
  }
  if (compromised.size() < bad || honest.size() < guard_count - bad) {
    throw ConstraintError("insufficient eligible guards for G=" +
                          std::to_string(guard_count) + ", g=" + std::to_string(g));
  }

  Rng rng = Rng::stream(seed, {0x6a7d});
  const auto pick = [&](std::vector<RelayIndex>& pool, std::size_t n, GuardSet& out) {
    for (std::size_t k = 0; k < n; ++k) {
      double total = 0.0;
      for (RelayIndex r : pool) total += dir[r].bandwidth;
      double x = rng.uniform() * total;
      std::size_t chosen = pool.size() - 1;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        x -= dir[pool[i]].bandwidth;
        if (x < 0.0) {
          chosen = i;
          break;
        }
      }
      out.guards.push_back(pool[chosen]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(chosen));
    }
  };

  GuardSet set;
  pick(compromised, bad, set);
  pick(honest, guard_count - bad, set);
  set.compromised_count = bad;
  return set;
}

}  // namespace sdosim
