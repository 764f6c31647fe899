#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sdosim::cli {

/// Bad flag, config entry or value. Maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raw key -> value text, layered defaults < config file < flags.
using RawSettings = std::map<std::string, std::string>;

/// Keys accepted in config files and their matching flags.
const std::vector<std::string>& known_keys();

/// Parses `key = value` lines; `#` starts a comment. Unknown keys and
/// malformed lines raise UsageError naming the line.
RawSettings parse_config(std::string_view text, std::string_view source = "config");
RawSettings load_config(const std::filesystem::path& path);

/// "0.25", "1/3", ".5".
double parse_number(std::string_view text, std::string_view key);
/// Comma-separated scalars and `a:step:b` ranges.
std::vector<double> parse_number_list(std::string_view text, std::string_view key);

std::int64_t parse_integer(std::string_view text, std::string_view key);
/// Comma-separated integers, `a..b` and `a:step:b` ranges.
std::vector<int> parse_int_list(std::string_view text, std::string_view key);

/// Threshold spec: an integer list, or `a..K` meaning a..K for each K.
struct ThresholdSpec {
  std::vector<int> values;
  std::optional<int> up_to_k_from;

  /// Thresholds to use for a given K.
  std::vector<int> for_k(int k) const;
  /// Values covering every K up to k_max (for grid expansion).
  std::vector<int> flatten(int k_max) const;
};

ThresholdSpec parse_threshold(std::string_view text);

bool parse_bool(std::string_view text, std::string_view key);

/// FNV-1a, 64-bit.
std::uint64_t fnv1a(std::string_view data) noexcept;

}  // namespace sdosim::cli
