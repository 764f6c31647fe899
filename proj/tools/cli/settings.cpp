#include "cli/settings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sdosim::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view text, std::string_view why) {
  throw UsageError("invalid value '" + std::string(text) + "' for " + std::string(key) + ": " +
                   std::string(why));
}

double plain_number(std::string_view text, std::string_view key) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    bad_value(key, text, "not a number");
  }
  return v;
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "t",      "g",        "f",      "d",         "N",         "K",       "Th",
      "trials", "seed",     "strategy", "mode",    "randomize_middle", "dir", "relays",
      "bandwidth", "guards", "threads", "out"};
  return keys;
}

RawSettings parse_config(std::string_view text, std::string_view source) {
  RawSettings out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? end : end - start);
    ++line_no;
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    const auto where = [&] { return std::string(source) + " line " + std::to_string(line_no); };
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw UsageError(where() + ": expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    std::replace(key.begin(), key.end(), '-', '_');
    const std::string value(trim(line.substr(eq + 1)));
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw UsageError(where() + ": unknown key '" + key + "'");
    }
    if (value.empty()) throw UsageError(where() + ": empty value for '" + key + "'");
    if (out.count(key)) throw UsageError(where() + ": duplicate key '" + key + "'");
    out[key] = value;
  }
  return out;
}

RawSettings load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

double parse_number(std::string_view text, std::string_view key) {
  text = trim(text);
  if (text.empty()) bad_value(key, text, "empty");
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const double num = plain_number(trim(text.substr(0, slash)), key);
    const double den = plain_number(trim(text.substr(slash + 1)), key);
    if (den == 0.0) bad_value(key, text, "zero denominator");
    return num / den;
  }
  return plain_number(text, key);
}

std::vector<double> parse_number_list(std::string_view text, std::string_view key) {
  std::vector<double> out;
  for (std::string_view item : split(text, ',')) {
    if (item.empty()) bad_value(key, text, "empty list item");
    const auto parts = split(item, ':');
    if (parts.size() == 1) {
      out.push_back(parse_number(item, key));
    } else if (parts.size() == 3) {
      const double a = parse_number(parts[0], key);
      const double step = parse_number(parts[1], key);
      const double b = parse_number(parts[2], key);
      if (!(step > 0.0) || b < a) bad_value(key, item, "range needs a <= b and step > 0");
      const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
      if (count > 100000) bad_value(key, item, "range too long");
      for (long i = 0; i <= count; ++i) {
        // Snap to 12 decimals so 0:0.1:1 yields 0.3 rather than 0.30000000000000004.
        const double v = a + static_cast<double>(i) * step;
        out.push_back(std::round(v * 1e12) / 1e12);
      }
    } else {
      bad_value(key, item, "expected a number or a:step:b");
    }
  }
  return out;
}

std::int64_t parse_integer(std::string_view text, std::string_view key) {
  text = trim(text);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    bad_value(key, text, "not an integer");
  }
  return v;
}

std::vector<int> parse_int_list(std::string_view text, std::string_view key) {
  std::vector<int> out;
  const auto as_int = [&](std::string_view s) {
    const auto v = parse_integer(s, key);
    if (v < -1000000 || v > 1000000) bad_value(key, s, "out of range");
    return static_cast<int>(v);
  };
  for (std::string_view item : split(text, ',')) {
    if (item.empty()) bad_value(key, text, "empty list item");
    if (const auto dots = item.find(".."); dots != std::string_view::npos) {
      const int a = as_int(item.substr(0, dots));
      const int b = as_int(item.substr(dots + 2));
      if (b < a) bad_value(key, item, "range needs a <= b");
      for (int i = a; i <= b; ++i) out.push_back(i);
      continue;
    }
    const auto parts = split(item, ':');
    if (parts.size() == 1) {
      out.push_back(as_int(item));
    } else if (parts.size() == 3) {
      const int a = as_int(parts[0]);
      const int step = as_int(parts[1]);
      const int b = as_int(parts[2]);
      if (step <= 0 || b < a) bad_value(key, item, "range needs a <= b and step > 0");
      for (int i = a; i <= b; i += step) out.push_back(i);
    } else {
      bad_value(key, item, "expected an integer, a..b or a:step:b");
    }
  }
  return out;
}

std::vector<int> ThresholdSpec::for_k(int k) const {
  std::vector<int> out;
  if (up_to_k_from) {
    for (int th = *up_to_k_from; th <= k; ++th) out.push_back(th);
  } else {
    for (int th : values)
      if (th <= k) out.push_back(th);
  }
  return out;
}

std::vector<int> ThresholdSpec::flatten(int k_max) const {
  if (!up_to_k_from) return values;
  std::vector<int> out;
  for (int th = *up_to_k_from; th <= std::max(k_max, *up_to_k_from); ++th) out.push_back(th);
  return out;
}

ThresholdSpec parse_threshold(std::string_view text) {
  text = trim(text);
  ThresholdSpec spec;
  if (text.size() > 3 && text.substr(text.size() - 3) == "..K") {
    spec.up_to_k_from = static_cast<int>(parse_integer(text.substr(0, text.size() - 3), "Th"));
    return spec;
  }
  spec.values = parse_int_list(text, "Th");
  return spec;
}

bool parse_bool(std::string_view text, std::string_view key) {
  text = trim(text);
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  bad_value(key, text, "expected true or false");
}

std::uint64_t fnv1a(std::string_view data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace sdosim::cli
