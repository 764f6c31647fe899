#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace sdosim::cli {

/// 6 significant digits; empty for NaN.
std::string fmt(double v);

/// CSV text with the common `#` header block.
class CsvTable {
 public:
  CsvTable(std::vector<std::string> comments, std::string header);

  void row(const std::vector<std::string>& fields);
  std::string str() const;

 private:
  std::string text_;
};

/// Writes tables to --out (one file each) or concatenates them on stdout.
class Sink {
 public:
  Sink(std::optional<std::filesystem::path> dir, std::ostream& out);

  void emit(const std::string& name, const std::string& content);
  const std::vector<std::filesystem::path>& written() const noexcept { return written_; }
  bool to_files() const noexcept { return dir_.has_value(); }
  const std::optional<std::filesystem::path>& dir() const noexcept { return dir_; }

 private:
  std::optional<std::filesystem::path> dir_;
  std::ostream& out_;
  std::vector<std::filesystem::path> written_;
  bool first_ = true;
};

}  // namespace sdosim::cli
