#include "cli/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "sdosim/errors.hpp"

namespace sdosim::cli {

std::string fmt(double v) {
  if (std::isnan(v)) return {};
  if (v == 0.0) return "0";  // no "-0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> comments, std::string header) {
  for (const std::string& c : comments) text_ += "# " + c + "\n";
  text_ += header + "\n";
}

void CsvTable::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) text_ += ',';
    text_ += fields[i];
  }
  text_ += '\n';
}

std::string CsvTable::str() const { return text_; }

Sink::Sink(std::optional<std::filesystem::path> dir, std::ostream& out)
    : dir_(std::move(dir)), out_(out) {
  if (dir_) {
    std::error_code ec;
    std::filesystem::create_directories(*dir_, ec);
    if (ec) throw Error("cannot create output directory '" + dir_->string() + "': " + ec.message());
  }
}

void Sink::emit(const std::string& name, const std::string& content) {
  if (!dir_) {
    if (!first_) out_ << '\n';
    first_ = false;
    out_ << content;
    return;
  }
  const std::filesystem::path path = *dir_ / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw Error("failed writing '" + path.string() + "'");
  written_.push_back(path);
}

}  // namespace sdosim::cli
