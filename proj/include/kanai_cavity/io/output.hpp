#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "kanai_cavity/error.hpp"

namespace kanai_cavity::io {

/// 17 significant digits, lowercase scientific.
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

/// One CSV cell: integers print as integers, doubles with fmt_double.
struct Cell {
  std::string text;
  Cell(double v) : text(fmt_double(v)) {}
  Cell(std::size_t v) : text(std::to_string(v)) {}
  Cell(int v) : text(std::to_string(v)) {}
  Cell(bool v) : text(v ? "1" : "0") {}
};

/// CSV text built row by row; every row must match the header width.
class CsvBuilder {
 public:
  explicit CsvBuilder(std::initializer_list<const char*> header) : width_(header.size()) {
    std::size_t k = 0;
    for (const char* h : header) {
      if (k++) text_ += ',';
      text_ += h;
    }
    text_ += '\n';
  }

  CsvBuilder& row(std::initializer_list<Cell> cells) {
    if (cells.size() != width_) throw ContractViolation("csv: row width does not match header");
    std::size_t k = 0;
    for (const Cell& c : cells) {
      if (k++) text_ += ',';
      text_ += c.text;
    }
    text_ += '\n';
    return *this;
  }

  const std::string& str() const { return text_; }

 private:
  std::size_t width_;
  std::string text_;
};

/// A set of files produced by one command, written together.
struct OutputSet {
  std::vector<std::pair<std::string, std::string>> files;  // relative path, contents
  std::vector<std::string> notes;                          // for stderr, never written

  void add(std::string name, std::string contents) {
    files.emplace_back(std::move(name), std::move(contents));
  }
};

/// Writes every file to a temporary sibling first and renames only once all
/// of them are on disk, so a failure leaves no partial data files behind.
inline void write_atomically(const std::filesystem::path& dir, const OutputSet& out) {
  namespace fs = std::filesystem;
  std::vector<std::pair<fs::path, fs::path>> staged;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& [tmp, dst] : staged) fs::remove(tmp, ec);
  };
  try {
    for (const auto& [name, contents] : out.files) {
      const fs::path dst = dir / name;
      fs::create_directories(dst.parent_path());
      fs::path tmp = dst;
      tmp += ".tmp";
      staged.emplace_back(tmp, dst);
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
      f.close();
      if (!f) throw Error("cannot write " + tmp.string());
    }
  } catch (const fs::filesystem_error& e) {
    cleanup();
    throw Error(std::string("output directory: ") + e.what());
  } catch (...) {
    cleanup();
    throw;
  }
  for (const auto& [tmp, dst] : staged) fs::rename(tmp, dst);
}

}  // namespace kanai_cavity::io
