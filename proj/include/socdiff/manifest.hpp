#pragma once

// Run manifest and CSV output. Every CSV starts with a comment line
// naming the manifest checksum (FNV-1a 64 over the resolved configuration
// block), so outputs can be matched to the exact configuration that
// produced them. manifest.txt additionally lists a checksum per output
// file; re-running with an identical manifest reproduces all outputs
// byte for byte.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "socdiff/config_file.hpp"
#include "socdiff/version.hpp"

namespace socdiff {

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (const char ch : data) {
    hash ^= static_cast<unsigned char>(ch);
    hash *= 0x100000001b3ull;
  }
  return hash;
}

inline std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct RunManifest {
  std::string resolved_text;  // version + sorted key=value block
  std::uint64_t checksum = 0;
  std::vector<std::pair<std::string, std::uint64_t>> file_checksums;
};

inline RunManifest make_manifest(const ParsedConfig& pc) {
  RunManifest m;
  std::string text;
  text += "version=";
  text += kVersion;
  text += '\n';
  for (const auto& [key, value] : pc.resolved) {
    text += key;
    text += '=';
    text += value;
    text += '\n';
  }
  m.resolved_text = std::move(text);
  m.checksum = fnv1a64(m.resolved_text);
  return m;
}

/// Accumulates one CSV in memory; `save` writes it and records its
/// checksum in the manifest.
class CsvWriter {
 public:
  CsvWriter(std::string filename, const RunManifest& manifest)
      : filename_(std::move(filename)) {
    buffer_ = "# manifest=" + to_hex(manifest.checksum) + "\n";
  }

  void comment(const std::string& text) { buffer_ += "# " + text + "\n"; }

  void header(const std::vector<std::string>& columns) {
    append_row(columns);
  }

  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (const double v : values) cells.push_back(detail::format_double(v));
    append_row(cells);
  }

  void row(const std::vector<std::string>& cells) { append_row(cells); }

  const std::string& filename() const { return filename_; }
  const std::string& content() const { return buffer_; }

  void save(const std::filesystem::path& dir, RunManifest& manifest) const {
    const std::filesystem::path path = dir / filename_;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw std::runtime_error("cannot write output file " + path.string());
    }
    out << buffer_;
    manifest.file_checksums.emplace_back(filename_, fnv1a64(buffer_));
  }

 private:
  void append_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) buffer_ += ',';
      buffer_ += cells[i];
    }
    buffer_ += '\n';
  }

  std::string filename_;
  std::string buffer_;
};

inline void write_manifest(const RunManifest& m,
                           const std::filesystem::path& dir) {
  const std::filesystem::path path = dir / "manifest.txt";
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write manifest " + path.string());
  }
  out << "manifest_checksum=" << to_hex(m.checksum) << '\n';
  out << m.resolved_text;
  for (const auto& [file, sum] : m.file_checksums) {
    out << "output." << file << '=' << to_hex(sum) << '\n';
  }
}

}  // namespace socdiff
