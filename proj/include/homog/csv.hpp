#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace homog {

/// Shortest round-trip decimal form, '.' separator, locale independent.
std::string fmt_double(double v);

/// Line-oriented CSV with a fixed header; all formatting goes through
/// fmt_double so identical data produces identical bytes.
class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> header);

  void row(const std::vector<std::string>& fields);
  void write(const std::string& path) const;
  const std::string& text() const { return text_; }

private:
  std::string text_;
  std::size_t columns_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

/// FNV-1a 64-bit checksum of a byte string, hex encoded.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace homog
