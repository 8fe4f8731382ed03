#pragma once

// RFC-4180 CSV output with shortest round-trip number formatting.

#include <concepts>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace slm {

/// Shortest decimal string that parses back to exactly `v`; "nan", "inf",
/// "-inf" for non-finite values.
std::string format_double(double v);

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string csv_escape(std::string_view field);

class CsvField {
 public:
  CsvField(double v) : text_(format_double(v)) {}
  template <std::integral T>
  CsvField(T v) : text_(std::to_string(v)) {}
  CsvField(std::string s) : text_(csv_escape(s)) {}
  CsvField(const char* s) : text_(csv_escape(s)) {}

  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
};

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);

  void row(const std::vector<CsvField>& fields);
  std::size_t columns() const noexcept { return columns_; }
  const std::string& str() const noexcept { return out_; }

 private:
  std::size_t columns_;
  std::string out_;
};

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace slm
