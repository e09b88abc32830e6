#pragma once

// Shared helpers for the line-oriented text formats.

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "footfall/geometry.hpp"

namespace footfall {

/// Malformed input file. what() includes the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& message);

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

/// Splits on whitespace.
std::vector<std::string_view> split_fields(std::string_view line);

/// Strips a `#` comment and surrounding whitespace.
std::string_view strip_comment(std::string_view line);

/// Strict full-token parse; throws ParseError on junk.
double parse_double(std::string_view token, const std::string& source, std::size_t line);
long long parse_int(std::string_view token, const std::string& source, std::size_t line);
Foot parse_foot(std::string_view token, const std::string& source, std::size_t line);

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames over the destination,
/// so failed runs never leave partial output.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace footfall
