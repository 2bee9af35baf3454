#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aerogeo/errors.hpp"

namespace aerogeo {

enum class ParseErrorKind {
  MissingColumn,
  MalformedRow,
  UnitRangeViolation,
  NonMonotoneTimestamp,
  DuplicateFrame,
  ValueOutOfUnitRange,
  BadFilenamePattern,
  UnknownFormat,
  OrphanDetection,
  DetectionOutOfBounds,
};

std::string to_string(ParseErrorKind kind);

/// Input rejected by a parser. Carries the source name, the 1-based line
/// number (0 when the error is not tied to a line) and the offending field.
class ParseError : public Error {
public:
  ParseError(ParseErrorKind kind, std::string source, std::size_t line, std::string field,
             const std::string& detail);

  ParseErrorKind kind() const { return kind_; }
  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

private:
  ParseErrorKind kind_;
  std::string source_;
  std::size_t line_;
  std::string field_;
};

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

std::vector<std::string> split_fields(std::string_view line, char sep = ',');

namespace csv {

/// Line-oriented reader for header-first CSV files. Blank lines are skipped;
/// a trailing carriage return is stripped.
class Reader {
public:
  Reader(std::istream& in, std::string source);

  /// Reads the header and checks that every required column is present.
  void require_columns(const std::vector<std::string>& required);

  /// False at end of input.
  bool next_row();

  std::size_t line() const { return line_; }
  const std::string& source() const { return source_; }

  const std::string& text(const std::string& column) const;
  double number(const std::string& column) const;
  std::int64_t integer(const std::string& column) const;
  /// Empty field -> nullopt.
  std::optional<double> optional_number(const std::string& column) const;

  [[noreturn]] void fail(ParseErrorKind kind, const std::string& column,
                         const std::string& detail) const;

private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
  std::map<std::string, std::size_t> columns_;
  std::size_t width_ = 0;
  std::vector<std::string> fields_;
};

} // namespace csv

} // namespace aerogeo
