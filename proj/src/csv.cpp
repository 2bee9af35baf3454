#include "aerogeo/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <system_error>

namespace aerogeo {

std::string to_string(ParseErrorKind kind) {
  switch (kind) {
  case ParseErrorKind::MissingColumn:
    return "MissingColumn";
  case ParseErrorKind::MalformedRow:
    return "MalformedRow";
  case ParseErrorKind::UnitRangeViolation:
    return "UnitRangeViolation";
  case ParseErrorKind::NonMonotoneTimestamp:
    return "NonMonotoneTimestamp";
  case ParseErrorKind::DuplicateFrame:
    return "DuplicateFrame";
  case ParseErrorKind::ValueOutOfUnitRange:
    return "ValueOutOfUnitRange";
  case ParseErrorKind::BadFilenamePattern:
    return "BadFilenamePattern";
  case ParseErrorKind::UnknownFormat:
    return "UnknownFormat";
  case ParseErrorKind::OrphanDetection:
    return "OrphanDetection";
  case ParseErrorKind::DetectionOutOfBounds:
    return "DetectionOutOfBounds";
  }
  return "ParseError";
}

namespace {

std::string compose(ParseErrorKind kind, const std::string& source, std::size_t line,
                    const std::string& field, const std::string& detail) {
  std::string msg = source;
  if (line > 0) {
    msg += ":" + std::to_string(line);
  }
  msg += ": " + to_string(kind);
  if (!field.empty()) {
    msg += ": field '" + field + "'";
  }
  if (!detail.empty()) {
    msg += ": " + detail;
  }
  return msg;
}

} // namespace

ParseError::ParseError(ParseErrorKind kind, std::string source, std::size_t line,
                       std::string field, const std::string& detail)
    : Error(compose(kind, source, line, field, detail)),
      kind_(kind),
      source_(std::move(source)),
      line_(line),
      field_(std::move(field)) {}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) {
    throw Error("cannot format number");
  }
  return std::string(buf.data(), end);
}

std::vector<std::string> split_fields(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

namespace csv {

namespace {

bool read_content_line(std::istream& in, std::string& line, std::size_t& counter) {
  while (std::getline(in, line)) {
    ++counter;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (!line.empty()) {
      return true;
    }
  }
  return false;
}

} // namespace

Reader::Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

void Reader::require_columns(const std::vector<std::string>& required) {
  std::string header;
  if (!read_content_line(in_, header, line_)) {
    throw ParseError(ParseErrorKind::MissingColumn, source_, 1, required.front(),
                     "missing header row");
  }
  const auto names = split_fields(header);
  width_ = names.size();
  for (std::size_t i = 0; i < names.size(); ++i) {
    columns_.emplace(names[i], i);
  }
  for (const auto& name : required) {
    if (!columns_.contains(name)) {
      throw ParseError(ParseErrorKind::MissingColumn, source_, line_, name,
                       "required column is absent from the header");
    }
  }
}

bool Reader::next_row() {
  std::string row;
  if (!read_content_line(in_, row, line_)) {
    return false;
  }
  fields_ = split_fields(row);
  if (fields_.size() != width_) {
    throw ParseError(ParseErrorKind::MalformedRow, source_, line_, "",
                     "expected " + std::to_string(width_) + " fields, found " +
                         std::to_string(fields_.size()));
  }
  return true;
}

const std::string& Reader::text(const std::string& column) const {
  return fields_.at(columns_.at(column));
}

double Reader::number(const std::string& column) const {
  const std::string& s = text(column);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    fail(ParseErrorKind::MalformedRow, column, "'" + s + "' is not a finite number");
  }
  return value;
}

std::int64_t Reader::integer(const std::string& column) const {
  const std::string& s = text(column);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    fail(ParseErrorKind::MalformedRow, column, "'" + s + "' is not an integer");
  }
  return value;
}

std::optional<double> Reader::optional_number(const std::string& column) const {
  if (text(column).empty()) {
    return std::nullopt;
  }
  return number(column);
}

void Reader::fail(ParseErrorKind kind, const std::string& column,
                  const std::string& detail) const {
  throw ParseError(kind, source_, line_, column, detail);
}

} // namespace csv

} // namespace aerogeo
