#include "cpi/csv.h"

#include <fstream>
#include <ostream>
#include <sstream>

#include "cpi/format.h"

namespace cpi {

namespace {

bool IsBlankRecord(const std::vector<std::string>& fields) {
  return fields.size() == 1 && TrimWhitespace(fields[0]).empty();
}

}  // namespace

CsvTable CsvTable::Parse(std::string_view text) {
  std::vector<Row> records;
  Row current;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  int line = 1;
  current.line = line;

  auto end_field = [&] {
    current.fields.push_back(field_was_quoted ? field
                                              : std::string(TrimWhitespace(field)));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    if (!IsBlankRecord(current.fields))
      records.push_back(std::move(current));
    current = Row();
    current.line = line;
  };

  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n')
          ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!TrimWhitespace(field).empty())
          throw CsvError("line " + std::to_string(line) +
                         ": quote inside unquoted field");
        field.clear();
        in_quotes = true;
        field_was_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        field.push_back(c);
    }
  }
  if (in_quotes)
    throw CsvError("line " + std::to_string(line) + ": unterminated quote");
  if (!field.empty() || field_was_quoted || !current.fields.empty())
    end_record();

  CsvTable table;
  if (records.empty())
    throw CsvError("missing header row");
  table.header_ = std::move(records.front().fields);
  for (size_t i = 1; i < records.size(); ++i) {
    if (records[i].fields.size() != table.header_.size()) {
      throw CsvError("line " + std::to_string(records[i].line) + ": expected " +
                     std::to_string(table.header_.size()) + " fields, found " +
                     std::to_string(records[i].fields.size()));
    }
    table.rows_.push_back(std::move(records[i]));
  }
  return table;
}

CsvTable CsvTable::ReadFile(const std::string& path) {
  try {
    return Parse(ReadFileToString(path));
  } catch (const CsvError& e) {
    throw CsvError(path + ": " + e.what());
  }
}

size_t CsvTable::Column(std::string_view name) const {
  for (size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name)
      return i;
  }
  throw CsvError("missing column '" + std::string(name) + "'");
}

bool CsvTable::HasColumn(std::string_view name) const {
  for (const std::string& h : header_) {
    if (h == name)
      return true;
  }
  return false;
}

void CsvTable::RequireHeader(const std::vector<std::string>& expected) const {
  if (header_ == expected)
    return;
  std::ostringstream want;
  WriteCsvRow(want, expected);
  std::string w = want.str();
  w.pop_back();
  throw CsvError("unexpected header; want '" + w + "'");
}

void WriteCsvRow(std::ostream& out, const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i)
      out << ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n\r") == std::string::npos &&
        TrimWhitespace(f).size() == f.size()) {
      out << f;
      continue;
    }
    out << '"';
    for (char c : f) {
      if (c == '"')
        out << '"';
      out << c;
    }
    out << '"';
  }
  out << '\n';
}

std::string ReadFileToString(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open '" + path + "'");
  std::ostringstream contents;
  contents << in.rdbuf();
  return contents.str();
}

void WriteStringToFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error("cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out)
    throw Error("write to '" + path + "' failed");
}

}  // namespace cpi
