#ifndef CPI_CSV_H_
#define CPI_CSV_H_

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cpi/error.h"

namespace cpi {

class CsvError : public Error {
 public:
  using Error::Error;
};

// A parsed CSV document with a header row. Fields may be double-quoted
// (RFC 4180 style, "" escapes a quote); blank lines are ignored.
class CsvTable {
 public:
  struct Row {
    int line = 0;  // 1-based physical line in the source.
    std::vector<std::string> fields;
  };

  static CsvTable Parse(std::string_view text);
  static CsvTable ReadFile(const std::string& path);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<Row>& rows() const { return rows_; }

  // Index of |name| in the header; throws CsvError when absent.
  size_t Column(std::string_view name) const;
  bool HasColumn(std::string_view name) const;
  // Throws CsvError unless the header is exactly |expected|.
  void RequireHeader(const std::vector<std::string>& expected) const;

 private:
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

// Writes one CSV record terminated by '\n', quoting only where needed.
void WriteCsvRow(std::ostream& out, const std::vector<std::string>& fields);

std::string ReadFileToString(const std::string& path);
void WriteStringToFile(const std::string& path, std::string_view contents);

}  // namespace cpi

#endif  // CPI_CSV_H_
