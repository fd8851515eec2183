#include "tools/envelope_csv.h"

#include "cpi/csv.h"
#include "cpi/format.h"

namespace cpi {

namespace {

double NumberField(const CsvTable::Row& row, size_t column,
                   const std::string& name) {
  const std::optional<double> v = ParseDouble(row.fields[column]);
  if (!v) {
    throw CsvError("line " + std::to_string(row.line) + ": " + name +
                   " is not a number: '" + row.fields[column] + "'");
  }
  return *v;
}

}  // namespace

std::vector<Envelope> ParseEnvelopeCsv(std::string_view csv_text) {
  const CsvTable table = CsvTable::Parse(csv_text);
  const size_t provider = table.Column("provider");
  const size_t city = table.Column("city");
  const size_t year = table.Column("year");
  const bool by_mean = table.HasColumn("lat_mean_ms");
  const std::vector<std::string> names =
      by_mean ? std::vector<std::string>{"lat_mean_ms", "lat_ci_ms",
                                         "bw_mean_kbps", "bw_ci_kbps"}
              : std::vector<std::string>{"lat_lo_ms", "lat_hi_ms",
                                         "bw_lo_kbps", "bw_hi_kbps"};
  std::vector<size_t> columns;
  for (const std::string& name : names)
    columns.push_back(table.Column(name));

  std::vector<Envelope> envelopes;
  for (const CsvTable::Row& row : table.rows()) {
    double v[4];
    for (size_t i = 0; i < 4; ++i)
      v[i] = NumberField(row, columns[i], names[i]);
    const std::optional<long long> y = ParseInt(row.fields[year]);
    if (!y) {
      throw CsvError("line " + std::to_string(row.line) +
                     ": year is not an integer: '" + row.fields[year] + "'");
    }
    Envelope env;
    env.provider = row.fields[provider];
    env.city = row.fields[city];
    env.year = static_cast<int>(*y);
    if (by_mean) {
      env.lat_lo_ms = v[0] - v[1];
      env.lat_hi_ms = v[0] + v[1];
      env.bw_lo_kbps = v[2] - v[3];
      env.bw_hi_kbps = v[2] + v[3];
    } else {
      env.lat_lo_ms = v[0];
      env.lat_hi_ms = v[1];
      env.bw_lo_kbps = v[2];
      env.bw_hi_kbps = v[3];
    }
    env.source_row = row.line;
    envelopes.push_back(std::move(env));
  }
  return envelopes;
}

std::vector<Envelope> ReadEnvelopeCsv(const std::string& file) {
  try {
    return ParseEnvelopeCsv(ReadFileToString(file));
  } catch (const CsvError& e) {
    throw CsvError(file + ": " + e.what());
  }
}

}  // namespace cpi
