#ifndef CPI_TOOLS_ENVELOPE_CSV_H_
#define CPI_TOOLS_ENVELOPE_CSV_H_

#include <string>
#include <string_view>
#include <vector>

#include "cpi/core_model.h"

namespace cpi {

// Reads envelopes from CSV. Two layouts are accepted:
//   provider,city,year,lat_mean_ms,lat_ci_ms,bw_mean_kbps,bw_ci_kbps
//     each axis spans [mean - ci, mean + ci];
//   provider,city,year,lat_lo_ms,lat_hi_ms,bw_lo_kbps,bw_hi_kbps
// Columns are found by name. Unparseable fields throw CsvError naming the
// line; envelopes with bad bounds are returned as-is (with source_row set)
// so that classification can report them per row.
std::vector<Envelope> ParseEnvelopeCsv(std::string_view csv_text);
std::vector<Envelope> ReadEnvelopeCsv(const std::string& file);

}  // namespace cpi

#endif  // CPI_TOOLS_ENVELOPE_CSV_H_
