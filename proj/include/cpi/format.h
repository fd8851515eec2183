#ifndef CPI_FORMAT_H_
#define CPI_FORMAT_H_

#include <optional>
#include <string>
#include <string_view>

namespace cpi {

// Shortest decimal text that parses back to exactly |value|. Used for every
// number written to disk so outputs are stable and lossless.
std::string FormatDouble(double value);

// Fixed-point rendering, for human-facing tables and SVG coordinates.
std::string FormatFixed(double value, int decimals);

// Parses the whole of |text| (surrounding blanks allowed) as a decimal
// number. Returns nullopt on trailing garbage, empty input or non-finite
// values.
std::optional<double> ParseDouble(std::string_view text);
std::optional<long long> ParseInt(std::string_view text);

std::string_view TrimWhitespace(std::string_view text);
std::string ToLowerAscii(std::string_view text);

}  // namespace cpi

#endif  // CPI_FORMAT_H_
