#ifndef CPI_HAR_FEATURES_H_
#define CPI_HAR_FEATURES_H_

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpi/error.h"
#include "json.hpp"

namespace cpi {

class MalformedHar : public Error {
 public:
  using Error::Error;
};

enum class AssetClass { kScript, kCss, kImage, kText, kOther };

std::string_view ToString(AssetClass asset_class);

// Classifies a resource by the extension of its URL path (.js, .css,
// .png/.jpg/.gif/.svg, .html/.json), falling back to the response MIME type
// when the extension is missing or unlisted.
AssetClass ClassifyAsset(std::string_view url,
                         std::optional<std::string_view> mime_type = {});

// Asset counts and sizes for one page load. Sizes are in decimal kilobytes
// (1 KB = 1000 bytes).
struct PageFeatures {
  std::string site_id;
  long long css_count = 0;
  long long image_count = 0;
  long long script_count = 0;
  long long text_count = 0;
  double css_kb = 0.0;
  double image_kb = 0.0;
  double script_kb = 0.0;
  double text_kb = 0.0;
  long long other_count = 0;

  long long TotalCount() const {
    return css_count + image_count + script_count + text_count + other_count;
  }

  friend bool operator==(const PageFeatures&, const PageFeatures&) = default;
};

struct HarDiagnostics {
  long long entries_seen = 0;
  long long entries_skipped = 0;  // Entries without a usable request URL.
};

// Throws MalformedHar when the document has no log.entries array.
PageFeatures ExtractFeatures(const nlohmann::json& har,
                             const std::string& site_id,
                             HarDiagnostics* diagnostics = nullptr);

// Parses |har_text| first; unparseable text is MalformedHar too.
PageFeatures ExtractFeaturesFromText(std::string_view har_text,
                                     const std::string& site_id,
                                     HarDiagnostics* diagnostics = nullptr);

const std::vector<std::string>& PageFeaturesCsvHeader();
void WritePageFeaturesCsv(std::ostream& out,
                          const std::vector<PageFeatures>& rows);
// Reads a CSV written by WritePageFeaturesCsv.
std::vector<PageFeatures> ReadPageFeaturesCsv(std::string_view csv_text);

}  // namespace cpi

#endif  // CPI_HAR_FEATURES_H_
