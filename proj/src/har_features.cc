#include "cpi/har_features.h"

#include <ostream>

#include "cpi/csv.h"
#include "cpi/format.h"

namespace cpi {

namespace {

// Path component of |url| without scheme, authority, query or fragment.
std::string_view UrlPath(std::string_view url) {
  const size_t cut = url.find_first_of("?#");
  if (cut != std::string_view::npos)
    url = url.substr(0, cut);
  const size_t scheme = url.find("://");
  if (scheme != std::string_view::npos) {
    url.remove_prefix(scheme + 3);
    const size_t slash = url.find('/');
    if (slash == std::string_view::npos)
      return {};
    url.remove_prefix(slash);
  }
  return url;
}

std::string Extension(std::string_view url) {
  std::string_view path = UrlPath(url);
  const size_t slash = path.find_last_of('/');
  if (slash != std::string_view::npos)
    path.remove_prefix(slash + 1);
  const size_t dot = path.find_last_of('.');
  if (dot == std::string_view::npos)
    return {};
  return ToLowerAscii(path.substr(dot + 1));
}

std::optional<AssetClass> FromExtension(const std::string& ext) {
  if (ext == "js")
    return AssetClass::kScript;
  if (ext == "css")
    return AssetClass::kCss;
  if (ext == "png" || ext == "jpg" || ext == "gif" || ext == "svg")
    return AssetClass::kImage;
  if (ext == "html" || ext == "json")
    return AssetClass::kText;
  return std::nullopt;
}

AssetClass FromMimeType(std::string_view mime_type) {
  std::string mime = ToLowerAscii(mime_type);
  const size_t params = mime.find(';');
  if (params != std::string::npos)
    mime.resize(params);
  mime = std::string(TrimWhitespace(mime));
  if (mime.find("javascript") != std::string::npos)
    return AssetClass::kScript;
  if (mime == "text/css")
    return AssetClass::kCss;
  if (mime.starts_with("image/"))
    return AssetClass::kImage;
  if (mime == "text/html" || mime == "application/json")
    return AssetClass::kText;
  return AssetClass::kOther;
}

// Positive numeric field, or nullopt.
std::optional<double> PositiveNumber(const nlohmann::json& obj,
                                     const char* key) {
  if (!obj.is_object())
    return std::nullopt;
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number())
    return std::nullopt;
  const double v = it->get<double>();
  return v > 0.0 ? std::optional<double>(v) : std::nullopt;
}

}  // namespace

std::string_view ToString(AssetClass asset_class) {
  switch (asset_class) {
    case AssetClass::kScript:
      return "script";
    case AssetClass::kCss:
      return "css";
    case AssetClass::kImage:
      return "image";
    case AssetClass::kText:
      return "text";
    case AssetClass::kOther:
      return "other";
  }
  return "?";
}

AssetClass ClassifyAsset(std::string_view url,
                         std::optional<std::string_view> mime_type) {
  if (auto by_ext = FromExtension(Extension(url)))
    return *by_ext;
  return mime_type ? FromMimeType(*mime_type) : AssetClass::kOther;
}

PageFeatures ExtractFeatures(const nlohmann::json& har,
                             const std::string& site_id,
                             HarDiagnostics* diagnostics) {
  if (!har.is_object() || !har.contains("log") || !har["log"].is_object() ||
      !har["log"].contains("entries") || !har["log"]["entries"].is_array()) {
    throw MalformedHar("HAR for '" + site_id + "' has no log.entries array");
  }

  HarDiagnostics diag;
  PageFeatures features;
  features.site_id = site_id;
  // Whole bytes sum exactly in a double, which keeps the totals independent
  // of entry order.
  double css_bytes = 0, image_bytes = 0, script_bytes = 0, text_bytes = 0;

  for (const nlohmann::json& entry : har["log"]["entries"]) {
    ++diag.entries_seen;
    const nlohmann::json* url = nullptr;
    if (entry.is_object() && entry.contains("request") &&
        entry["request"].is_object() && entry["request"].contains("url")) {
      url = &entry["request"]["url"];
    }
    if (!url || !url->is_string() || url->get_ref<const std::string&>().empty()) {
      ++diag.entries_skipped;
      continue;
    }

    std::optional<std::string_view> mime;
    double bytes = 0.0;
    if (entry.contains("response") && entry["response"].is_object()) {
      const nlohmann::json& response = entry["response"];
      if (response.contains("content") && response["content"].is_object()) {
        const nlohmann::json& content = response["content"];
        auto mt = content.find("mimeType");
        if (mt != content.end() && mt->is_string())
          mime = mt->get_ref<const std::string&>();
        bytes = PositiveNumber(content, "size").value_or(0.0);
      }
      if (bytes == 0.0)
        bytes = PositiveNumber(response, "bodySize").value_or(0.0);
    }

    switch (ClassifyAsset(url->get_ref<const std::string&>(), mime)) {
      case AssetClass::kScript:
        ++features.script_count;
        script_bytes += bytes;
        break;
      case AssetClass::kCss:
        ++features.css_count;
        css_bytes += bytes;
        break;
      case AssetClass::kImage:
        ++features.image_count;
        image_bytes += bytes;
        break;
      case AssetClass::kText:
        ++features.text_count;
        text_bytes += bytes;
        break;
      case AssetClass::kOther:
        ++features.other_count;
        break;
    }
  }

  features.css_kb = css_bytes / 1000.0;
  features.image_kb = image_bytes / 1000.0;
  features.script_kb = script_bytes / 1000.0;
  features.text_kb = text_bytes / 1000.0;
  if (diagnostics)
    *diagnostics = diag;
  return features;
}

PageFeatures ExtractFeaturesFromText(std::string_view har_text,
                                     const std::string& site_id,
                                     HarDiagnostics* diagnostics) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(har_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedHar("HAR for '" + site_id + "' does not parse: " + e.what());
  }
  return ExtractFeatures(doc, site_id, diagnostics);
}

const std::vector<std::string>& PageFeaturesCsvHeader() {
  static const std::vector<std::string> kHeader = {
      "site_id",  "css_count", "image_count", "script_count", "text_count",
      "css_kb",   "image_kb",  "script_kb",   "text_kb",      "other_count"};
  return kHeader;
}

void WritePageFeaturesCsv(std::ostream& out,
                          const std::vector<PageFeatures>& rows) {
  WriteCsvRow(out, PageFeaturesCsvHeader());
  for (const PageFeatures& f : rows) {
    WriteCsvRow(out, {f.site_id, std::to_string(f.css_count),
                      std::to_string(f.image_count),
                      std::to_string(f.script_count),
                      std::to_string(f.text_count), FormatDouble(f.css_kb),
                      FormatDouble(f.image_kb), FormatDouble(f.script_kb),
                      FormatDouble(f.text_kb), std::to_string(f.other_count)});
  }
}

std::vector<PageFeatures> ReadPageFeaturesCsv(std::string_view csv_text) {
  const CsvTable table = CsvTable::Parse(csv_text);
  table.RequireHeader(PageFeaturesCsvHeader());
  std::vector<PageFeatures> out;
  for (const CsvTable::Row& row : table.rows()) {
    const auto& f = row.fields;
    auto count = [&](size_t i) {
      auto v = ParseInt(f[i]);
      if (!v || *v < 0) {
        throw CsvError("features line " + std::to_string(row.line) +
                       ": bad count '" + f[i] + "'");
      }
      return *v;
    };
    auto kb = [&](size_t i) {
      auto v = ParseDouble(f[i]);
      if (!v || *v < 0) {
        throw CsvError("features line " + std::to_string(row.line) +
                       ": bad size '" + f[i] + "'");
      }
      return *v;
    };
    PageFeatures p;
    p.site_id = f[0];
    p.css_count = count(1);
    p.image_count = count(2);
    p.script_count = count(3);
    p.text_count = count(4);
    p.css_kb = kb(5);
    p.image_kb = kb(6);
    p.script_kb = kb(7);
    p.text_kb = kb(8);
    p.other_count = count(9);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace cpi
