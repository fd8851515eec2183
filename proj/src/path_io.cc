#include "cpi/path_io.h"

#include <cmath>

#include "cpi/csv.h"
#include "json.hpp"

namespace cpi {

namespace {

using ordered_json = nlohmann::ordered_json;

double NumberAt(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number())
    throw PathFileError(std::string("missing numeric field '") + key + "'");
  return it->get<double>();
}

}  // namespace

std::string SerializeCpiPath(const CpiPath& path) {
  ordered_json doc;
  doc["site_id"] = path.site_id;
  doc["start"] = {{"latency_ms", path.start.latency_ms},
                  {"bandwidth_kbps", path.start.bandwidth_kbps}};
  const StepSchedule& s = path.schedule;
  doc["schedule"] = {{"latency_step_ms", s.latency_step_ms},
                     {"doubling_ceiling_kbps", s.doubling_ceiling_kbps},
                     {"linear_step_kbps", s.linear_step_kbps},
                     {"latency_floor_ms", s.latency_floor_ms},
                     {"bandwidth_ceiling_kbps", s.bandwidth_ceiling_kbps}};
  ordered_json points = ordered_json::array();
  for (const PsiSample& p : path.points) {
    ordered_json entry;
    entry["latency_ms"] = p.point.latency_ms;
    entry["bandwidth_kbps"] = p.point.bandwidth_kbps;
    entry["psi_samples"] = p.samples;
    entry["psi_mean"] = p.mean;
    points.push_back(std::move(entry));
  }
  doc["points"] = std::move(points);
  return doc.dump(2) + "\n";
}

CpiPath ParseCpiPath(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw PathFileError(std::string("path file does not parse: ") + e.what());
  }
  if (!doc.is_object())
    throw PathFileError("path file is not a JSON object");

  CpiPath path;
  auto site = doc.find("site_id");
  if (site == doc.end() || !site->is_string())
    throw PathFileError("missing string field 'site_id'");
  path.site_id = site->get<std::string>();

  if (!doc.contains("start") || !doc.contains("schedule") ||
      !doc.contains("points") || !doc["points"].is_array()) {
    throw PathFileError("path file needs 'start', 'schedule' and 'points'");
  }
  path.start = {NumberAt(doc["start"], "latency_ms"),
                NumberAt(doc["start"], "bandwidth_kbps")};
  const nlohmann::json& s = doc["schedule"];
  path.schedule.latency_step_ms = NumberAt(s, "latency_step_ms");
  path.schedule.doubling_ceiling_kbps = NumberAt(s, "doubling_ceiling_kbps");
  path.schedule.linear_step_kbps = NumberAt(s, "linear_step_kbps");
  path.schedule.latency_floor_ms = NumberAt(s, "latency_floor_ms");
  path.schedule.bandwidth_ceiling_kbps = NumberAt(s, "bandwidth_ceiling_kbps");
  try {
    path.schedule.Validate();
  } catch (const InvalidArgument& e) {
    throw PathFileError(e.what());
  }

  for (const nlohmann::json& entry : doc["points"]) {
    const NetPoint point{NumberAt(entry, "latency_ms"),
                         NumberAt(entry, "bandwidth_kbps")};
    auto samples = entry.find("psi_samples");
    if (samples == entry.end() || !samples->is_array())
      throw PathFileError("point " + ToString(point) + " has no psi_samples");
    std::vector<double> values;
    for (const nlohmann::json& v : *samples) {
      if (!v.is_number())
        throw PathFileError("non-numeric PSI sample at " + ToString(point));
      values.push_back(v.get<double>());
    }
    try {
      path.points.push_back(PsiSample::FromSamples(point, std::move(values)));
    } catch (const InvalidArgument& e) {
      throw PathFileError(e.what());
    }
    const double stored = NumberAt(entry, "psi_mean");
    const double mean = path.points.back().mean;
    if (std::abs(stored - mean) > 1e-9 * std::max(1.0, std::abs(mean)))
      throw PathFileError("psi_mean at " + ToString(point) +
                          " disagrees with its samples");
  }
  if (auto problem = CheckStaircase(path))
    throw PathFileError("path '" + path.site_id + "': " + *problem);
  return path;
}

CpiPath ReadCpiPathFile(const std::string& file) {
  try {
    return ParseCpiPath(ReadFileToString(file));
  } catch (const PathFileError& e) {
    throw PathFileError(file + ": " + e.what());
  }
}

void WriteCpiPathFile(const std::string& file, const CpiPath& path) {
  WriteStringToFile(file, SerializeCpiPath(path));
}

}  // namespace cpi
