#include "cpi/psi_backend.h"

#include <algorithm>
#include <set>

#include "cpi/csv.h"
#include "cpi/format.h"

namespace cpi {

namespace {

// Floor for noisy synthetic samples; PSI is positive by definition.
constexpr double kMinSyntheticPsi = 1e-6;

void CheckTrials(int trials) {
  if (trials < 1)
    throw InvalidArgument("trial count must be positive");
}

}  // namespace

MissingGridPoint::MissingGridPoint(const NetPoint& point)
    : Error("replay grid has no samples at latency " +
            FormatDouble(point.latency_ms) + " ms, bandwidth " +
            FormatDouble(point.bandwidth_kbps) + " Kbps"),
      point_(point) {}

CommandFailure::CommandFailure(const std::string& what, std::string stderr_text)
    : Error(stderr_text.empty() ? what : what + "; stderr: " + stderr_text),
      stderr_text_(std::move(stderr_text)) {}

std::string_view ToString(BackendKind kind) {
  switch (kind) {
    case BackendKind::kSynthetic:
      return "synthetic";
    case BackendKind::kReplay:
      return "replay";
    case BackendKind::kExternal:
      return "external";
  }
  return "?";
}

double SyntheticSurface::Evaluate(const NetPoint& point) const {
  return base + lat_coeff * point.latency_ms + bw_coeff / point.bandwidth_kbps;
}

SyntheticBackend::SyntheticBackend(const SyntheticSurface& surface)
    : surface_(surface),
      rng_(surface.seed),
      noise_(0.0, surface.noise_stddev > 0.0 ? surface.noise_stddev : 1.0) {
  if (!(surface.noise_stddev >= 0.0))
    throw InvalidArgument("noise standard deviation must be non-negative");
}

BackendDescriptor SyntheticBackend::Descriptor() const {
  return {BackendKind::kSynthetic, surface_.noise_stddev == 0.0, 7};
}

PsiSample SyntheticBackend::Measure(const NetPoint& point, int trials) {
  CheckTrials(trials);
  point.Validate();
  const double value = surface_.Evaluate(point);
  std::vector<double> samples(static_cast<size_t>(trials), value);
  if (surface_.noise_stddev > 0.0) {
    std::lock_guard<std::mutex> lock(mutex_);
    for (double& s : samples)
      s = std::max(value + noise_(rng_), kMinSyntheticPsi);
  }
  return PsiSample::FromSamples(point, std::move(samples));
}

ReplayGrid ReplayGrid::Parse(std::string_view csv_text, std::string site_id) {
  const CsvTable table = CsvTable::Parse(csv_text);
  table.RequireHeader({"latency_ms", "bandwidth_kbps", "trial", "psi"});

  std::map<Key, std::vector<std::pair<long long, double>>> by_key;
  for (const CsvTable::Row& row : table.rows()) {
    const auto lat = ParseDouble(row.fields[0]);
    const auto bw = ParseDouble(row.fields[1]);
    const auto trial = ParseInt(row.fields[2]);
    const auto psi = ParseDouble(row.fields[3]);
    const std::string where = "replay grid line " + std::to_string(row.line);
    if (!lat || !bw || !trial || !psi)
      throw CsvError(where + ": unparseable field");
    if (!NetPoint{*lat, *bw}.IsValid())
      throw CsvError(where + ": invalid network point");
    if (*psi <= 0.0)
      throw CsvError(where + ": PSI must be positive");
    by_key[{*lat, *bw}].emplace_back(*trial, *psi);
  }

  ReplayGrid grid;
  grid.site_id = std::move(site_id);
  for (auto& [key, trials] : by_key) {
    std::sort(trials.begin(), trials.end());
    std::vector<double>& samples = grid.entries[key];
    for (size_t i = 0; i < trials.size(); ++i) {
      if (i > 0 && trials[i].first == trials[i - 1].first) {
        throw CsvError("replay grid: duplicate trial " +
                       std::to_string(trials[i].first) + " at " +
                       ToString(NetPoint{key.first, key.second}));
      }
      samples.push_back(trials[i].second);
    }
  }
  return grid;
}

ReplayGrid ReplayGrid::ReadFile(const std::string& path, std::string site_id) {
  try {
    return Parse(ReadFileToString(path), std::move(site_id));
  } catch (const CsvError& e) {
    throw CsvError(path + ": " + e.what());
  }
}

ReplayBackend::ReplayBackend(ReplayGrid grid) : grid_(std::move(grid)) {}

BackendDescriptor ReplayBackend::Descriptor() const {
  return {BackendKind::kReplay, true, 7};
}

PsiSample ReplayBackend::Measure(const NetPoint& point, int trials) {
  CheckTrials(trials);
  auto it = grid_.entries.find({point.latency_ms, point.bandwidth_kbps});
  if (it == grid_.entries.end() || it->second.empty())
    throw MissingGridPoint(point);
  const size_t n = std::min(it->second.size(), static_cast<size_t>(trials));
  return PsiSample::FromSamples(
      point, std::vector<double>(it->second.begin(), it->second.begin() + n));
}

ExternalBackend::ExternalBackend(std::string command_template,
                                 std::chrono::duration<double> timeout,
                                 bool concurrency_safe)
    : command_template_(std::move(command_template)),
      timeout_(timeout),
      concurrency_safe_(concurrency_safe) {
  if (command_template_.empty())
    throw InvalidArgument("external command is empty");
  if (!(timeout_.count() > 0.0))
    throw InvalidArgument("external command timeout must be positive");
}

BackendDescriptor ExternalBackend::Descriptor() const {
  return {BackendKind::kExternal, concurrency_safe_, 7};
}

PsiSample ExternalBackend::Measure(const NetPoint& point, int trials) {
  CheckTrials(trials);
  point.Validate();
  std::unique_lock<std::mutex> lock(mutex_, std::defer_lock);
  if (!concurrency_safe_)
    lock.lock();
  std::vector<double> samples;
  samples.reserve(static_cast<size_t>(trials));
  for (int i = 0; i < trials; ++i)
    samples.push_back(InvokeExternal(point, command_template_, timeout_));
  return PsiSample::FromSamples(point, std::move(samples));
}

}  // namespace cpi
