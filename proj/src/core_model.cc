#include "cpi/core_model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cpi/format.h"

namespace cpi {

namespace {

// Staircase checks compare values computed by repeated addition against
// values that may have been serialized and parsed back.
bool NearlyEqual(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

bool NetPoint::IsValid() const {
  return std::isfinite(latency_ms) && std::isfinite(bandwidth_kbps) &&
         latency_ms >= 0.0 && bandwidth_kbps > 0.0;
}

void NetPoint::Validate() const {
  if (!IsValid())
    throw InvalidArgument("invalid network point " + ToString(*this));
}

std::string ToString(const NetPoint& point) {
  return "(" + FormatDouble(point.latency_ms) + " ms, " +
         FormatDouble(point.bandwidth_kbps) + " Kbps)";
}

void StepSchedule::Validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(latency_step_ms))
    throw InvalidArgument("latency step must be positive");
  if (!positive(doubling_ceiling_kbps))
    throw InvalidArgument("bandwidth doubling ceiling must be positive");
  if (!positive(linear_step_kbps))
    throw InvalidArgument("linear bandwidth step must be positive");
  if (!positive(bandwidth_ceiling_kbps))
    throw InvalidArgument("bandwidth ceiling must be positive");
  if (!std::isfinite(latency_floor_ms) || latency_floor_ms < 0.0)
    throw InvalidArgument("latency floor must be non-negative");
  if (doubling_ceiling_kbps > bandwidth_ceiling_kbps)
    throw InvalidArgument(
        "bandwidth doubling ceiling exceeds the bandwidth ceiling");
}

double BwSuccessor(double bandwidth_kbps, const StepSchedule& schedule) {
  const double doubled = 2.0 * bandwidth_kbps;
  if (doubled <= schedule.doubling_ceiling_kbps)
    return doubled;
  if (bandwidth_kbps < schedule.doubling_ceiling_kbps)
    return schedule.doubling_ceiling_kbps;
  return bandwidth_kbps + schedule.linear_step_kbps;
}

double LatSuccessor(double latency_ms, const StepSchedule& schedule) {
  return latency_ms - schedule.latency_step_ms;
}

std::vector<double> BandwidthSequence(double start_kbps,
                                      const StepSchedule& schedule) {
  std::vector<double> sequence;
  for (double bw = start_kbps; bw <= schedule.bandwidth_ceiling_kbps;
       bw = BwSuccessor(bw, schedule)) {
    sequence.push_back(bw);
  }
  return sequence;
}

bool WithinBounds(const NetPoint& point, const StepSchedule& schedule) {
  return point.IsValid() && point.latency_ms >= schedule.latency_floor_ms &&
         point.bandwidth_kbps <= schedule.bandwidth_ceiling_kbps;
}

std::string_view ToString(Aggregation aggregation) {
  return aggregation == Aggregation::kMean ? "mean" : "median";
}

std::optional<Aggregation> ParseAggregation(std::string_view text) {
  if (text == "mean")
    return Aggregation::kMean;
  if (text == "median")
    return Aggregation::kMedian;
  return std::nullopt;
}

PsiSample PsiSample::FromSamples(const NetPoint& point,
                                 std::vector<double> samples) {
  if (samples.empty())
    throw InvalidArgument("PSI sample list is empty at " + ToString(point));
  for (double s : samples) {
    if (!std::isfinite(s) || s <= 0.0) {
      throw InvalidArgument("PSI sample " + FormatDouble(s) + " at " +
                            ToString(point) + " is not a positive number");
    }
  }
  PsiSample result;
  result.point = point;
  // Averaging offsets from the first sample keeps the mean of identical
  // samples bit-exact.
  double offset_sum = 0.0;
  for (double s : samples)
    offset_sum += s - samples.front();
  result.mean =
      samples.front() + offset_sum / static_cast<double>(samples.size());
  result.samples = std::move(samples);
  return result;
}

double PsiSample::Median() const {
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  if (n == 0)
    return 0.0;
  return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

double PsiSample::Score(Aggregation aggregation) const {
  return aggregation == Aggregation::kMean ? mean : Median();
}

std::optional<std::string> CheckStaircase(const CpiPath& path) {
  if (path.points.empty())
    return "path has no points";
  if (path.points.front().point != path.start) {
    return "path starts at " + ToString(path.points.front().point) +
           " instead of " + ToString(path.start);
  }
  for (size_t i = 0; i < path.points.size(); ++i) {
    const PsiSample& s = path.points[i];
    if (s.samples.empty())
      return "point " + std::to_string(i) + " has no samples";
    const double mean = std::accumulate(s.samples.begin(), s.samples.end(), 0.0) /
                        static_cast<double>(s.samples.size());
    if (!NearlyEqual(mean, s.mean))
      return "point " + std::to_string(i) + " mean disagrees with its samples";
    if (i == 0)
      continue;
    const NetPoint& prev = path.points[i - 1].point;
    const NetPoint& cur = s.point;
    const bool same_lat = NearlyEqual(prev.latency_ms, cur.latency_ms);
    const bool same_bw = NearlyEqual(prev.bandwidth_kbps, cur.bandwidth_kbps);
    const bool lat_step =
        same_bw &&
        NearlyEqual(LatSuccessor(prev.latency_ms, path.schedule), cur.latency_ms);
    const bool bw_step =
        same_lat && NearlyEqual(BwSuccessor(prev.bandwidth_kbps, path.schedule),
                                cur.bandwidth_kbps);
    if (!lat_step && !bw_step) {
      return "step " + std::to_string(i) + " from " + ToString(prev) + " to " +
             ToString(cur) + " is not a single schedule move";
    }
  }
  return std::nullopt;
}

std::optional<std::string> Envelope::Problem() const {
  std::ostringstream where;
  if (source_row > 0)
    where << "row " << source_row << ": ";
  where << provider << "/" << city << "/" << year << ": ";
  const bool finite = std::isfinite(lat_lo_ms) && std::isfinite(lat_hi_ms) &&
                      std::isfinite(bw_lo_kbps) && std::isfinite(bw_hi_kbps);
  if (!finite)
    return where.str() + "non-finite bound";
  if (lat_lo_ms <= 0.0 || bw_lo_kbps <= 0.0)
    return where.str() + "non-positive lower bound";
  if (!(lat_lo_ms < lat_hi_ms))
    return where.str() + "latency bounds are not increasing";
  if (!(bw_lo_kbps < bw_hi_kbps))
    return where.str() + "bandwidth bounds are not increasing";
  return std::nullopt;
}

void Envelope::Validate() const {
  if (auto problem = Problem())
    throw InvalidArgument("invalid envelope " + *problem);
}

bool Envelope::Contains(const NetPoint& point) const {
  return point.latency_ms >= lat_lo_ms && point.latency_ms <= lat_hi_ms &&
         point.bandwidth_kbps >= bw_lo_kbps &&
         point.bandwidth_kbps <= bw_hi_kbps;
}

std::string_view ToString(CaseLabel label) {
  switch (label) {
    case CaseLabel::kA:
      return "A";
    case CaseLabel::kB:
      return "B";
    case CaseLabel::kC:
      return "C";
    case CaseLabel::kD:
      return "D";
    case CaseLabel::kTerminatesInside:
      return "TerminatesInside";
    case CaseLabel::kBeyondPath:
      return "BeyondPath";
  }
  return "?";
}

std::optional<CaseLabel> ParseCaseLabel(std::string_view text) {
  for (CaseLabel label :
       {CaseLabel::kA, CaseLabel::kB, CaseLabel::kC, CaseLabel::kD,
        CaseLabel::kTerminatesInside, CaseLabel::kBeyondPath}) {
    if (ToString(label) == text)
      return label;
  }
  return std::nullopt;
}

}  // namespace cpi
