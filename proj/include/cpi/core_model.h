#ifndef CPI_CORE_MODEL_H_
#define CPI_CORE_MODEL_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpi/error.h"

namespace cpi {

// A coordinate on the latency/bandwidth plane. Lower latency and higher
// bandwidth are "better" network conditions.
struct NetPoint {
  double latency_ms = 0.0;
  double bandwidth_kbps = 0.0;

  bool IsValid() const;
  // Throws InvalidArgument when the point is outside the plane.
  void Validate() const;

  friend bool operator==(const NetPoint&, const NetPoint&) = default;
};

std::string ToString(const NetPoint& point);

// The single-axis improvement steps a CPI search may take, plus the bounds
// outside of which candidates are rejected.
//
// Bandwidth doubles until it would pass |doubling_ceiling_kbps| and then
// grows by |linear_step_kbps|; latency falls by |latency_step_ms|.
struct StepSchedule {
  double latency_step_ms = 10.0;
  double doubling_ceiling_kbps = 8192.0;
  double linear_step_kbps = 8192.0;
  double latency_floor_ms = 20.0;
  double bandwidth_ceiling_kbps = 307200.0;

  void Validate() const;

  friend bool operator==(const StepSchedule&, const StepSchedule&) = default;
};

// The starting conditions used when the caller does not pick one.
inline constexpr NetPoint kDefaultStart{180.0, 256.0};

// Next bandwidth on the schedule. A doubled value that overshoots the
// doubling ceiling is clamped to the ceiling once; from the ceiling on,
// steps are linear. The result may exceed bandwidth_ceiling_kbps; bounds
// checks are the caller's job.
double BwSuccessor(double bandwidth_kbps, const StepSchedule& schedule);

// Next latency on the schedule. May fall below latency_floor_ms.
double LatSuccessor(double latency_ms, const StepSchedule& schedule);

// Every bandwidth reachable from |start_kbps| (inclusive) without passing
// the schedule's bandwidth ceiling.
std::vector<double> BandwidthSequence(double start_kbps,
                                      const StepSchedule& schedule);

// Whether |point| is inside the schedule's search bounds.
bool WithinBounds(const NetPoint& point, const StepSchedule& schedule);

enum class Aggregation { kMean, kMedian };

std::string_view ToString(Aggregation aggregation);
std::optional<Aggregation> ParseAggregation(std::string_view text);

// PSI measured at one point over one or more trials. Lower PSI is better.
struct PsiSample {
  NetPoint point;
  std::vector<double> samples;
  double mean = 0.0;  // Always the arithmetic mean of |samples|.

  // Builds a sample and computes its mean. Throws InvalidArgument on an
  // empty or non-positive sample list.
  static PsiSample FromSamples(const NetPoint& point,
                               std::vector<double> samples);

  double Median() const;
  // The value the search compares candidates by.
  double Score(Aggregation aggregation) const;
};

// A staircase through the plane, starting at |start|, with the PSI measured
// at every vertex.
struct CpiPath {
  std::string site_id;
  StepSchedule schedule;
  NetPoint start = kDefaultStart;
  std::vector<PsiSample> points;
};

// Returns a description of the first staircase violation, or nullopt when
// the path starts at |path.start|, every step changes exactly one axis by
// exactly one schedule move, and samples are internally consistent.
std::optional<std::string> CheckStaircase(const CpiPath& path);

// Axis-aligned rectangle of the network conditions a provider offers in a
// city during one measurement period.
struct Envelope {
  std::string provider;
  std::string city;
  int year = 0;
  double lat_lo_ms = 0.0;
  double lat_hi_ms = 0.0;
  double bw_lo_kbps = 0.0;
  double bw_hi_kbps = 0.0;
  // 1-based data row in the file the envelope was loaded from, 0 if it was
  // built in memory. Only used to make diagnostics point somewhere useful.
  int source_row = 0;

  // nullopt when valid, otherwise what is wrong with it.
  std::optional<std::string> Problem() const;
  void Validate() const;

  bool Contains(const NetPoint& point) const;
};

enum class CaseLabel { kA, kB, kC, kD, kTerminatesInside, kBeyondPath };

std::string_view ToString(CaseLabel label);
std::optional<CaseLabel> ParseCaseLabel(std::string_view text);

// A and D mean lower latency is the productive improvement; B and C mean
// more bandwidth is.
inline bool IsLatencyLimited(CaseLabel label) {
  return label == CaseLabel::kA || label == CaseLabel::kD;
}
inline bool IsBandwidthLimited(CaseLabel label) {
  return label == CaseLabel::kB || label == CaseLabel::kC;
}

}  // namespace cpi

#endif  // CPI_CORE_MODEL_H_
