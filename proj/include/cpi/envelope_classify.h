#ifndef CPI_ENVELOPE_CLASSIFY_H_
#define CPI_ENVELOPE_CLASSIFY_H_

#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpi/core_model.h"
#include "cpi/error.h"

namespace cpi {

class DegeneratePath : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

inline constexpr double kUnreached = std::numeric_limits<double>::infinity();

// Latency of the staircase at bandwidth |bw_kbps|: the latency of the last
// point whose bandwidth is <= |bw_kbps|. kUnreached when the whole path lies
// to the right of |bw_kbps|; clamps to the final latency past its end.
double LatAt(const CpiPath& path, double bw_kbps);

// Bandwidth of the staircase at latency |lat_ms|: the bandwidth at which the
// path first reaches a latency <= |lat_ms|. kUnreached when the path never
// gets that low.
double BwAt(const CpiPath& path, double lat_ms);

// Classifies how |path| relates to |env|:
//   A  the path leaves the envelope through its minimum-latency edge,
//   B  the path leaves through its maximum-bandwidth edge,
//   C  the envelope lies left of (below-left of) the path,
//   D  the envelope lies above (above-right of) the path,
//   TerminatesInside / BeyondPath  for paths that end inside the envelope
//   or never come near it.
// Throws DegeneratePath for paths with fewer than two points and
// InvalidArgument for an invalid envelope.
CaseLabel Classify(const CpiPath& path, const Envelope& env);

struct ClassificationRow {
  std::string site_id;
  std::string provider;
  std::string city;
  int year = 0;
  std::optional<CaseLabel> label;  // Empty when |error| is set.
  std::string error;
};

// Classifies every (path, envelope) pair. Rows are sorted by site, provider,
// city, year. Per-pair failures become rows with |error| set.
std::vector<ClassificationRow> ClassifyBatch(const std::vector<CpiPath>& paths,
                                             const std::vector<Envelope>& envs);

struct CaseCounts {
  long long a = 0, b = 0, c = 0, d = 0;
  long long terminates_inside = 0;
  long long beyond_path = 0;
  long long errors = 0;

  void Add(const ClassificationRow& row);
  long long Classified() const { return a + b + c + d; }
  long long Total() const {
    return Classified() + terminates_inside + beyond_path + errors;
  }
};

struct CaseRatio {
  // (B + C) / (A + D); empty when A + D == 0.
  std::optional<double> ratio;
  // (B + C) / (A + B + C + D); empty when no row is A-D.
  std::optional<double> share;
};

CaseRatio ComputeCaseRatio(const CaseCounts& counts);
// Throws EmptyInput when |rows| is empty.
CaseRatio CaseRatioOf(const std::vector<ClassificationRow>& rows);

}  // namespace cpi

#endif  // CPI_ENVELOPE_CLASSIFY_H_
