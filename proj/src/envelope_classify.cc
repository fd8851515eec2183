#include "cpi/envelope_classify.h"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace cpi {

namespace {

bool SegmentTouches(const NetPoint& p, const NetPoint& q, const Envelope& env) {
  const double bw_min = std::min(p.bandwidth_kbps, q.bandwidth_kbps);
  const double bw_max = std::max(p.bandwidth_kbps, q.bandwidth_kbps);
  const double lat_min = std::min(p.latency_ms, q.latency_ms);
  const double lat_max = std::max(p.latency_ms, q.latency_ms);
  return bw_min <= env.bw_hi_kbps && bw_max >= env.bw_lo_kbps &&
         lat_min <= env.lat_hi_ms && lat_max >= env.lat_lo_ms;
}

// Schedule moves needed to take bandwidth from |from| to at least |to|.
long long BandwidthStepsBetween(double from, double to,
                                const StepSchedule& schedule) {
  if (std::isinf(to))
    return std::numeric_limits<long long>::max();
  long long steps = 0;
  for (double bw = from; bw < to; bw = BwSuccessor(bw, schedule))
    ++steps;
  return steps;
}

long long LatencyStepsBetween(double from, double to,
                              const StepSchedule& schedule) {
  return static_cast<long long>(
      std::ceil((from - to) / schedule.latency_step_ms));
}

}  // namespace

double LatAt(const CpiPath& path, double bw_kbps) {
  double latency = kUnreached;
  for (const PsiSample& s : path.points) {
    if (s.point.bandwidth_kbps <= bw_kbps)
      latency = s.point.latency_ms;
  }
  return latency;
}

double BwAt(const CpiPath& path, double lat_ms) {
  for (const PsiSample& s : path.points) {
    if (s.point.latency_ms <= lat_ms)
      return s.point.bandwidth_kbps;
  }
  return kUnreached;
}

CaseLabel Classify(const CpiPath& path, const Envelope& env) {
  if (path.points.size() < 2) {
    throw DegeneratePath("path '" + path.site_id + "' has " +
                         std::to_string(path.points.size()) +
                         " point(s); classification needs at least 2");
  }
  env.Validate();

  bool touched = env.Contains(path.points.front().point);
  std::optional<CaseLabel> last_exit;
  for (size_t i = 1; i < path.points.size(); ++i) {
    const NetPoint& p = path.points[i - 1].point;
    const NetPoint& q = path.points[i].point;
    if (!SegmentTouches(p, q, env))
      continue;
    touched = true;
    if (!env.Contains(q)) {
      // A latency step leaves through lat_lo, a bandwidth step through bw_hi.
      // A corner exit is labeled by the step that made it.
      const bool latency_step = p.bandwidth_kbps == q.bandwidth_kbps;
      last_exit = latency_step ? CaseLabel::kA : CaseLabel::kB;
    }
  }
  if (touched) {
    if (env.Contains(path.points.back().point))
      return CaseLabel::kTerminatesInside;
    return last_exit.value_or(CaseLabel::kBeyondPath);
  }

  const double lat_at_bw_hi = LatAt(path, env.bw_hi_kbps);
  const double bw_at_lat_lo = BwAt(path, env.lat_lo_ms);
  const bool right_of_env = bw_at_lat_lo > env.bw_hi_kbps;
  const bool below_env = lat_at_bw_hi < env.lat_lo_ms;
  if (right_of_env && !below_env)
    return CaseLabel::kC;
  if (below_env && !right_of_env)
    return CaseLabel::kD;
  if (right_of_env && below_env) {
    // Compare how many schedule moves each single-axis improvement needs;
    // ties go to latency.
    const long long bw_steps = BandwidthStepsBetween(
        env.bw_hi_kbps, bw_at_lat_lo, path.schedule);
    const long long lat_steps =
        LatencyStepsBetween(env.lat_lo_ms, lat_at_bw_hi, path.schedule);
    return bw_steps < lat_steps ? CaseLabel::kC : CaseLabel::kD;
  }
  return CaseLabel::kBeyondPath;
}

std::vector<ClassificationRow> ClassifyBatch(const std::vector<CpiPath>& paths,
                                             const std::vector<Envelope>& envs) {
  std::vector<ClassificationRow> rows;
  rows.reserve(paths.size() * envs.size());
  for (const CpiPath& path : paths) {
    for (const Envelope& env : envs) {
      ClassificationRow row{path.site_id, env.provider, env.city, env.year,
                            std::nullopt, {}};
      if (auto problem = env.Problem()) {
        row.error = "invalid envelope " + *problem;
      } else {
        try {
          row.label = Classify(path, env);
        } catch (const Error& e) {
          row.error = e.what();
        }
      }
      rows.push_back(std::move(row));
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ClassificationRow& x, const ClassificationRow& y) {
                     return std::tie(x.site_id, x.provider, x.city, x.year) <
                            std::tie(y.site_id, y.provider, y.city, y.year);
                   });
  return rows;
}

void CaseCounts::Add(const ClassificationRow& row) {
  if (!row.label) {
    ++errors;
    return;
  }
  switch (*row.label) {
    case CaseLabel::kA:
      ++a;
      break;
    case CaseLabel::kB:
      ++b;
      break;
    case CaseLabel::kC:
      ++c;
      break;
    case CaseLabel::kD:
      ++d;
      break;
    case CaseLabel::kTerminatesInside:
      ++terminates_inside;
      break;
    case CaseLabel::kBeyondPath:
      ++beyond_path;
      break;
  }
}

CaseRatio ComputeCaseRatio(const CaseCounts& counts) {
  CaseRatio result;
  const double bandwidth_limited = static_cast<double>(counts.b + counts.c);
  if (counts.a + counts.d > 0)
    result.ratio = bandwidth_limited / static_cast<double>(counts.a + counts.d);
  if (counts.Classified() > 0)
    result.share = bandwidth_limited / static_cast<double>(counts.Classified());
  return result;
}

CaseRatio CaseRatioOf(const std::vector<ClassificationRow>& rows) {
  if (rows.empty())
    throw EmptyInput("no classification rows");
  CaseCounts counts;
  for (const ClassificationRow& row : rows)
    counts.Add(row);
  return ComputeCaseRatio(counts);
}

}  // namespace cpi
