#include "cpi/cpi_search.h"

#include <future>

namespace cpi {

namespace {

std::vector<PsiSample> MeasureAll(PsiBackend& backend,
                                  const std::vector<NetPoint>& points,
                                  int trials) {
  std::vector<PsiSample> out;
  if (points.size() == 2 && backend.Descriptor().concurrency_safe) {
    auto second = std::async(std::launch::async, [&] {
      return backend.Measure(points[1], trials);
    });
    // Drain the future even if the first measurement throws.
    PsiSample first;
    std::exception_ptr first_error;
    try {
      first = backend.Measure(points[0], trials);
    } catch (...) {
      first_error = std::current_exception();
    }
    PsiSample other = second.get();
    if (first_error)
      std::rethrow_exception(first_error);
    out.push_back(std::move(first));
    out.push_back(std::move(other));
    return out;
  }
  for (const NetPoint& p : points)
    out.push_back(backend.Measure(p, trials));
  return out;
}

}  // namespace

std::vector<NetPoint> Candidates(const NetPoint& current,
                                 const StepSchedule& schedule) {
  std::vector<NetPoint> out;
  const double lat = LatSuccessor(current.latency_ms, schedule);
  if (lat >= schedule.latency_floor_ms)
    out.push_back({lat, current.bandwidth_kbps});
  const double bw = BwSuccessor(current.bandwidth_kbps, schedule);
  if (bw <= schedule.bandwidth_ceiling_kbps)
    out.push_back({current.latency_ms, bw});
  return out;
}

SearchAborted::SearchAborted(const std::string& cause, SearchTrace partial)
    : Error("CPI search aborted after " +
            std::to_string(partial.path.points.size()) + " point(s): " + cause),
      partial_(std::move(partial)) {}

SearchTrace SearchWithTrace(PsiBackend& backend, const SearchOptions& options,
                            const std::string& site_id) {
  options.schedule.Validate();
  options.start.Validate();
  if (!WithinBounds(options.start, options.schedule)) {
    throw InvalidArgument("start point " + ToString(options.start) +
                          " is outside the schedule bounds");
  }
  if (options.trials < 1)
    throw InvalidArgument("trial count must be positive");
  if (options.plateau_epsilon && !(*options.plateau_epsilon >= 0.0))
    throw InvalidArgument("plateau epsilon must be non-negative");

  SearchTrace trace;
  trace.path.site_id = site_id;
  trace.path.schedule = options.schedule;
  trace.path.start = options.start;

  try {
    trace.path.points.push_back(backend.Measure(options.start, options.trials));
    while (true) {
      const PsiSample& current = trace.path.points.back();
      const std::vector<NetPoint> candidates =
          Candidates(current.point, options.schedule);
      if (candidates.empty())
        break;

      SearchDecision decision;
      decision.candidates = MeasureAll(backend, candidates, options.trials);
      for (size_t i = 1; i < decision.candidates.size(); ++i) {
        if (decision.candidates[i].Score(options.aggregation) <
            decision.candidates[decision.chosen].Score(options.aggregation)) {
          decision.chosen = i;
        }
      }
      const PsiSample& best = decision.candidates[decision.chosen];
      if (options.plateau_epsilon &&
          current.Score(options.aggregation) - best.Score(options.aggregation) <
              *options.plateau_epsilon) {
        trace.plateau_candidates = std::move(decision.candidates);
        break;
      }
      trace.path.points.push_back(best);
      trace.steps.push_back(std::move(decision));
    }
  } catch (const Error& e) {
    throw SearchAborted(e.what(), std::move(trace));
  }
  return trace;
}

CpiPath Search(PsiBackend& backend, const SearchOptions& options,
               const std::string& site_id) {
  return SearchWithTrace(backend, options, site_id).path;
}

}  // namespace cpi
