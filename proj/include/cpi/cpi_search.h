#ifndef CPI_CPI_SEARCH_H_
#define CPI_CPI_SEARCH_H_

#include <optional>
#include <string>
#include <vector>

#include "cpi/core_model.h"
#include "cpi/error.h"
#include "cpi/psi_backend.h"

namespace cpi {

// The latency candidate (if it stays at or above the latency floor) followed
// by the bandwidth candidate (if it stays at or below the bandwidth ceiling).
// An empty result means the search is done.
std::vector<NetPoint> Candidates(const NetPoint& current,
                                 const StepSchedule& schedule);

struct SearchOptions {
  NetPoint start = kDefaultStart;
  StepSchedule schedule;
  int trials = 7;
  // When set, stop once the best candidate improves on the current point by
  // less than this much.
  std::optional<double> plateau_epsilon;
  Aggregation aggregation = Aggregation::kMean;
};

// One greedy step: every candidate that was measured and the one appended.
struct SearchDecision {
  std::vector<PsiSample> candidates;  // Latency candidate first, if present.
  size_t chosen = 0;                  // Index into |candidates|.
};

struct SearchTrace {
  CpiPath path;
  // One entry per appended point, so steps.size() == path.points.size() - 1.
  std::vector<SearchDecision> steps;
  // Candidates measured on the step that hit the plateau rule; empty if the
  // search ran to the schedule bounds.
  std::vector<PsiSample> plateau_candidates;
};

// A backend failure stopped the search. Carries everything measured up to
// the failing step.
class SearchAborted : public Error {
 public:
  SearchAborted(const std::string& cause, SearchTrace partial);
  const SearchTrace& partial() const { return partial_; }

 private:
  SearchTrace partial_;
};

// Greedy critical-path-of-improvement search: starting from
// |options.start|, repeatedly measure the latency and bandwidth candidates
// and append the one with the lower score; ties go to latency.
CpiPath Search(PsiBackend& backend, const SearchOptions& options,
               const std::string& site_id = {});

// Search() plus a record of every measured candidate.
SearchTrace SearchWithTrace(PsiBackend& backend, const SearchOptions& options,
                            const std::string& site_id = {});

}  // namespace cpi

#endif  // CPI_CPI_SEARCH_H_
