#include "cpi/cpi_search.h"

#include <atomic>
#include <random>

#include <gtest/gtest.h>

#include "test_oracles.h"

namespace cpi {
namespace {

using testing::FunctionBackend;
using testing::OracleGreedyPath;

std::vector<NetPoint> PointsOf(const CpiPath& path) {
  std::vector<NetPoint> out;
  for (const PsiSample& s : path.points)
    out.push_back(s.point);
  return out;
}

ReplayGrid GridOf(const std::vector<std::pair<NetPoint, double>>& cells) {
  ReplayGrid grid;
  for (const auto& [p, psi] : cells)
    grid.entries[{p.latency_ms, p.bandwidth_kbps}] = {psi};
  return grid;
}

// Fails every Measure() call after the first |budget| calls.
class FailingBackend : public PsiBackend {
 public:
  FailingBackend(PsiBackend& inner, int budget)
      : inner_(inner), budget_(budget) {}
  BackendDescriptor Descriptor() const override {
    BackendDescriptor d = inner_.Descriptor();
    d.concurrency_safe = false;
    return d;
  }
  PsiSample Measure(const NetPoint& point, int trials) override {
    if (calls_++ >= budget_)
      throw CommandFailure("injected failure", "boom");
    return inner_.Measure(point, trials);
  }

 private:
  PsiBackend& inner_;
  const int budget_;
  int calls_ = 0;
};

TEST(CandidatesTest, LatencyFirstThenBandwidth) {
  EXPECT_EQ((std::vector<NetPoint>{{170, 256}, {180, 512}}),
            Candidates({180, 256}, StepSchedule()));
}

TEST(CandidatesTest, EmptyAtBounds) {
  EXPECT_TRUE(Candidates({20, 307200}, StepSchedule()).empty());
  // 25 - 10 is below the floor and the bandwidth is at the ceiling.
  EXPECT_TRUE(Candidates({25, 307200}, StepSchedule()).empty());
  EXPECT_EQ((std::vector<NetPoint>{{20, 303104}}),
            Candidates({20, 294912}, StepSchedule()));
  EXPECT_EQ((std::vector<NetPoint>{{20, 307200}}),
            Candidates({30, 307200}, StepSchedule()));
}

TEST(SearchTest, ReplayedFirstDecision) {
  // Start 1000, latency candidate 900, bandwidth candidate 800.
  ReplayBackend backend(GridOf({{{180, 256}, 1000},
                                {{170, 256}, 900},
                                {{180, 512}, 800}}));
  try {
    SearchWithTrace(backend, SearchOptions(), "fig2");
    FAIL() << "grid is incomplete; search should abort";
  } catch (const SearchAborted& e) {
    const SearchTrace& t = e.partial();
    ASSERT_EQ(2u, t.path.points.size());
    EXPECT_EQ((NetPoint{180, 512}), t.path.points[1].point);
    EXPECT_EQ(800.0, t.path.points[1].mean);
    ASSERT_EQ(1u, t.steps.size());
    EXPECT_EQ(1u, t.steps[0].chosen);
    EXPECT_NE(std::string::npos, std::string(e.what()).find("replay grid"));
  }
}

TEST(SearchTest, TiesGoToLatency) {
  StepSchedule s;
  s.latency_floor_ms = 170;
  s.bandwidth_ceiling_kbps = 512;
  s.doubling_ceiling_kbps = 512;
  ReplayBackend backend(GridOf({{{180, 256}, 1000},
                                {{170, 256}, 700},
                                {{180, 512}, 700},
                                {{170, 512}, 650}}));
  SearchOptions options;
  options.schedule = s;
  const CpiPath path = Search(backend, options);
  EXPECT_EQ((std::vector<NetPoint>{{180, 256}, {170, 256}, {170, 512}}),
            PointsOf(path));
}

TEST(SearchTest, LinearSurfaceFirstStep) {
  SyntheticBackend backend({0.0, 5.0, 200000.0, 0.0, 0});
  const SearchTrace t = SearchWithTrace(backend, SearchOptions(), "demo");
  ASSERT_FALSE(t.steps.empty());
  const SearchDecision& first = t.steps[0];
  ASSERT_EQ(2u, first.candidates.size());
  EXPECT_EQ(1631.25, first.candidates[0].mean);
  EXPECT_EQ(1290.625, first.candidates[1].mean);
  EXPECT_EQ((NetPoint{180, 512}), t.path.points[1].point);
}

TEST(SearchTest, MatchesBruteForceOracle) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 30; ++i) {
    const auto surface = testing::RandomSeparableSurface(rng);
    FunctionBackend backend(surface);
    SearchOptions options;
    options.trials = 1 + i % 3;
    const CpiPath path = Search(backend, options);
    EXPECT_EQ(OracleGreedyPath(surface, options.start, options.schedule),
              PointsOf(path))
        << "surface " << i;
    EXPECT_FALSE(CheckStaircase(path));
  }
}

TEST(SearchTest, OddStartsAndSchedulesMatchOracle) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> lat(5, 30), bw(1, 3000);
  for (int i = 0; i < 30; ++i) {
    const auto surface = testing::RandomSeparableSurface(rng);
    FunctionBackend backend(surface);
    SearchOptions options;
    options.start = {10.0 * lat(rng), static_cast<double>(bw(rng))};
    options.schedule.bandwidth_ceiling_kbps = 65536;
    options.schedule.latency_floor_ms = 30;
    const CpiPath path = Search(backend, options);
    EXPECT_EQ(OracleGreedyPath(surface, options.start, options.schedule),
              PointsOf(path));
    EXPECT_FALSE(CheckStaircase(path)) << *CheckStaircase(path);
  }
}

TEST(SearchTest, SeparableSurfaceImprovesEveryStep) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    FunctionBackend backend(testing::RandomSeparableSurface(rng));
    const CpiPath path = Search(backend, SearchOptions());
    for (size_t k = 1; k < path.points.size(); ++k)
      EXPECT_LT(path.points[k].mean, path.points[k - 1].mean);
  }
}

TEST(SearchTest, LengthBoundedBySchedule) {
  SyntheticBackend backend({0.0, 5.0, 200000.0, 0.0, 0});
  const SearchOptions options;
  const CpiPath path = Search(backend, options);
  const size_t lat_steps = static_cast<size_t>(
      (options.start.latency_ms - options.schedule.latency_floor_ms) /
      options.schedule.latency_step_ms);
  const size_t bw_steps =
      BandwidthSequence(options.start.bandwidth_kbps, options.schedule).size() -
      1;
  // Without a plateau rule the path runs to both bounds.
  EXPECT_EQ(1 + lat_steps + bw_steps, path.points.size());
  EXPECT_EQ((NetPoint{20, 303104}), path.points.back().point);
}

TEST(SearchTest, PlateauStopsEarly) {
  SyntheticBackend backend({0.0, 5.0, 200000.0, 0.0, 0});
  SearchOptions options;
  options.plateau_epsilon = 50.0;
  const SearchTrace t = SearchWithTrace(backend, options);
  ASSERT_FALSE(t.plateau_candidates.empty());
  const double last = t.path.points.back().mean;
  double best = t.plateau_candidates[0].mean;
  for (const PsiSample& c : t.plateau_candidates)
    best = std::min(best, c.mean);
  EXPECT_LT(last - best, 50.0);
  EXPECT_EQ(t.steps.size() + 1, t.path.points.size());
  const CpiPath full = Search(backend, SearchOptions());
  EXPECT_LT(t.path.points.size(), full.points.size());
}

TEST(SearchTest, PlateauMeasuresLoneCandidate) {
  // At the latency floor only the bandwidth move remains.
  SyntheticBackend backend({0.0, 5.0, 200000.0, 0.0, 0});
  SearchOptions options;
  options.start = {20, 8192};
  options.plateau_epsilon = 0.0;
  const SearchTrace t = SearchWithTrace(backend, options);
  for (const SearchDecision& d : t.steps)
    EXPECT_EQ(1u, d.candidates.size());
  EXPECT_EQ(t.path.points.size(), BandwidthSequence(8192, options.schedule).size());
}

TEST(SearchTraceTest, TraceReplaysThroughSurface) {
  const SyntheticSurface surface{3.0, 4.0, 250000.0, 0.0, 0};
  SyntheticBackend backend(surface);
  const SearchTrace t = SearchWithTrace(backend, SearchOptions());
  EXPECT_EQ(t.path.points.size() - 1, t.steps.size());
  for (size_t k = 0; k < t.steps.size(); ++k) {
    for (const PsiSample& c : t.steps[k].candidates)
      EXPECT_EQ(surface.Evaluate(c.point), c.mean);
    EXPECT_EQ(t.steps[k].candidates[t.steps[k].chosen].point,
              t.path.points[k + 1].point);
  }
}

TEST(SearchTraceTest, AbortKeepsCompletedDecisions) {
  SyntheticBackend inner({0.0, 5.0, 200000.0, 0.0, 0});
  for (int k : {0, 1, 4}) {
    // One call for the start, two per two-candidate step; fail inside step k.
    FailingBackend backend(inner, 1 + 2 * k + 1);
    try {
      SearchWithTrace(backend, SearchOptions(), "abort");
      FAIL();
    } catch (const SearchAborted& e) {
      EXPECT_EQ(static_cast<size_t>(k), e.partial().steps.size());
      EXPECT_EQ(static_cast<size_t>(k) + 1, e.partial().path.points.size());
      EXPECT_NE(std::string::npos, std::string(e.what()).find("boom"));
    }
  }
  FailingBackend dead(inner, 0);
  try {
    Search(dead, SearchOptions());
    FAIL();
  } catch (const SearchAborted& e) {
    EXPECT_TRUE(e.partial().path.points.empty());
  }
}

TEST(SearchTest, MedianAggregationIgnoresOutliers) {
  ReplayGrid grid;
  grid.entries[{180, 256}] = {1000};
  grid.entries[{170, 256}] = {500, 510, 5000};  // Median 510, mean 2003.
  grid.entries[{180, 512}] = {800, 800, 800};
  StepSchedule s;
  s.latency_floor_ms = 170;
  s.doubling_ceiling_kbps = s.bandwidth_ceiling_kbps = 512;
  grid.entries[{170, 512}] = {100};
  SearchOptions options;
  options.schedule = s;
  options.trials = 3;
  ReplayBackend backend(grid);
  EXPECT_EQ((NetPoint{180, 512}), Search(backend, options).points[1].point);
  options.aggregation = Aggregation::kMedian;
  EXPECT_EQ((NetPoint{170, 256}), Search(backend, options).points[1].point);
}

TEST(SearchTest, RejectsBadOptions) {
  SyntheticBackend backend({0.0, 5.0, 200000.0, 0.0, 0});
  SearchOptions options;
  options.trials = 0;
  EXPECT_THROW(Search(backend, options), InvalidArgument);
  options = SearchOptions();
  options.start = {10, 256};  // Below the latency floor.
  EXPECT_THROW(Search(backend, options), InvalidArgument);
}

}  // namespace
}  // namespace cpi
