#include "cpi/core_model.h"

#include <random>

#include <gtest/gtest.h>

namespace cpi {
namespace {

TEST(BwSuccessorTest, DoublesBelowCeiling) {
  StepSchedule s;
  EXPECT_EQ(512.0, BwSuccessor(256.0, s));
  EXPECT_EQ(8192.0, BwSuccessor(4096.0, s));
}

TEST(BwSuccessorTest, SwitchesToLinearAtCeiling) {
  StepSchedule s;
  // 2 * 8192 overshoots the doubling ceiling, so the linear step applies.
  EXPECT_EQ(16384.0, BwSuccessor(8192.0, s));
  EXPECT_EQ(24576.0, BwSuccessor(16384.0, s));
}

TEST(BwSuccessorTest, ClampsOvershootingDoublingOnce) {
  StepSchedule s;
  EXPECT_EQ(8192.0, BwSuccessor(5000.0, s));
  EXPECT_EQ(16384.0, BwSuccessor(BwSuccessor(5000.0, s), s));
}

TEST(BwSuccessorTest, StrictlyIncreasing) {
  StepSchedule s;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> bw(1.0, 400000.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = bw(rng);
    const double y = bw(rng);
    EXPECT_GT(BwSuccessor(x, s), x);
    if (x < y)
      EXPECT_LE(BwSuccessor(x, s), BwSuccessor(y, s)) << x << " " << y;
  }
}

TEST(LatSuccessorTest, StepsDownByTen) {
  StepSchedule s;
  EXPECT_EQ(170.0, LatSuccessor(180.0, s));
  EXPECT_EQ(20.0, LatSuccessor(30.0, s));
  // Below the floor; rejecting it is the caller's call.
  EXPECT_EQ(15.0, LatSuccessor(25.0, s));
  EXPECT_FALSE(WithinBounds({15.0, 256.0}, s));
}

TEST(BandwidthSequenceTest, DefaultLadderFrom256) {
  const std::vector<double> seq = BandwidthSequence(256.0, StepSchedule());
  const std::vector<double> head(seq.begin(), seq.begin() + 8);
  EXPECT_EQ((std::vector<double>{256, 512, 1024, 2048, 4096, 8192, 16384,
                                 24576}),
            head);
  EXPECT_EQ(307200.0 - 4096.0, seq.back());  // 8192 + 36 * 8192.
  EXPECT_EQ(6u + 36u, seq.size());
}

TEST(StepScheduleTest, RejectsInvertedCeilings) {
  StepSchedule s;
  s.doubling_ceiling_kbps = 400000;
  EXPECT_THROW(s.Validate(), InvalidArgument);
  s = StepSchedule();
  s.latency_floor_ms = -1;
  EXPECT_THROW(s.Validate(), InvalidArgument);
  EXPECT_NO_THROW(StepSchedule().Validate());
}

TEST(PsiSampleTest, MeanAndMedian) {
  const PsiSample s = PsiSample::FromSamples({180, 256}, {3, 1, 2, 10});
  EXPECT_DOUBLE_EQ(4.0, s.mean);
  EXPECT_DOUBLE_EQ(2.5, s.Median());
  EXPECT_DOUBLE_EQ(4.0, s.Score(Aggregation::kMean));
  EXPECT_DOUBLE_EQ(2.5, s.Score(Aggregation::kMedian));
  EXPECT_THROW(PsiSample::FromSamples({180, 256}, {}), InvalidArgument);
  EXPECT_THROW(PsiSample::FromSamples({180, 256}, {1, -2}), InvalidArgument);
}

CpiPath MakePath(const std::vector<NetPoint>& points) {
  CpiPath path;
  path.site_id = "t";
  for (const NetPoint& p : points)
    path.points.push_back(PsiSample::FromSamples(p, {100.0}));
  return path;
}

TEST(CheckStaircaseTest, AcceptsSingleAxisMoves) {
  EXPECT_FALSE(CheckStaircase(
      MakePath({{180, 256}, {180, 512}, {170, 512}, {160, 512}, {160, 1024}})));
}

TEST(CheckStaircaseTest, RejectsBadPaths) {
  EXPECT_TRUE(CheckStaircase(MakePath({})));
  // Wrong start.
  EXPECT_TRUE(CheckStaircase(MakePath({{170, 256}, {160, 256}})));
  // Diagonal move.
  EXPECT_TRUE(CheckStaircase(MakePath({{180, 256}, {170, 512}})));
  // Skipped bandwidth step.
  EXPECT_TRUE(CheckStaircase(MakePath({{180, 256}, {180, 1024}})));
  // Latency moving the wrong way.
  EXPECT_TRUE(CheckStaircase(MakePath({{180, 256}, {190, 256}})));
  CpiPath bad_mean = MakePath({{180, 256}});
  bad_mean.points[0].mean = 5;
  EXPECT_TRUE(CheckStaircase(bad_mean));
}

TEST(EnvelopeTest, ClosedMembershipAndValidation) {
  Envelope env{"p", "c", 2020, 40, 80, 8000, 32000};
  EXPECT_FALSE(env.Problem());
  EXPECT_TRUE(env.Contains({40, 8000}));
  EXPECT_TRUE(env.Contains({80, 32000}));
  EXPECT_FALSE(env.Contains({39.9, 8000}));
  env.lat_lo_ms = 90;
  ASSERT_TRUE(env.Problem());
  env = Envelope{"p", "c", 2020, -5, 80, 8000, 32000};
  env.source_row = 7;
  ASSERT_TRUE(env.Problem());
  EXPECT_NE(std::string::npos, env.Problem()->find("row 7"));
  EXPECT_THROW(env.Validate(), InvalidArgument);
}

TEST(CaseLabelTest, RoundTripsNames) {
  for (CaseLabel label :
       {CaseLabel::kA, CaseLabel::kB, CaseLabel::kC, CaseLabel::kD,
        CaseLabel::kTerminatesInside, CaseLabel::kBeyondPath}) {
    EXPECT_EQ(label, ParseCaseLabel(ToString(label)));
  }
  EXPECT_FALSE(ParseCaseLabel("E"));
}

}  // namespace
}  // namespace cpi
