#include "cpi/regression.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_oracles.h"

namespace cpi {
namespace {

Dataset RandomDataset(std::mt19937_64& rng, size_t n,
                      const std::function<double(const FeatureVector&)>& f) {
  std::uniform_real_distribution<double> count(0, 60), kb(0, 3000);
  Dataset d;
  for (size_t i = 0; i < n; ++i) {
    DatasetRow row;
    for (size_t j = 0; j < kFeatureCount; ++j)
      row.features[j] = (j == 0 || j == 1 || j == 2 || j == 4) ? count(rng)
                                                                : kb(rng);
    row.target = f(row.features);
    d.rows.push_back(row);
  }
  return d;
}

std::vector<double> OracleBeta(const Dataset& d) {
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (const DatasetRow& r : d.rows) {
    std::vector<double> x{1.0};
    x.insert(x.end(), r.features.begin(), r.features.end());
    rows.push_back(std::move(x));
    y.push_back(r.target);
  }
  return testing::NormalEquationsSolve(rows, y);
}

TEST(FitOlsTest, RecoversExactLinearData) {
  std::mt19937_64 rng(1);
  const Dataset d = RandomDataset(
      rng, 40, [](const FeatureVector& x) { return 2.0 * x[0] + 3.0; });
  const FitResult fit = FitOls(d);
  EXPECT_NEAR(3.0, fit.intercept, 1e-9);
  EXPECT_NEAR(2.0, fit.coefficients[0], 1e-9);
  for (size_t j = 1; j < kFeatureCount; ++j)
    EXPECT_NEAR(0.0, fit.coefficients[j], 1e-9) << j;
}

TEST(FitOlsTest, MatchesNormalEquations) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0, 5);
  for (int rep = 0; rep < 20; ++rep) {
    const Dataset d = RandomDataset(rng, 50, [&](const FeatureVector& x) {
      return 0.3 * x[0] - 0.01 * x[3] + 0.002 * x[7] + noise(rng);
    });
    const FitResult fit = FitOls(d);
    const std::vector<double> beta = OracleBeta(d);
    auto rel = [](double a, double b) {
      return std::abs(a - b) / std::max(1e-12, std::abs(b));
    };
    EXPECT_LT(rel(fit.intercept, beta[0]), 1e-8);
    for (size_t j = 0; j < kFeatureCount; ++j)
      EXPECT_LT(rel(fit.coefficients[j], beta[j + 1]), 1e-8) << j;
  }
}

TEST(FitOlsTest, ResidualsOrthogonalToDesign) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0, 1);
  const Dataset d = RandomDataset(
      rng, 120, [&](const FeatureVector& x) { return x[1] + noise(rng); });
  const FitResult fit = FitOls(d);
  for (size_t col = 0; col <= kFeatureCount; ++col) {
    double dot = 0, x_norm = 0, r_norm = 0;
    for (const DatasetRow& row : d.rows) {
      const double x = col == 0 ? 1.0 : row.features[col - 1];
      const double r = row.target - fit.Predict(row.features);
      dot += x * r;
      x_norm += x * x;
      r_norm += r * r;
    }
    EXPECT_LT(std::abs(dot), 1e-8 * std::sqrt(x_norm * r_norm)) << col;
  }
}

TEST(FitOlsTest, SortedReport) {
  std::mt19937_64 rng(4);
  const Dataset d = RandomDataset(rng, 60, [](const FeatureVector& x) {
    return 0.26 * x[0] + 0.04 * x[1] + 0.037 * x[2] + 0.0256 * x[3] +
           0.0197 * x[4] + 0.0023 * x[5] + 0.0004 * x[6] + 0.0001 * x[7];
  });
  const FitResult fit = FitOls(d);
  ASSERT_EQ(kFeatureCount, fit.sorted_report.size());
  for (size_t i = 0; i < kFeatureCount; ++i)
    EXPECT_EQ(FeatureNames()[i], fit.sorted_report[i].first);
  EXPECT_TRUE(std::is_sorted(
      fit.sorted_report.begin(), fit.sorted_report.end(),
      [](const auto& a, const auto& b) { return a.second > b.second; }));
}

TEST(FitOlsTest, DuplicateColumnsAreRankDeficient) {
  std::mt19937_64 rng(5);
  Dataset d = RandomDataset(rng, 30, [](const FeatureVector& x) { return x[0]; });
  for (DatasetRow& r : d.rows)
    r.features[2] = r.features[1];
  try {
    FitOls(d);
    FAIL() << "expected RankDeficient";
  } catch (const RankDeficient& e) {
    EXPECT_EQ((std::vector<size_t>{2, 3}), e.columns());
    EXPECT_NE(std::string::npos, std::string(e.what()).find("image count"));
    EXPECT_NE(std::string::npos, std::string(e.what()).find("script count"));
  }
}

TEST(FitOlsTest, ConstantColumnCollidesWithIntercept) {
  std::mt19937_64 rng(6);
  Dataset d = RandomDataset(rng, 30, [](const FeatureVector& x) { return x[0]; });
  for (DatasetRow& r : d.rows)
    r.features[5] = 4.0;
  try {
    FitOls(d);
    FAIL();
  } catch (const RankDeficient& e) {
    EXPECT_EQ((std::vector<size_t>{0, 6}), e.columns());
  }
}

TEST(FitOlsTest, TooFewRows) {
  std::mt19937_64 rng(7);
  EXPECT_THROW(FitOls(RandomDataset(rng, 8, [](const FeatureVector&) {
                 return 1.0;
               })),
               InsufficientData);
}

TEST(FactorErrorTest, Definition) {
  EXPECT_EQ(2.0, FactorError(4.0, 2.0));
  EXPECT_EQ(2.0, FactorError(2.0, 4.0));
  EXPECT_EQ(1.0, FactorError(3.0, 3.0));
  // Zero and negative values are floored.
  EXPECT_DOUBLE_EQ(2.0, FactorError(-5.0, 2e-6));
  EXPECT_EQ(1.0, FactorError(0.0, 0.0));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> v(-1, 10);
  for (int i = 0; i < 1000; ++i) {
    const double p = v(rng), a = v(rng);
    EXPECT_EQ(FactorError(p, a), FactorError(a, p));
    EXPECT_GE(FactorError(p, a), 1.0);
  }
}

TEST(EvaluateSplitsTest, PerfectFit) {
  std::mt19937_64 rng(9);
  const Dataset d = RandomDataset(rng, 60, [](const FeatureVector& x) {
    return 1.0 + 0.5 * x[0] + 0.001 * x[6];
  });
  const SplitEvaluation e = EvaluateSplits(d, 0.8, 100, 7);
  EXPECT_NEAR(1.0, e.mean_factor_error, 1e-6);
  EXPECT_NEAR(1.0, e.median_factor_error, 1e-6);
  EXPECT_EQ(48u, e.train_size);
  EXPECT_EQ(12u, e.test_size);
  EXPECT_EQ(100u, e.per_trial.size());
}

TEST(EvaluateSplitsTest, DeterministicAndOrderFree) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> noise(0, 3);
  Dataset d = RandomDataset(rng, 45, [&](const FeatureVector& x) {
    return std::abs(0.2 * x[0] + noise(rng));
  });
  const SplitEvaluation a = EvaluateSplits(d, 0.8, 25, 7);
  const SplitEvaluation b = EvaluateSplits(d, 0.8, 25, 7);
  std::shuffle(d.rows.begin(), d.rows.end(), rng);
  const SplitEvaluation c = EvaluateSplits(d, 0.8, 25, 7);
  const SplitEvaluation other_seed = EvaluateSplits(d, 0.8, 25, 8);
  ASSERT_EQ(a.per_trial.size(), c.per_trial.size());
  for (size_t t = 0; t < a.per_trial.size(); ++t) {
    EXPECT_EQ(a.per_trial[t].factor_errors, b.per_trial[t].factor_errors);
    EXPECT_EQ(a.per_trial[t].factor_errors, c.per_trial[t].factor_errors);
  }
  EXPECT_EQ(a.mean_factor_error, c.mean_factor_error);
  EXPECT_NE(a.mean_factor_error, other_seed.mean_factor_error);
}

TEST(EvaluateSplitsTest, InsufficientData) {
  std::mt19937_64 rng(11);
  const Dataset d =
      RandomDataset(rng, 10, [](const FeatureVector& x) { return x[0]; });
  EXPECT_THROW(EvaluateSplits(d, 0.8, 5, 1), InsufficientData);
  EXPECT_THROW(EvaluateSplits(Dataset(), 0.8, 5, 1), InsufficientData);
}

TEST(EvaluateSplitsTest, RankDeficientTrialsAreSkipped) {
  // Ten distinct rows plus four copies of the last one. A training split
  // keeps nine distinct rows unless both test rows are distinct singletons.
  std::mt19937_64 rng(12);
  Dataset d = RandomDataset(rng, 14, [](const FeatureVector& x) { return x[0]; });
  for (size_t i = 10; i < 14; ++i)
    d.rows[i] = d.rows[9];
  const SplitEvaluation e = EvaluateSplits(d, 0.9, 40, 3);
  EXPECT_GT(e.skipped_trials, 0);
  EXPECT_LT(e.skipped_trials, 40);
  EXPECT_EQ(40u, e.per_trial.size());
}

TEST(JoinDatasetTest, JoinsAndReports) {
  PageFeatures a;
  a.site_id = "a";
  a.css_count = 3;
  PageFeatures b;
  b.site_id = "b";
  const std::vector<RatioRecord> ratios = ReadRatioCsv(
      "site_id,provider,ratio\n"
      "a,x,0.5\n"
      "a,y,NA\n"
      "zz,x,1\n"
      "a,z,\n"
      "a,w,2\n");
  JoinReport report;
  const Dataset d = JoinDataset({a, b}, ratios, &report);
  ASSERT_EQ(2u, d.rows.size());
  EXPECT_EQ(0.5, d.rows[0].target);
  EXPECT_EQ(3.0, d.rows[0].features[0]);
  EXPECT_EQ(2u, report.undefined_ratio_rows);
  EXPECT_EQ(std::vector<std::string>{"zz"}, report.ratios_without_features);
  EXPECT_EQ(std::vector<std::string>{"b"}, report.features_without_ratios);
}

}  // namespace
}  // namespace cpi
