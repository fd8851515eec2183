#ifndef CPI_REGRESSION_H_
#define CPI_REGRESSION_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cpi/error.h"
#include "cpi/har_features.h"

namespace cpi {

inline constexpr size_t kFeatureCount = 8;

using FeatureVector = std::array<double, kFeatureCount>;

// Feature order used everywhere in this module: css_count, image_count,
// script_count, css_kb, text_count, text_kb, script_kb, image_kb.
const std::array<std::string_view, kFeatureCount>& FeatureNames();

FeatureVector ToFeatureVector(const PageFeatures& page);

struct DatasetRow {
  FeatureVector features{};
  double target = 0.0;
  std::string site_id;  // Informational.
};

struct Dataset {
  std::vector<DatasetRow> rows;
};

class RankDeficient : public Error {
 public:
  RankDeficient(const std::string& what, std::vector<size_t> columns);
  // Design-matrix columns involved in the dependency: 0 is the intercept,
  // 1 + i is feature i.
  const std::vector<size_t>& columns() const { return columns_; }

 private:
  std::vector<size_t> columns_;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

struct FitResult {
  double intercept = 0.0;
  FeatureVector coefficients{};
  // (factor name, coefficient), largest coefficient first.
  std::vector<std::pair<std::string, double>> sorted_report;

  double Predict(const FeatureVector& features) const;
};

// Least squares with an intercept, solved by column-pivoted Householder QR.
// Throws InsufficientData when there are no more rows than features and
// RankDeficient when the design matrix loses rank.
FitResult FitOls(const Dataset& data);

inline constexpr double kFactorErrorFloor = 1e-6;

// max(p, a) / min(p, a) with both clamped below at |floor|; symmetric and
// never below 1.
double FactorError(double prediction, double actual,
                   double floor = kFactorErrorFloor);

struct SplitTrial {
  int index = 0;
  bool skipped = false;  // Training split was rank deficient.
  std::string skip_reason;
  std::vector<double> factor_errors;  // One per test row.
  double mean_factor_error = 0.0;
};

struct SplitEvaluation {
  double mean_factor_error = 0.0;
  double median_factor_error = 0.0;
  size_t train_size = 0;
  size_t test_size = 0;
  int skipped_trials = 0;
  std::vector<SplitTrial> per_trial;
};

// Repeated shuffled train/test evaluation. Rows are put in a canonical order
// before shuffling, so the result does not depend on input row order.
SplitEvaluation EvaluateSplits(const Dataset& data, double train_fraction,
                               int trials, uint64_t seed);

struct RatioRecord {
  std::string site_id;
  std::optional<double> ratio;  // Empty for "NA" / blank.
};

// Reads any CSV with `site_id` and `ratio` columns.
std::vector<RatioRecord> ReadRatioCsv(std::string_view csv_text);

struct JoinReport {
  size_t rows_joined = 0;
  size_t undefined_ratio_rows = 0;
  std::vector<std::string> ratios_without_features;
  std::vector<std::string> features_without_ratios;
};

// One dataset row per ratio record whose site has features and whose ratio
// is defined.
Dataset JoinDataset(const std::vector<PageFeatures>& features,
                    const std::vector<RatioRecord>& ratios,
                    JoinReport* report = nullptr);

}  // namespace cpi

#endif  // CPI_REGRESSION_H_
