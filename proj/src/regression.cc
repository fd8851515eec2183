#include "cpi/regression.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "cpi/csv.h"
#include "cpi/format.h"

namespace cpi {

namespace {

// Relative pivot size below which a QR column counts as dependent.
constexpr double kRankThreshold = 1e-10;

std::string ColumnName(size_t column) {
  return column == 0 ? std::string("intercept")
                     : std::string(FeatureNames()[column - 1]);
}

double Median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

const std::array<std::string_view, kFeatureCount>& FeatureNames() {
  static constexpr std::array<std::string_view, kFeatureCount> kNames = {
      "CSS count", "image count", "script count", "CSS KB",
      "text count", "text KB", "script KB", "image KB"};
  return kNames;
}

FeatureVector ToFeatureVector(const PageFeatures& p) {
  return {static_cast<double>(p.css_count),
          static_cast<double>(p.image_count),
          static_cast<double>(p.script_count),
          p.css_kb,
          static_cast<double>(p.text_count),
          p.text_kb,
          p.script_kb,
          p.image_kb};
}

RankDeficient::RankDeficient(const std::string& what,
                             std::vector<size_t> columns)
    : Error(what), columns_(std::move(columns)) {}

double FitResult::Predict(const FeatureVector& features) const {
  double y = intercept;
  for (size_t i = 0; i < kFeatureCount; ++i)
    y += coefficients[i] * features[i];
  return y;
}

FitResult FitOls(const Dataset& data) {
  const Eigen::Index n = static_cast<Eigen::Index>(data.rows.size());
  const Eigen::Index p = kFeatureCount + 1;
  if (n <= static_cast<Eigen::Index>(kFeatureCount)) {
    throw InsufficientData("least squares needs more than " +
                           std::to_string(kFeatureCount) + " rows, got " +
                           std::to_string(n));
  }

  Eigen::MatrixXd design(n, p);
  Eigen::VectorXd target(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const DatasetRow& row = data.rows[static_cast<size_t>(r)];
    if (!std::isfinite(row.target))
      throw InvalidArgument("non-finite regression target");
    design(r, 0) = 1.0;
    for (size_t i = 0; i < kFeatureCount; ++i)
      design(r, static_cast<Eigen::Index>(i) + 1) = row.features[i];
    target(r) = row.target;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.rows(), design.cols());
  qr.setThreshold(kRankThreshold);
  qr.compute(design);
  const Eigen::Index rank = qr.rank();
  if (rank < p) {
    // Columns the pivoting pushed past the rank, plus the independent
    // columns they are combinations of.
    const auto& perm = qr.colsPermutation().indices();
    const Eigen::MatrixXd r = qr.matrixR().template triangularView<Eigen::Upper>();
    const auto r11 = r.topLeftCorner(rank, rank);
    std::set<size_t> involved;
    for (Eigen::Index k = rank; k < p; ++k) {
      involved.insert(static_cast<size_t>(perm(k)));
      if (rank == 0)
        continue;
      const Eigen::VectorXd combo =
          r11.triangularView<Eigen::Upper>().solve(r.block(0, k, rank, 1));
      const double scale = combo.cwiseAbs().maxCoeff();
      for (Eigen::Index j = 0; j < rank; ++j) {
        if (std::abs(combo(j)) > 1e-8 * scale)
          involved.insert(static_cast<size_t>(perm(j)));
      }
    }
    std::vector<size_t> columns(involved.begin(), involved.end());
    std::string names;
    for (size_t c : columns)
      names += (names.empty() ? "" : ", ") + ColumnName(c);
    throw RankDeficient("design matrix has rank " + std::to_string(rank) +
                            " of " + std::to_string(p) +
                            "; collinear columns: " + names,
                        std::move(columns));
  }

  const Eigen::VectorXd beta = qr.solve(target);
  FitResult fit;
  fit.intercept = beta(0);
  for (size_t i = 0; i < kFeatureCount; ++i) {
    fit.coefficients[i] = beta(static_cast<Eigen::Index>(i) + 1);
    fit.sorted_report.emplace_back(FeatureNames()[i], fit.coefficients[i]);
  }
  std::stable_sort(fit.sorted_report.begin(), fit.sorted_report.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  return fit;
}

double FactorError(double prediction, double actual, double floor) {
  const double p = std::max(prediction, floor);
  const double a = std::max(actual, floor);
  return std::max(p, a) / std::min(p, a);
}

SplitEvaluation EvaluateSplits(const Dataset& data, double train_fraction,
                               int trials, uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("train fraction must be in (0, 1)");
  if (trials < 1)
    throw InvalidArgument("trial count must be positive");

  std::vector<DatasetRow> rows = data.rows;
  std::sort(rows.begin(), rows.end(),
            [](const DatasetRow& x, const DatasetRow& y) {
              if (x.features != y.features)
                return x.features < y.features;
              return x.target < y.target;
            });

  const size_t n = rows.size();
  const size_t test_size = static_cast<size_t>(
      std::ceil((1.0 - train_fraction) * static_cast<double>(n) - 1e-9));
  const size_t train_size = n - std::min(n, test_size);
  if (test_size < 1 || train_size <= kFeatureCount) {
    throw InsufficientData(
        "a " + FormatDouble(train_fraction) + " split of " + std::to_string(n) +
        " rows leaves " + std::to_string(train_size) + " training and " +
        std::to_string(test_size) + " test rows");
  }

  SplitEvaluation eval;
  eval.train_size = train_size;
  eval.test_size = test_size;

  std::mt19937_64 master(seed);
  std::vector<uint64_t> trial_seeds(static_cast<size_t>(trials));
  for (uint64_t& s : trial_seeds)
    s = master();

  std::vector<double> all_errors;
  for (int t = 0; t < trials; ++t) {
    SplitTrial trial;
    trial.index = t;
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::mt19937_64 rng(trial_seeds[static_cast<size_t>(t)]);
    std::shuffle(order.begin(), order.end(), rng);

    Dataset train;
    for (size_t i = 0; i < train_size; ++i)
      train.rows.push_back(rows[order[i]]);
    try {
      const FitResult fit = FitOls(train);
      for (size_t i = train_size; i < n; ++i) {
        const DatasetRow& row = rows[order[i]];
        trial.factor_errors.push_back(
            FactorError(fit.Predict(row.features), row.target));
      }
      trial.mean_factor_error =
          std::accumulate(trial.factor_errors.begin(),
                          trial.factor_errors.end(), 0.0) /
          static_cast<double>(trial.factor_errors.size());
      all_errors.insert(all_errors.end(), trial.factor_errors.begin(),
                        trial.factor_errors.end());
    } catch (const RankDeficient& e) {
      trial.skipped = true;
      trial.skip_reason = e.what();
      ++eval.skipped_trials;
    }
    eval.per_trial.push_back(std::move(trial));
  }

  if (all_errors.empty())
    throw InsufficientData("every trial's training split was rank deficient");
  eval.mean_factor_error =
      std::accumulate(all_errors.begin(), all_errors.end(), 0.0) /
      static_cast<double>(all_errors.size());
  eval.median_factor_error = Median(std::move(all_errors));
  return eval;
}

std::vector<RatioRecord> ReadRatioCsv(std::string_view csv_text) {
  const CsvTable table = CsvTable::Parse(csv_text);
  const size_t site_col = table.Column("site_id");
  const size_t ratio_col = table.Column("ratio");
  std::vector<RatioRecord> out;
  for (const CsvTable::Row& row : table.rows()) {
    RatioRecord rec;
    rec.site_id = row.fields[site_col];
    const std::string& text = row.fields[ratio_col];
    if (!text.empty() && text != "NA") {
      rec.ratio = ParseDouble(text);
      if (!rec.ratio || *rec.ratio < 0.0) {
        throw CsvError("ratio line " + std::to_string(row.line) +
                       ": bad ratio '" + text + "'");
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

Dataset JoinDataset(const std::vector<PageFeatures>& features,
                    const std::vector<RatioRecord>& ratios,
                    JoinReport* report) {
  std::map<std::string, const PageFeatures*> by_site;
  for (const PageFeatures& f : features)
    by_site.emplace(f.site_id, &f);

  JoinReport rep;
  std::set<std::string> sites_with_ratios;
  std::set<std::string> missing;
  Dataset data;
  for (const RatioRecord& r : ratios) {
    sites_with_ratios.insert(r.site_id);
    auto it = by_site.find(r.site_id);
    if (it == by_site.end()) {
      missing.insert(r.site_id);
      continue;
    }
    if (!r.ratio) {
      ++rep.undefined_ratio_rows;
      continue;
    }
    data.rows.push_back({ToFeatureVector(*it->second), *r.ratio, r.site_id});
  }
  rep.rows_joined = data.rows.size();
  rep.ratios_without_features.assign(missing.begin(), missing.end());
  for (const auto& [site, unused] : by_site) {
    if (!sites_with_ratios.count(site))
      rep.features_without_ratios.push_back(site);
  }
  if (report)
    *report = std::move(rep);
  return data;
}

}  // namespace cpi
