#include "tools/cli.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <tuple>

#include "CLI11.hpp"
#include "cpi/cpi_search.h"
#include "cpi/csv.h"
#include "cpi/envelope_classify.h"
#include "cpi/format.h"
#include "cpi/har_features.h"
#include "cpi/path_io.h"
#include "cpi/psi_backend.h"
#include "cpi/regression.h"
#include "tools/envelope_csv.h"
#include "tools/svg_plot.h"

namespace cpi {

namespace {

namespace fs = std::filesystem;

class UsageError : public Error {
 public:
  using Error::Error;
};

struct GlobalFlags {
  std::string out_dir = ".";
  uint64_t seed = 0;
  int trials = 0;
  CLI::Option* trials_option = nullptr;
};

struct MeasureFlags {
  std::string backend = "synthetic";
  std::string site = "site";
  SyntheticSurface surface;
  std::string grid;
  std::string command;
  double timeout_s = 0.0;
  CLI::Option* timeout_option = nullptr;
  SearchOptions search;
  std::string aggregation = "mean";
  double plateau_epsilon = 0.0;
  CLI::Option* plateau_option = nullptr;
};

struct ClassifyFlags {
  std::string paths_dir;
  std::string envelopes;
};

struct FeaturesFlags {
  std::string har_dir;
};

struct RegressFlags {
  std::string features;
  std::string ratios;
  double train_fraction = 0.8;
};

struct PlotFlags {
  std::string paths_dir;
  std::string envelopes;
};

std::string OutFile(const GlobalFlags& global, const std::string& name) {
  fs::create_directories(global.out_dir);
  return (fs::path(global.out_dir) / name).string();
}

// Regular files in |dir| with extension |ext|, sorted by name.
std::vector<fs::path> ListFiles(const std::string& dir, const std::string& ext) {
  if (!fs::is_directory(dir))
    throw Error("'" + dir + "' is not a directory");
  std::vector<fs::path> files;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext)
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<CpiPath> LoadPaths(const std::string& dir) {
  std::vector<CpiPath> paths;
  for (const fs::path& file : ListFiles(dir, ".json")) {
    CpiPath path = ReadCpiPathFile(file.string());
    if (path.site_id.empty())
      path.site_id = file.stem().string();
    paths.push_back(std::move(path));
  }
  if (paths.empty())
    throw Error("no path files (*.json) in '" + dir + "'");
  return paths;
}

std::string CsvText(const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (const auto& row : rows)
    WriteCsvRow(out, row);
  return out.str();
}

std::string OptionalNumber(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : "NA";
}

std::chrono::duration<double> ResolveTimeout(const MeasureFlags& flags) {
  if (flags.timeout_option->count() > 0)
    return std::chrono::duration<double>(flags.timeout_s);
  if (const char* env = std::getenv("CPI_TIMEOUT_S")) {
    const std::optional<double> v = ParseDouble(env);
    if (!v || *v <= 0.0) {
      throw Error("CPI_TIMEOUT_S must be a positive number of seconds, got '" +
                  std::string(env) + "'");
    }
    return std::chrono::duration<double>(*v);
  }
  return kDefaultCommandTimeout;
}

std::unique_ptr<PsiBackend> MakeBackend(const MeasureFlags& flags,
                                        const GlobalFlags& global) {
  if (flags.backend == "synthetic") {
    SyntheticSurface surface = flags.surface;
    surface.seed = global.seed;
    return std::make_unique<SyntheticBackend>(surface);
  }
  if (flags.backend == "replay") {
    if (flags.grid.empty())
      throw UsageError("--backend replay requires --grid");
    return std::make_unique<ReplayBackend>(
        ReplayGrid::ReadFile(flags.grid, flags.site));
  }
  if (flags.command.empty())
    throw UsageError("--backend external requires --command");
  return std::make_unique<ExternalBackend>(flags.command,
                                           ResolveTimeout(flags));
}

int RunMeasure(const MeasureFlags& flags, const GlobalFlags& global,
               std::ostream& out, std::ostream& err) {
  if (flags.site.empty() ||
      flags.site.find_first_of("/\\") != std::string::npos) {
    throw UsageError("--site must be a non-empty name without slashes");
  }
  std::unique_ptr<PsiBackend> backend = MakeBackend(flags, global);
  SearchOptions options = flags.search;
  options.trials = global.trials_option->count() > 0
                       ? global.trials
                       : backend->Descriptor().trials_default;
  options.aggregation = *ParseAggregation(flags.aggregation);
  if (flags.plateau_option->count() > 0)
    options.plateau_epsilon = flags.plateau_epsilon;

  out << "measure " << flags.site << ": backend "
      << ToString(backend->Descriptor().kind) << ", start "
      << FormatDouble(options.start.latency_ms) << " ms / "
      << FormatDouble(options.start.bandwidth_kbps) << " Kbps, trials "
      << options.trials << ", " << ToString(options.aggregation) << "\n";

  const std::string file = OutFile(global, flags.site + ".json");
  try {
    const CpiPath path = Search(*backend, options, flags.site);
    WriteCpiPathFile(file, path);
    const PsiSample& last = path.points.back();
    out << flags.site << ": " << path.points.size() << " points, final "
        << ToString(last.point) << ", mean PSI " << FormatDouble(last.mean)
        << ", wrote " << file << "\n";
  } catch (const SearchAborted& e) {
    const CpiPath& partial = e.partial().path;
    if (!partial.points.empty()) {
      WriteCpiPathFile(file + ".partial", partial);
      err << "partial path with " << partial.points.size()
          << " points written to " << file << ".partial\n";
    }
    throw;
  }
  return kExitOk;
}

std::vector<std::string> CountHeader() {
  return {"A",           "B",      "C",     "D",    "terminates_inside",
          "beyond_path", "errors", "total", "ratio", "share"};
}

std::vector<std::string> CountFields(const CaseCounts& c) {
  const CaseRatio r = ComputeCaseRatio(c);
  return {std::to_string(c.a),
          std::to_string(c.b),
          std::to_string(c.c),
          std::to_string(c.d),
          std::to_string(c.terminates_inside),
          std::to_string(c.beyond_path),
          std::to_string(c.errors),
          std::to_string(c.Total()),
          OptionalNumber(r.ratio),
          OptionalNumber(r.share)};
}

// Groups |rows| by a (text, text, year) key and renders one CSV line per
// group in key order.
using GroupKey = std::tuple<std::string, std::string, int>;

std::string GroupTable(
    const std::vector<ClassificationRow>& rows,
    const std::vector<std::string>& key_header,
    const std::function<GroupKey(const ClassificationRow&)>& key_of,
    const std::function<std::vector<std::string>(const GroupKey&)>& key_fields) {
  std::map<GroupKey, CaseCounts> groups;
  for (const ClassificationRow& row : rows)
    groups[key_of(row)].Add(row);
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header = key_header;
  for (const std::string& h : CountHeader())
    header.push_back(h);
  table.push_back(header);
  for (const auto& [key, counts] : groups) {
    std::vector<std::string> line = key_fields(key);
    for (std::string& f : CountFields(counts))
      line.push_back(std::move(f));
    table.push_back(std::move(line));
  }
  return CsvText(table);
}

int RunClassify(const ClassifyFlags& flags, const GlobalFlags& global,
                std::ostream& out, std::ostream& err) {
  const std::vector<CpiPath> paths = LoadPaths(flags.paths_dir);
  const std::vector<Envelope> envelopes = ReadEnvelopeCsv(flags.envelopes);
  if (envelopes.empty())
    throw Error("no envelopes in '" + flags.envelopes + "'");
  const std::vector<ClassificationRow> rows = ClassifyBatch(paths, envelopes);

  CaseCounts total;
  for (const ClassificationRow& row : rows)
    total.Add(row);
  if (total.errors == total.Total()) {
    if (!rows.empty())
      err << "first error: " << rows.front().error << "\n";
    throw Error("no valid (path, envelope) pairs");
  }

  std::vector<std::vector<std::string>> pairs = {
      {"site_id", "provider", "city", "year", "label", "error"}};
  for (const ClassificationRow& row : rows) {
    pairs.push_back({row.site_id, row.provider, row.city,
                     std::to_string(row.year),
                     row.label ? std::string(ToString(*row.label)) : "",
                     row.error});
  }
  WriteStringToFile(OutFile(global, "pairs.csv"), CsvText(pairs));
  WriteStringToFile(
      OutFile(global, "by_site.csv"),
      GroupTable(
          rows, {"site_id"},
          [](const ClassificationRow& r) { return GroupKey{r.site_id, "", 0}; },
          [](const GroupKey& k) {
            return std::vector<std::string>{std::get<0>(k)};
          }));
  WriteStringToFile(
      OutFile(global, "by_provider_year.csv"),
      GroupTable(
          rows, {"provider", "year"},
          [](const ClassificationRow& r) {
            return GroupKey{r.provider, "", r.year};
          },
          [](const GroupKey& k) {
            return std::vector<std::string>{std::get<0>(k),
                                            std::to_string(std::get<2>(k))};
          }));
  WriteStringToFile(
      OutFile(global, "by_city_provider_year.csv"),
      GroupTable(
          rows, {"city", "provider", "year"},
          [](const ClassificationRow& r) {
            return GroupKey{r.city, r.provider, r.year};
          },
          [](const GroupKey& k) {
            return std::vector<std::string>{std::get<0>(k), std::get<1>(k),
                                            std::to_string(std::get<2>(k))};
          }));

  const CaseRatio ratio = ComputeCaseRatio(total);
  out << "classified " << rows.size() << " pairs (" << paths.size()
      << " paths x " << envelopes.size() << " envelopes): A " << total.a
      << ", B " << total.b << ", C " << total.c << ", D " << total.d
      << ", TerminatesInside " << total.terminates_inside << ", BeyondPath "
      << total.beyond_path << ", errors " << total.errors << "\n";
  out << "ratio (B+C)/(A+D) " << OptionalNumber(ratio.ratio) << ", share "
      << OptionalNumber(ratio.share) << "\n";
  if (total.errors > 0)
    err << total.errors << " pairs could not be classified; see pairs.csv\n";
  return kExitOk;
}

int RunFeatures(const FeaturesFlags& flags, const GlobalFlags& global,
                std::ostream& out) {
  const std::vector<fs::path> files = ListFiles(flags.har_dir, ".har");
  if (files.empty())
    throw Error("no HAR files (*.har) in '" + flags.har_dir + "'");
  std::vector<PageFeatures> rows;
  for (const fs::path& file : files) {
    HarDiagnostics diag;
    try {
      rows.push_back(ExtractFeaturesFromText(ReadFileToString(file.string()),
                                             file.stem().string(), &diag));
    } catch (const MalformedHar& e) {
      throw MalformedHar(file.string() + ": " + e.what());
    }
    out << file.stem().string() << ": " << diag.entries_seen << " entries, "
        << diag.entries_skipped << " skipped\n";
  }
  std::ostringstream csv;
  WritePageFeaturesCsv(csv, rows);
  const std::string file = OutFile(global, "features.csv");
  WriteStringToFile(file, csv.str());
  out << "wrote " << rows.size() << " rows to " << file << "\n";
  return kExitOk;
}

int RunRegress(const RegressFlags& flags, const GlobalFlags& global,
               std::ostream& out, std::ostream& err) {
  const std::vector<PageFeatures> features =
      ReadPageFeaturesCsv(ReadFileToString(flags.features));
  const std::vector<RatioRecord> ratios =
      ReadRatioCsv(ReadFileToString(flags.ratios));
  JoinReport join;
  const Dataset data = JoinDataset(features, ratios, &join);
  if (join.undefined_ratio_rows > 0)
    err << join.undefined_ratio_rows << " rows with undefined ratio dropped\n";
  if (!join.ratios_without_features.empty()) {
    err << join.ratios_without_features.size()
        << " ratio rows have no features\n";
  }
  if (!join.features_without_ratios.empty()) {
    err << join.features_without_ratios.size()
        << " feature rows have no ratio\n";
  }

  const FitResult fit = FitOls(data);
  const int trials = global.trials_option->count() > 0 ? global.trials : 100;
  const SplitEvaluation eval =
      EvaluateSplits(data, flags.train_fraction, trials, global.seed);

  std::vector<std::vector<std::string>> coefficients = {
      {"factor", "coefficient"}};
  for (const auto& [name, value] : fit.sorted_report)
    coefficients.push_back({name, FormatDouble(value)});
  WriteStringToFile(OutFile(global, "coefficients.csv"),
                    CsvText(coefficients));

  const std::vector<std::vector<std::string>> summary = {
      {"key", "value"},
      {"rows", std::to_string(data.rows.size())},
      {"undefined_ratio_rows", std::to_string(join.undefined_ratio_rows)},
      {"ratios_without_features",
       std::to_string(join.ratios_without_features.size())},
      {"features_without_ratios",
       std::to_string(join.features_without_ratios.size())},
      {"intercept", FormatDouble(fit.intercept)},
      {"train_fraction", FormatDouble(flags.train_fraction)},
      {"trials", std::to_string(trials)},
      {"seed", std::to_string(global.seed)},
      {"train_size", std::to_string(eval.train_size)},
      {"test_size", std::to_string(eval.test_size)},
      {"skipped_trials", std::to_string(eval.skipped_trials)},
      {"mean_factor_error", FormatDouble(eval.mean_factor_error)},
      {"median_factor_error", FormatDouble(eval.median_factor_error)}};
  WriteStringToFile(OutFile(global, "evaluation.csv"), CsvText(summary));

  size_t width = std::string_view("Factor").size();
  for (const auto& entry : fit.sorted_report)
    width = std::max(width, entry.first.size());
  auto row = [&](const std::string& name, const std::string& value) {
    out << name << std::string(width + 2 - name.size(), ' ') << value << "\n";
  };
  row("Factor", "Coefficient");
  for (const auto& [name, value] : fit.sorted_report)
    row(name, FormatFixed(value, 4));
  out << "intercept " << FormatFixed(fit.intercept, 4) << "; " << data.rows.size()
      << " rows; " << trials << " splits at "
      << FormatDouble(flags.train_fraction) << " (" << eval.skipped_trials
      << " skipped)\n";
  out << "factor error: mean " << FormatFixed(eval.mean_factor_error, 3)
      << ", median " << FormatFixed(eval.median_factor_error, 3) << "\n";
  return kExitOk;
}

int RunPlot(const PlotFlags& flags, const GlobalFlags& global,
            std::ostream& out, std::ostream& err) {
  const std::vector<CpiPath> paths = LoadPaths(flags.paths_dir);
  std::vector<Envelope> envelopes;
  if (!flags.envelopes.empty())
    envelopes = ReadEnvelopeCsv(flags.envelopes);
  size_t invalid = 0;
  for (const Envelope& env : envelopes) {
    if (auto problem = env.Problem()) {
      err << "skipping envelope " << *problem << "\n";
      ++invalid;
    }
  }
  const std::string file = OutFile(global, "cpi.svg");
  WriteStringToFile(file, RenderPlotSvg(paths, envelopes));
  out << "plotted " << paths.size() << " paths and "
      << envelopes.size() - invalid << " envelopes to " << file << "\n";
  return kExitOk;
}

void AddScheduleFlags(CLI::App* cmd, SearchOptions* search) {
  StepSchedule& s = search->schedule;
  cmd->add_option("--lat-step", s.latency_step_ms, "Latency step (ms)")
      ->capture_default_str();
  cmd->add_option("--bw-double-ceiling", s.doubling_ceiling_kbps,
                  "Bandwidth doubles up to this value (Kbps)")
      ->capture_default_str();
  cmd->add_option("--bw-linear-step", s.linear_step_kbps,
                  "Bandwidth step above the doubling ceiling (Kbps)")
      ->capture_default_str();
  cmd->add_option("--lat-floor", s.latency_floor_ms, "Lowest latency (ms)")
      ->capture_default_str();
  cmd->add_option("--bw-ceiling", s.bandwidth_ceiling_kbps,
                  "Highest bandwidth (Kbps)")
      ->capture_default_str();
  cmd->add_option("--start-lat", search->start.latency_ms,
                  "Starting latency (ms)")
      ->capture_default_str();
  cmd->add_option("--start-bw", search->start.bandwidth_kbps,
                  "Starting bandwidth (Kbps)")
      ->capture_default_str();
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app("Critical path of improvement: measure, classify and report.",
               "cpi");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags global;
  app.add_option("--out", global.out_dir, "Output directory")
      ->capture_default_str();
  app.add_option("--seed", global.seed, "Random seed")->capture_default_str();
  global.trials_option =
      app.add_option("--trials", global.trials,
                     "Trials per point (measure, default 7) or splits "
                     "(regress, default 100)")
          ->check(CLI::PositiveNumber);

  MeasureFlags measure;
  CLI::App* measure_cmd =
      app.add_subcommand("measure", "Run a CPI search and write its path");
  measure_cmd->add_option("--backend", measure.backend, "PSI backend")
      ->check(CLI::IsMember({"synthetic", "replay", "external"}))
      ->capture_default_str();
  measure_cmd->add_option("--site", measure.site, "Site identifier")
      ->capture_default_str();
  measure_cmd->add_option("--base", measure.surface.base,
                          "Synthetic surface constant term")
      ->capture_default_str();
  measure_cmd->add_option("--lat-coeff", measure.surface.lat_coeff,
                          "Synthetic PSI per ms of latency")
      ->capture_default_str();
  measure_cmd->add_option("--bw-coeff", measure.surface.bw_coeff,
                          "Synthetic PSI numerator over bandwidth")
      ->capture_default_str();
  measure_cmd->add_option("--noise", measure.surface.noise_stddev,
                          "Synthetic noise standard deviation")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  measure_cmd->add_option("--grid", measure.grid, "Replay grid CSV");
  measure_cmd->add_option("--command", measure.command,
                          "External measurement command");
  measure.timeout_option =
      measure_cmd
          ->add_option("--timeout", measure.timeout_s,
                       "External command timeout in seconds (default "
                       "CPI_TIMEOUT_S or 300)")
          ->check(CLI::PositiveNumber);
  measure_cmd->add_option("--aggregation", measure.aggregation,
                          "How trials are combined into a score")
      ->check(CLI::IsMember({"mean", "median"}))
      ->capture_default_str();
  measure.plateau_option = measure_cmd->add_option(
      "--plateau-epsilon", measure.plateau_epsilon,
      "Stop when the best improvement falls below this");
  AddScheduleFlags(measure_cmd, &measure.search);

  ClassifyFlags classify;
  CLI::App* classify_cmd = app.add_subcommand(
      "classify", "Classify every path against every envelope");
  classify_cmd->add_option("--paths", classify.paths_dir,
                           "Directory of path files (*.json)")
      ->required();
  classify_cmd->add_option("--envelopes", classify.envelopes, "Envelope CSV")
      ->required();

  FeaturesFlags features;
  CLI::App* features_cmd =
      app.add_subcommand("features", "Extract page features from HAR files");
  features_cmd->add_option("--har-dir", features.har_dir,
                           "Directory of HAR files (*.har)")
      ->required();

  RegressFlags regress;
  CLI::App* regress_cmd = app.add_subcommand(
      "regress", "Fit the case ratio against page features");
  regress_cmd->add_option("--features", regress.features, "Features CSV")
      ->required();
  regress_cmd->add_option("--ratios", regress.ratios,
                          "CSV with site_id and ratio columns")
      ->required();
  regress_cmd->add_option("--train-fraction", regress.train_fraction,
                          "Training share of each split")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  PlotFlags plot;
  CLI::App* plot_cmd =
      app.add_subcommand("plot", "Draw paths and envelopes as SVG");
  plot_cmd->add_option("--paths", plot.paths_dir,
                       "Directory of path files (*.json)")
      ->required();
  plot_cmd->add_option("--envelopes", plot.envelopes, "Envelope CSV");

  std::vector<std::string> storage = {"cpi"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& arg : storage)
    argv.push_back(arg.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (measure_cmd->parsed())
      return RunMeasure(measure, global, out, err);
    if (classify_cmd->parsed())
      return RunClassify(classify, global, out, err);
    if (features_cmd->parsed())
      return RunFeatures(features, global, out);
    if (regress_cmd->parsed())
      return RunRegress(regress, global, out, err);
    return RunPlot(plot, global, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace cpi
