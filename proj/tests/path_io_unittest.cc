#include "cpi/path_io.h"

#include <sstream>

#include <gtest/gtest.h>

#include "cpi/cpi_search.h"
#include "cpi/csv.h"
#include "cpi/format.h"

namespace cpi {
namespace {

TEST(PathIoTest, RoundTripsNoisySearch) {
  SyntheticBackend backend({1.0, 5.0, 200000.0, 37.5, 9});
  SearchOptions options;
  options.trials = 3;
  const CpiPath path = Search(backend, options, "noisy.example");
  const std::string text = SerializeCpiPath(path);
  const CpiPath back = ParseCpiPath(text);
  EXPECT_EQ(path.site_id, back.site_id);
  EXPECT_EQ(path.schedule, back.schedule);
  ASSERT_EQ(path.points.size(), back.points.size());
  for (size_t i = 0; i < path.points.size(); ++i) {
    EXPECT_EQ(path.points[i].point, back.points[i].point);
    EXPECT_EQ(path.points[i].samples, back.points[i].samples);
  }
  EXPECT_EQ(text, SerializeCpiPath(back));
}

TEST(PathIoTest, KeyOrderIsStable) {
  CpiPath path;
  path.site_id = "s";
  path.points.push_back(PsiSample::FromSamples(kDefaultStart, {10, 20}));
  const std::string text = SerializeCpiPath(path);
  const size_t site = text.find("\"site_id\"");
  const size_t start = text.find("\"start\"");
  const size_t schedule = text.find("\"schedule\"");
  const size_t points = text.find("\"points\"");
  EXPECT_LT(site, start);
  EXPECT_LT(start, schedule);
  EXPECT_LT(schedule, points);
  EXPECT_LT(text.find("\"psi_samples\""), text.find("\"psi_mean\""));
}

TEST(PathIoTest, RejectsInconsistentFiles) {
  CpiPath path;
  path.site_id = "s";
  path.points.push_back(PsiSample::FromSamples(kDefaultStart, {10, 20}));
  path.points.push_back(PsiSample::FromSamples({170, 256}, {5}));
  std::string text = SerializeCpiPath(path);
  EXPECT_NO_THROW(ParseCpiPath(text));

  std::string bad_mean = text;
  bad_mean.replace(bad_mean.find("15.0"), 4, "16.0");
  EXPECT_THROW(ParseCpiPath(bad_mean), PathFileError);

  std::string bad_step = text;
  bad_step.replace(bad_step.find("170.0"), 5, "160.0");
  EXPECT_THROW(ParseCpiPath(bad_step), PathFileError);

  EXPECT_THROW(ParseCpiPath("{"), PathFileError);
  EXPECT_THROW(ParseCpiPath("{\"site_id\": 3}"), PathFileError);
}

TEST(CsvTest, QuotedFieldsAndBlankLines) {
  const CsvTable t = CsvTable::Parse(
      "a,b,c\n"
      "\n"
      "1,\"x, y\",\"say \"\"hi\"\"\"\r\n"
      " 2 ,z,\n");
  ASSERT_EQ(2u, t.rows().size());
  EXPECT_EQ("x, y", t.rows()[0].fields[1]);
  EXPECT_EQ("say \"hi\"", t.rows()[0].fields[2]);
  EXPECT_EQ(3, t.rows()[0].line);
  EXPECT_EQ("2", t.rows()[1].fields[0]);
  EXPECT_EQ("", t.rows()[1].fields[2]);
  EXPECT_EQ(1u, t.Column("b"));
  EXPECT_THROW(t.Column("nope"), CsvError);
  EXPECT_THROW(CsvTable::Parse("a,b\n1\n"), CsvError);
  EXPECT_THROW(CsvTable::Parse(""), CsvError);

  std::ostringstream out;
  WriteCsvRow(out, {"plain", "with,comma", "q\"uote", ""});
  EXPECT_EQ("plain,\"with,comma\",\"q\"\"uote\",\n", out.str());
}

TEST(FormatTest, ShortestRoundTrip) {
  EXPECT_EQ("0.1", FormatDouble(0.1));
  EXPECT_EQ("180", FormatDouble(180.0));
  EXPECT_EQ("0", FormatDouble(-0.0));
  EXPECT_EQ(0.1 + 0.2, *ParseDouble(FormatDouble(0.1 + 0.2)));
  EXPECT_FALSE(ParseDouble("12abc"));
  EXPECT_FALSE(ParseDouble(""));
  EXPECT_FALSE(ParseDouble("inf"));
  EXPECT_EQ(842.5, *ParseDouble(" 842.5 "));
  EXPECT_EQ("0.00", FormatFixed(-0.0001, 2));
}

}  // namespace
}  // namespace cpi
