#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "haarpsi/csv.h"
#include "haarpsi/harness.h"
#include "haarpsi/image_io.h"
#include "haarpsi/stats.h"
#include "support.h"

namespace haarpsi {
namespace {

using namespace testing_support;

std::vector<ManifestEntry> parse(const std::string& text,
                                 const std::filesystem::path& base = {}) {
  std::istringstream in(text);
  return parse_manifest(in, base);
}

std::vector<std::string> problems_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ManifestError& e) {
    return e.problems();
  }
  ADD_FAILURE() << "no ManifestError";
  return {};
}

TEST(Csv, QuotedFieldsAndCrlf) {
  std::istringstream in("a,\"b,c\",\"say \"\"hi\"\"\"\r\nx,,\"multi\nline\"\n");
  EXPECT_EQ(csv::read_record(in), (csv::Record{"a", "b,c", "say \"hi\""}));
  EXPECT_EQ(csv::read_record(in), (csv::Record{"x", "", "multi\nline"}));
  EXPECT_FALSE(csv::read_record(in).has_value());
  std::istringstream bad("\"open");
  EXPECT_THROW(csv::read_record(bad), std::runtime_error);
}

TEST(Csv, WriteThenReadIsIdentity) {
  const csv::Record rec = {"plain", "with,comma", "q\"uote", "line\nbreak", ""};
  std::stringstream s;
  csv::write_record(s, rec);
  EXPECT_EQ(csv::read_record(s), rec);
}

TEST(Csv, NumberFormatting) {
  EXPECT_EQ(csv::format_fixed(0.5, 6), "0.500000");
  EXPECT_EQ(csv::format_fixed(kPsnrInfinity, 6), "inf");
  EXPECT_EQ(csv::format_fixed(-kPsnrInfinity, 6), "-inf");
  EXPECT_EQ(csv::parse_double(" 2.5 "), 2.5);
  EXPECT_EQ(csv::parse_double("inf"), kPsnrInfinity);
  EXPECT_FALSE(csv::parse_double("nan").has_value());
  EXPECT_FALSE(csv::parse_double("1.2x").has_value());
  EXPECT_FALSE(csv::parse_double("").has_value());
  for (double v : {0.1, 1.0 / 3.0, 12345.678901234567, -2e-300}) {
    EXPECT_EQ(csv::parse_double(csv::format_exact(v)), v);
  }
}

TEST(Manifest, ValidRowsInFileOrder) {
  const auto entries = parse(
      "reference_path,distorted_path,mos,database,distortion\n"
      "r1.png,d1.png,3.5,LIVE,jpeg\n"
      "r1.png,d2.png,4,LIVE,blur\n"
      "r2.png,d3.png,-1.25,TID,\n");
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[0].distorted_path, "d1.png");
  EXPECT_EQ(entries[1].mos, 4.0);
  EXPECT_EQ(entries[2].database, "TID");
  EXPECT_EQ(entries[2].distortion, "");
}

TEST(Manifest, ExtraColumnsIgnoredAndOrderFree) {
  const auto entries = parse(
      "observer_count,database,mos,distorted_path,reference_path\n"
      "17,CSIQ,0.25,d.png,r.png\n");
  ASSERT_EQ(entries.size(), 1u);
  EXPECT_EQ(entries[0].reference_path, "r.png");
  EXPECT_EQ(entries[0].mos, 0.25);
  EXPECT_EQ(entries[0].database, "CSIQ");
}

TEST(Manifest, RelativePathsResolveAgainstBase) {
  const auto entries = parse(
      "reference_path,distorted_path,mos,database\n"
      "ref/a.png,/abs/b.png,1,X\n",
      "/data/set");
  EXPECT_EQ(entries[0].reference_path, "/data/set/ref/a.png");
  EXPECT_EQ(entries[0].distorted_path, "/abs/b.png");
}

TEST(Manifest, EmptyMosNamesTheRow) {
  const auto problems = problems_of(
      "reference_path,distorted_path,mos,database\n"
      "a,b,1,X\n"
      "a,b,,X\n"
      "a,b,abc,X\n");
  ASSERT_EQ(problems.size(), 2u);
  EXPECT_NE(problems[0].find("row 2"), std::string::npos);
  EXPECT_NE(problems[0].find("mos"), std::string::npos);
  EXPECT_NE(problems[1].find("row 3"), std::string::npos);
}

TEST(Manifest, HeaderErrors) {
  EXPECT_THROW(parse(""), ManifestError);
  EXPECT_THROW(parse("reference_path,distorted_path,database\na,b,X\n"),
               ManifestError);
  EXPECT_THROW(load_manifest("/nonexistent/manifest.csv"), ManifestError);
}

TEST(Manifest, EmptyBodyGivesNoEntries) {
  EXPECT_TRUE(parse("reference_path,distorted_path,mos,database\n\n").empty());
}

TEST(ParseMetric, NamesAndWavelets) {
  EXPECT_EQ(parse_metric("haarpsi").kind, MetricKind::kHaarPsi);
  EXPECT_EQ(parse_metric("psnr").kind, MetricKind::kPsnr);
  const MetricSpec c = parse_metric("haarpsic@daub4", {40.0, 5.0});
  EXPECT_EQ(c.kind, MetricKind::kHaarPsiColor);
  EXPECT_EQ(c.label, "haarpsic@daub4");
  EXPECT_EQ(c.params.wavelet, WaveletId::kDaub4);
  EXPECT_EQ(c.params.color_mode, ColorMode::kColor);
  EXPECT_EQ(c.params.c, 40.0);
  EXPECT_THROW(parse_metric("ssim"), std::invalid_argument);
  EXPECT_THROW(parse_metric("haarpsi@nosuch"), std::invalid_argument);
}

// Ten distorted versions of one reference, plus the manifest.
struct Corpus {
  std::filesystem::path dir;
  std::vector<ManifestEntry> entries;
};

Corpus make_corpus(const std::string& name) {
  Corpus c;
  c.dir = fresh_dir(name);
  std::mt19937_64 rng(41);
  const ImagePlane ref = textured_plane(32, 32, rng);
  write_image(c.dir / "ref.pgm", ref);
  std::ofstream m(c.dir / "manifest.csv");
  m << "reference_path,distorted_path,mos,database,distortion\n";
  for (int k = 0; k < 10; ++k) {
    const std::string name = "d" + std::to_string(k) + ".pgm";
    const bool noise = k % 2 == 0;
    const ImagePlane d = noise ? add_gaussian_noise(ref, 4.0 + 6.0 * k, k)
                               : box_blur(ref, 1 + k / 2);
    write_image(c.dir / name, d);
    m << "ref.pgm," << name << "," << 100 - 7 * k << ",SYN,"
      << (noise ? "noise" : "blur") << "\n";
  }
  m.close();
  c.entries = load_manifest(c.dir / "manifest.csv");
  return c;
}

TEST(ScoreManifest, IdenticalPairs) {
  const Corpus c = make_corpus("identical");
  std::vector<ManifestEntry> same = {c.entries[0]};
  same[0].distorted_path = same[0].reference_path;
  const ScoreTable t =
      score_manifest(same, {parse_metric("haarpsi"), parse_metric("psnr")});
  ASSERT_TRUE(t.rows[0].ok());
  EXPECT_NEAR(t.rows[0].scores[0], 1.0, 1e-12);
  EXPECT_EQ(t.rows[0].scores[1], kPsnrInfinity);
}

TEST(ScoreManifest, ParallelismDoesNotChangeOutput) {
  const Corpus c = make_corpus("parallel");
  const std::vector<MetricSpec> metrics = {
      parse_metric("haarpsi"), parse_metric("haarpsic"), parse_metric("psnr")};
  const ScoreTable one = score_manifest(c.entries, metrics, 1);
  const ScoreTable eight = score_manifest(c.entries, metrics, 8);
  EXPECT_EQ(one, eight);
  std::ostringstream a, b;
  write_score_csv(a, one);
  write_score_csv(b, eight);
  EXPECT_EQ(a.str(), b.str());
}

TEST(ScoreManifest, BadRowRecordedWithoutAborting) {
  Corpus c = make_corpus("bad_row");
  c.entries[4].distorted_path = (c.dir / "missing.pgm").string();
  const ScoreTable t = score_manifest(c.entries, {parse_metric("haarpsi")}, 3);
  ASSERT_EQ(t.rows.size(), 10u);
  int ok = 0;
  for (const auto& row : t.rows) ok += row.ok();
  EXPECT_EQ(ok, 9);
  EXPECT_FALSE(t.rows[4].ok());
  EXPECT_TRUE(t.rows[4].scores.empty());
}

TEST(ScoreCsv, LayoutAndRoundTrip) {
  Corpus c = make_corpus("score_csv");
  c.entries[1].distorted_path = (c.dir / "missing.pgm").string();
  const ScoreTable t = score_manifest(
      c.entries, {parse_metric("haarpsi"), parse_metric("psnr")}, 2);
  std::ostringstream out;
  write_score_csv(out, t);
  std::istringstream in(out.str());
  const auto header = csv::read_record(in);
  EXPECT_EQ(*header, (csv::Record{"reference_path", "distorted_path", "mos",
                                  "database", "distortion", "haarpsi", "psnr",
                                  "error"}));
  const auto first = csv::read_record(in);
  EXPECT_EQ((*first)[5].size(), std::string("0.123456").size());

  std::istringstream again(out.str());
  const ScoreTable back = read_score_csv(again);
  EXPECT_EQ(back.metrics, t.metrics);
  ASSERT_EQ(back.rows.size(), t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    EXPECT_EQ(back.rows[r].entry, t.rows[r].entry);
    EXPECT_EQ(back.rows[r].ok(), t.rows[r].ok());
    for (std::size_t m = 0; m < t.rows[r].scores.size(); ++m) {
      EXPECT_NEAR(back.rows[r].scores[m], t.rows[r].scores[m], 5e-7);
    }
  }
}

ScoreTable synthetic_table(const std::vector<std::vector<double>>& scores,
                           const std::vector<double>& mos,
                           const std::vector<std::string>& distortion,
                           const std::vector<std::string>& metrics,
                           const std::string& database = "DB") {
  ScoreTable t;
  t.metrics = metrics;
  for (std::size_t r = 0; r < mos.size(); ++r) {
    ScoreRow row;
    row.entry = {"r", "d" + std::to_string(r), mos[r], database, distortion[r]};
    row.scores = scores[r];
    t.rows.push_back(row);
  }
  return t;
}

TEST(Report, ScoresEqualToMosGiveUnitCorrelations) {
  std::vector<std::vector<double>> s;
  std::vector<double> mos;
  std::vector<std::string> dist;
  for (int k = 0; k < 12; ++k) {
    mos.push_back(k * 1.5);
    s.push_back({k * 1.5});
    dist.push_back(k % 2 ? "a" : "b");
  }
  const EvaluationReport r = build_report(synthetic_table(s, mos, dist, {"m"}));
  const Correlations& c = r.per_database.at("DB").at("m");
  EXPECT_EQ(c.n, 12u);
  EXPECT_NEAR(*c.srocc, 1.0, 1e-15);
  EXPECT_NEAR(*c.pearson, 1.0, 1e-15);
  EXPECT_NEAR(*c.kendall, 1.0, 1e-15);
  for (const auto& [name, cell] : r.per_distortion.at("DB")) {
    EXPECT_NEAR(*cell.at("m").srocc, 1.0, 1e-15) << name;
  }
  EXPECT_TRUE(r.significance.empty());
}

TEST(Report, MonotoneWithinDistortionsButNotJointly) {
  // Distortion a: scores 1..5 track mos 1..5; distortion b: scores 1.5..5.5
  // track mos 11..15. Pooled, the interleaved scores break the ranking.
  std::vector<std::vector<double>> s;
  std::vector<double> mos;
  std::vector<std::string> dist;
  for (int k = 1; k <= 5; ++k) {
    s.push_back({double(k)});
    mos.push_back(k);
    dist.push_back("a");
    s.push_back({k + 0.5});
    mos.push_back(10 + k);
    dist.push_back("b");
  }
  const EvaluationReport r = build_report(synthetic_table(s, mos, dist, {"m"}));
  EXPECT_EQ(*r.per_distortion.at("DB").at("a").at("m").srocc, 1.0);
  EXPECT_EQ(*r.per_distortion.at("DB").at("b").at("m").srocc, 1.0);
  const double pooled = *r.per_database.at("DB").at("m").srocc;
  EXPECT_LT(pooled, 1.0);
  // Direct rank computation: score ranks 1..10 against mos ranks
  // (1,6,2,7,3,8,4,9,5,10).
  std::vector<double> sr(10), mr = {1, 6, 2, 7, 3, 8, 4, 9, 5, 10};
  for (int k = 0; k < 10; ++k) sr[k] = k + 1;
  EXPECT_NEAR(pooled, pearson(sr, mr), 1e-12);
}

TEST(Report, SignificanceAgainstBaseline) {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> n(0, 1);
  std::vector<std::vector<double>> s;
  std::vector<double> mos;
  std::vector<std::string> dist;
  for (int k = 0; k < 200; ++k) {
    const double m = n(rng);
    mos.push_back(m);
    s.push_back({m + 0.1 * n(rng), m + 1.5 * n(rng)});
    dist.push_back("");
  }
  const EvaluationReport r =
      build_report(synthetic_table(s, mos, dist, {"good", "poor"}));
  EXPECT_EQ(r.baseline, "good");
  ASSERT_EQ(r.significance.size(), 1u);
  const SignificanceEntry& e = r.significance[0];
  EXPECT_EQ(e.metric, "poor");
  EXPECT_EQ(e.n, 200u);
  EXPECT_TRUE(e.significant);
  EXPECT_LT(e.z_stat, 0.0);
  EXPECT_EQ(e.z_stat, significance(e.metric_srocc, e.baseline_srocc, 200).z_stat);

  ReportOptions self;
  self.baseline = "poor";
  const EvaluationReport r2 =
      build_report(synthetic_table(s, mos, dist, {"good", "poor"}), self);
  ASSERT_EQ(r2.significance.size(), 1u);
  EXPECT_GT(r2.significance[0].z_stat, 0.0);

  ReportOptions unknown;
  unknown.baseline = "nosuch";
  EXPECT_THROW(build_report(synthetic_table(s, mos, dist, {"good"}), unknown),
               std::invalid_argument);
}

TEST(Report, SmallCellsOmittedWithWarning) {
  std::vector<std::vector<double>> s = {{1}, {2}, {3}, {4}, {5}, {6}};
  std::vector<double> mos = {1, 2, 3, 4, 5, 6};
  std::vector<std::string> dist = {"a", "a", "a", "a", "b", "b"};
  const EvaluationReport r = build_report(synthetic_table(s, mos, dist, {"m"}));
  EXPECT_TRUE(r.per_distortion.at("DB").contains("a"));
  EXPECT_FALSE(r.per_distortion.at("DB").contains("b"));
  bool warned = false;
  for (const auto& w : r.warnings) warned |= w.find("DB/b") != std::string::npos;
  EXPECT_TRUE(warned);
}

TEST(Report, UndefinedCoefficientIsAbsentNotFabricated) {
  std::vector<std::vector<double>> s = {{1}, {1}, {1}, {1}};
  std::vector<double> mos = {1, 2, 3, 4};
  const EvaluationReport r =
      build_report(synthetic_table(s, mos, {"", "", "", ""}, {"m"}));
  const Correlations& c = r.per_database.at("DB").at("m");
  EXPECT_FALSE(c.srocc.has_value());
  EXPECT_FALSE(c.pearson.has_value());
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Report, ErrorRowsExcluded) {
  std::vector<std::vector<double>> s = {{1}, {2}, {}, {3}, {4}};
  std::vector<double> mos = {1, 2, 3, 4, 5};
  ScoreTable t = synthetic_table(s, mos, {"", "", "", "", ""}, {"m"});
  t.rows[2].error = "decode failed";
  const EvaluationReport r = build_report(t);
  EXPECT_EQ(r.per_database.at("DB").at("m").n, 4u);
  EXPECT_EQ(r.scatter.at("DB").points.size(), 4u);
}

TEST(Report, ScatterRecomputationMatchesCoefficients) {
  const Corpus c = make_corpus("scatter");
  const ScoreTable t = score_manifest(
      c.entries, {parse_metric("haarpsi"), parse_metric("psnr")}, 2);
  ReportOptions opts;
  opts.dmos_databases = {"SYN"};
  const EvaluationReport r = build_report(t, opts);
  const ScatterSet& set = r.scatter.at("SYN");
  EXPECT_TRUE(set.dmos);
  for (std::size_t m = 0; m < r.metrics.size(); ++m) {
    std::vector<double> x, y;
    for (const auto& p : set.points) {
      x.push_back(p.scores[m]);
      y.push_back(p.mos);
    }
    const Correlations& cc = r.per_database.at("SYN").at(r.metrics[m]);
    EXPECT_NEAR(spearman(x, y), *cc.srocc, 1e-12);
    EXPECT_NEAR(kendall_tau(x, y), *cc.kendall, 1e-12);
    if (cc.pearson) {
      EXPECT_NEAR(pearson(x, y), *cc.pearson, 1e-12);
    } else {
      // The unblurred copy has infinite PSNR.
      EXPECT_THROW(pearson(x, y), UndefinedCorrelation);
    }
  }
  EXPECT_FALSE(r.per_database.at("SYN").at("psnr").pearson);
}

TEST(Report, JsonRoundTrip) {
  const Corpus c = make_corpus("json");
  std::vector<ManifestEntry> entries = c.entries;
  entries[0].distorted_path = entries[0].reference_path;  // psnr = inf
  const ScoreTable t = score_manifest(
      entries, {parse_metric("haarpsi"), parse_metric("psnr")}, 1);
  const EvaluationReport r = build_report(t);
  const nlohmann::json j = to_json(r);
  EXPECT_EQ(j["scatter"]["SYN"]["points"][0]["scores"][1], "inf");
  EXPECT_EQ(j["scatter"]["SYN"]["polarity"], "mos");
  const EvaluationReport back = report_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back, r);
}

TEST(Report, RegeneratedFromSavedRowsIsIdentical) {
  const Corpus c = make_corpus("regen");
  const ScoreTable t = score_manifest(c.entries, {parse_metric("haarpsi")}, 1);
  std::ostringstream out;
  write_score_csv(out, t);
  std::istringstream a(out.str()), b(out.str());
  EXPECT_EQ(build_report(read_score_csv(a)), build_report(read_score_csv(b)));
}

TEST(Report, ScatterCsvFiles) {
  const Corpus c = make_corpus("scatter_csv");
  const ScoreTable t = score_manifest(c.entries, {parse_metric("haarpsi")}, 1);
  ReportOptions opts;
  opts.dmos_databases = {"SYN"};
  const EvaluationReport r = build_report(t, opts);
  const auto out = fresh_dir("scatter_out");
  write_scatter_csvs(r, out);
  std::ifstream in(out / "SYN.csv");
  EXPECT_EQ(*csv::read_record(in), (csv::Record{"distortion", "dmos", "haarpsi"}));
  std::vector<double> x, y;
  while (auto rec = csv::read_record(in)) {
    y.push_back(*csv::parse_double((*rec)[1]));
    x.push_back(*csv::parse_double((*rec)[2]));
  }
  EXPECT_EQ(x.size(), 10u);
  EXPECT_NEAR(spearman(x, y), *r.per_database.at("SYN").at("haarpsi").srocc,
              1e-12);
}

}  // namespace
}  // namespace haarpsi
