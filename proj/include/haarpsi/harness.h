#ifndef HAARPSI_HARNESS_H_
#define HAARPSI_HARNESS_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "haarpsi/image_io.h"
#include "haarpsi/metric.h"

namespace haarpsi {

struct ManifestEntry {
  std::string reference_path;
  std::string distorted_path;
  double mos = 0.0;
  std::string database;
  std::string distortion;  // optional column, empty when absent

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

// Carries one line per offending row so callers can report all of them.
class ManifestError : public std::runtime_error {
 public:
  ManifestError(const std::string& what, std::vector<std::string> problems)
      : std::runtime_error(what), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// CSV with a header naming at least reference_path, distorted_path, mos and
// database (distortion optional, any other column ignored). Relative image
// paths are resolved against the manifest's directory. Throws ManifestError
// listing every bad row (1-based data row numbers).
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
std::vector<ManifestEntry> parse_manifest(std::istream& in,
                                          const std::filesystem::path& base_dir);

enum class MetricKind { kHaarPsi, kHaarPsiColor, kPsnr };

struct MetricSpec {
  std::string label;
  MetricKind kind = MetricKind::kHaarPsi;
  MetricParams params;
};

// "haarpsi", "haarpsic" or "psnr", optionally suffixed "@<wavelet>" for the
// HaarPSI variants (e.g. "haarpsic@daub2"). C and alpha come from `base`.
// Throws std::invalid_argument for unknown names.
MetricSpec parse_metric(const std::string& name, const MetricParams& base = {});

// Scores one pair of decoded images. Gray metrics see rgb_to_gray of color
// inputs; the color index sees gray inputs replicated into R, G and B.
double score_pair(const MetricSpec& metric, const DecodedImage& reference,
                  const DecodedImage& distorted);

struct ScoreRow {
  ManifestEntry entry;
  std::vector<double> scores;  // one per metric; empty when `error` is set
  std::string error;

  bool ok() const { return error.empty(); }
  friend bool operator==(const ScoreRow&, const ScoreRow&) = default;
};

struct ScoreTable {
  std::vector<std::string> metrics;
  std::vector<ScoreRow> rows;

  friend bool operator==(const ScoreTable&, const ScoreTable&) = default;
};

// Rows come back in manifest order whatever `jobs` is. A row whose images
// cannot be decoded or scored carries an error message instead of scores.
ScoreTable score_manifest(const std::vector<ManifestEntry>& entries,
                          const std::vector<MetricSpec>& metrics,
                          unsigned jobs = 1);

// Manifest columns, one column per metric (6 decimals, "inf" for the PSNR
// sentinel) and a trailing error column. MOS is written exactly.
void write_score_csv(std::ostream& out, const ScoreTable& table);
ScoreTable read_score_csv(std::istream& in);

struct Correlations {
  std::size_t n = 0;
  std::optional<double> srocc;
  std::optional<double> pearson;
  std::optional<double> kendall;

  friend bool operator==(const Correlations&, const Correlations&) = default;
};

// metric label -> coefficients
using CellCorrelations = std::map<std::string, Correlations>;

struct SignificanceEntry {
  std::string database;
  std::string distortion;  // empty for the whole-database cell
  std::string metric;
  std::size_t n = 0;
  double metric_srocc = 0.0;
  double baseline_srocc = 0.0;
  double z_stat = 0.0;
  bool significant = false;

  friend bool operator==(const SignificanceEntry&,
                         const SignificanceEntry&) = default;
};

struct ScatterPoint {
  std::vector<double> scores;  // parallel to EvaluationReport::metrics
  double mos = 0.0;
  std::string distortion;

  friend bool operator==(const ScatterPoint&, const ScatterPoint&) = default;
};

struct ScatterSet {
  bool dmos = false;  // higher = worse
  std::vector<ScatterPoint> points;

  friend bool operator==(const ScatterSet&, const ScatterSet&) = default;
};

struct EvaluationReport {
  std::vector<std::string> metrics;
  std::string baseline;
  std::map<std::string, CellCorrelations> per_database;
  // database -> distortion -> metric -> coefficients
  std::map<std::string, std::map<std::string, CellCorrelations>> per_distortion;
  std::vector<SignificanceEntry> significance;
  std::map<std::string, ScatterSet> scatter;
  std::vector<std::string> warnings;

  friend bool operator==(const EvaluationReport&,
                         const EvaluationReport&) = default;
};

struct ReportOptions {
  // Metric every other metric is tested against; defaults to the first.
  std::string baseline;
  // Databases whose opinion scores are DMOS.
  std::set<std::string> dmos_databases;
  std::size_t min_samples = 4;
};

// Correlations per database and per (database, distortion) over error-free
// rows, SROCC significance of every non-baseline metric against the
// baseline, and the raw scatter data. Cells with fewer than min_samples rows
// are omitted and noted in `warnings`, as are undefined coefficients.
EvaluationReport build_report(const ScoreTable& table,
                              const ReportOptions& options = {});

nlohmann::json to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::json& j);

// One CSV per database (<dir>/<database>.csv): distortion, mos and one
// column per metric at full precision.
void write_scatter_csvs(const EvaluationReport& report,
                        const std::filesystem::path& dir);

}  // namespace haarpsi

#endif  // HAARPSI_HARNESS_H_
