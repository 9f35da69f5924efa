#include <cmath>
#include <fstream>

#include "haarpsi/csv.h"
#include "haarpsi/harness.h"
#include "haarpsi/stats.h"

namespace haarpsi {
namespace {

using nlohmann::json;

std::string cell_name(const std::string& database,
                      const std::string& distortion) {
  return distortion.empty() ? database : database + "/" + distortion;
}

template <typename Fn>
std::optional<double> try_coefficient(Fn&& fn, const std::string& what,
                                      std::vector<std::string>& warnings) {
  try {
    return fn();
  } catch (const std::exception& e) {
    warnings.push_back(what + ": " + e.what());
    return std::nullopt;
  }
}

// Rows of one cell, as column vectors.
struct CellData {
  std::vector<std::vector<double>> scores;  // per metric
  std::vector<double> mos;
};

std::optional<CellCorrelations> correlate(const CellData& cell,
                                          const std::vector<std::string>& metrics,
                                          const std::string& name,
                                          std::size_t min_samples,
                                          std::vector<std::string>& warnings) {
  if (cell.mos.size() < min_samples) {
    warnings.push_back(name + ": " + std::to_string(cell.mos.size()) +
                       " sample(s), below the minimum of " +
                       std::to_string(min_samples) + "; cell omitted");
    return std::nullopt;
  }
  CellCorrelations out;
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    const auto& x = cell.scores[m];
    const std::string label = name + " " + metrics[m];
    Correlations c;
    c.n = cell.mos.size();
    c.srocc = try_coefficient([&] { return spearman(x, cell.mos); },
                              label + " srocc", warnings);
    c.pearson = try_coefficient([&] { return pearson(x, cell.mos); },
                                label + " pearson", warnings);
    c.kendall = try_coefficient([&] { return kendall_tau(x, cell.mos); },
                                label + " kendall", warnings);
    out.emplace(metrics[m], c);
  }
  return out;
}

void add_significance(const CellCorrelations& cell, const std::string& database,
                      const std::string& distortion,
                      const std::vector<std::string>& metrics,
                      const std::string& baseline, EvaluationReport& report) {
  const auto base = cell.find(baseline);
  if (base == cell.end() || !base->second.srocc) return;
  for (const auto& metric : metrics) {
    if (metric == baseline) continue;
    const Correlations& c = cell.at(metric);
    if (!c.srocc) continue;
    SignificanceEntry e{database, distortion, metric, c.n, *c.srocc,
                        *base->second.srocc};
    try {
      const auto sig = significance(*c.srocc, *base->second.srocc, c.n);
      e.z_stat = sig.z_stat;
      e.significant = sig.significant_05;
      report.significance.push_back(e);
    } catch (const std::domain_error& ex) {
      report.warnings.push_back(cell_name(database, distortion) + " " + metric +
                                " vs " + baseline + ": " + ex.what());
    }
  }
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> read_optional(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

// Scores may be the PSNR sentinel, which JSON cannot carry as a number.
json encode_score(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double decode_score(const json& j) {
  if (j.is_string()) {
    auto v = csv::parse_double(j.get<std::string>());
    if (!v) throw std::runtime_error("report: bad score value");
    return *v;
  }
  return j.get<double>();
}

json cell_to_json(const CellCorrelations& cell) {
  json out = json::object();
  for (const auto& [metric, c] : cell) {
    out[metric] = {{"n", c.n},
                   {"srocc", optional_number(c.srocc)},
                   {"pearson", optional_number(c.pearson)},
                   {"kendall", optional_number(c.kendall)}};
  }
  return out;
}

CellCorrelations cell_from_json(const json& j) {
  CellCorrelations cell;
  for (const auto& [metric, c] : j.items()) {
    cell[metric] = {c.at("n").get<std::size_t>(), read_optional(c.at("srocc")),
                    read_optional(c.at("pearson")),
                    read_optional(c.at("kendall"))};
  }
  return cell;
}

}  // namespace

EvaluationReport build_report(const ScoreTable& table,
                              const ReportOptions& options) {
  EvaluationReport report;
  report.metrics = table.metrics;
  report.baseline = options.baseline.empty() && !table.metrics.empty()
                        ? table.metrics.front()
                        : options.baseline;
  if (!report.baseline.empty() &&
      std::find(table.metrics.begin(), table.metrics.end(), report.baseline) ==
          table.metrics.end()) {
    throw std::invalid_argument("baseline metric '" + report.baseline +
                                "' is not among the scored metrics");
  }

  const std::size_t n_metrics = table.metrics.size();
  std::map<std::string, CellData> databases;
  std::map<std::string, std::map<std::string, CellData>> distortions;
  auto append = [&](CellData& cell, const ScoreRow& row) {
    cell.scores.resize(n_metrics);
    for (std::size_t m = 0; m < n_metrics; ++m) {
      cell.scores[m].push_back(row.scores[m]);
    }
    cell.mos.push_back(row.entry.mos);
  };
  std::size_t skipped = 0;
  for (const auto& row : table.rows) {
    if (!row.ok()) {
      ++skipped;
      continue;
    }
    const auto& e = row.entry;
    append(databases[e.database], row);
    if (!e.distortion.empty()) append(distortions[e.database][e.distortion], row);
    ScatterSet& scatter = report.scatter[e.database];
    scatter.dmos = options.dmos_databases.contains(e.database);
    scatter.points.push_back({row.scores, e.mos, e.distortion});
  }
  if (skipped > 0) {
    report.warnings.push_back(std::to_string(skipped) +
                              " row(s) with scoring errors excluded");
  }

  for (const auto& [db, cell] : databases) {
    auto corr = correlate(cell, table.metrics, db, options.min_samples,
                          report.warnings);
    if (!corr) continue;
    add_significance(*corr, db, "", table.metrics, report.baseline, report);
    report.per_database.emplace(db, std::move(*corr));
  }
  for (const auto& [db, by_distortion] : distortions) {
    for (const auto& [distortion, cell] : by_distortion) {
      auto corr = correlate(cell, table.metrics, cell_name(db, distortion),
                            options.min_samples, report.warnings);
      if (!corr) continue;
      add_significance(*corr, db, distortion, table.metrics, report.baseline,
                       report);
      report.per_distortion[db].emplace(distortion, std::move(*corr));
    }
  }
  return report;
}

json to_json(const EvaluationReport& report) {
  json j;
  j["metrics"] = report.metrics;
  j["baseline"] = report.baseline;
  j["per_database"] = json::object();
  for (const auto& [db, cell] : report.per_database) {
    j["per_database"][db] = cell_to_json(cell);
  }
  j["per_distortion"] = json::object();
  for (const auto& [db, cells] : report.per_distortion) {
    for (const auto& [distortion, cell] : cells) {
      j["per_distortion"][db][distortion] = cell_to_json(cell);
    }
  }
  j["significance"] = json::array();
  for (const auto& s : report.significance) {
    j["significance"].push_back({{"database", s.database},
                                 {"distortion", s.distortion},
                                 {"metric", s.metric},
                                 {"n", s.n},
                                 {"metric_srocc", s.metric_srocc},
                                 {"baseline_srocc", s.baseline_srocc},
                                 {"z_stat", s.z_stat},
                                 {"significant", s.significant}});
  }
  j["scatter"] = json::object();
  for (const auto& [db, set] : report.scatter) {
    json points = json::array();
    for (const auto& p : set.points) {
      json scores = json::array();
      for (double v : p.scores) scores.push_back(encode_score(v));
      points.push_back(
          {{"scores", scores}, {"mos", p.mos}, {"distortion", p.distortion}});
    }
    j["scatter"][db] = {{"polarity", set.dmos ? "dmos" : "mos"},
                        {"points", points}};
  }
  j["warnings"] = report.warnings;
  return j;
}

EvaluationReport report_from_json(const json& j) {
  EvaluationReport r;
  r.metrics = j.at("metrics").get<std::vector<std::string>>();
  r.baseline = j.at("baseline").get<std::string>();
  for (const auto& [db, cell] : j.at("per_database").items()) {
    r.per_database[db] = cell_from_json(cell);
  }
  for (const auto& [db, cells] : j.at("per_distortion").items()) {
    for (const auto& [distortion, cell] : cells.items()) {
      r.per_distortion[db][distortion] = cell_from_json(cell);
    }
  }
  for (const auto& s : j.at("significance")) {
    r.significance.push_back({s.at("database").get<std::string>(),
                              s.at("distortion").get<std::string>(),
                              s.at("metric").get<std::string>(),
                              s.at("n").get<std::size_t>(),
                              s.at("metric_srocc").get<double>(),
                              s.at("baseline_srocc").get<double>(),
                              s.at("z_stat").get<double>(),
                              s.at("significant").get<bool>()});
  }
  for (const auto& [db, set] : j.at("scatter").items()) {
    ScatterSet s;
    s.dmos = set.at("polarity").get<std::string>() == "dmos";
    for (const auto& p : set.at("points")) {
      ScatterPoint point;
      for (const auto& v : p.at("scores")) point.scores.push_back(decode_score(v));
      point.mos = p.at("mos").get<double>();
      point.distortion = p.at("distortion").get<std::string>();
      s.points.push_back(std::move(point));
    }
    r.scatter[db] = std::move(s);
  }
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

void write_scatter_csvs(const EvaluationReport& report,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [db, set] : report.scatter) {
    const auto path = dir / (db + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    csv::Record header = {"distortion", set.dmos ? "dmos" : "mos"};
    header.insert(header.end(), report.metrics.begin(), report.metrics.end());
    csv::write_record(out, header);
    for (const auto& p : set.points) {
      csv::Record rec = {p.distortion, csv::format_exact(p.mos)};
      for (double v : p.scores) rec.push_back(csv::format_exact(v));
      csv::write_record(out, rec);
    }
  }
}

}  // namespace haarpsi
