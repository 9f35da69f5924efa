#include "haarpsi/harness.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "haarpsi/csv.h"
#include "haarpsi/parallel.h"

namespace haarpsi {
namespace {

constexpr const char* kRequiredColumns[] = {"reference_path", "distorted_path",
                                            "mos", "database"};
constexpr const char* kManifestColumns[] = {
    "reference_path", "distorted_path", "mos", "database", "distortion"};

std::optional<std::size_t> column_index(const csv::Record& header,
                                        std::string_view name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return std::size_t(it - header.begin());
}

bool is_blank(const csv::Record& record) {
  return record.size() == 1 && record[0].find_first_not_of(" \t") ==
                                   std::string::npos;
}

std::string resolve(const std::string& p, const std::filesystem::path& base) {
  std::filesystem::path path(p);
  if (path.is_absolute() || base.empty()) return p;
  return (base / path).string();
}

}  // namespace

std::vector<ManifestEntry> parse_manifest(std::istream& in,
                                          const std::filesystem::path& base_dir) {
  auto header = csv::read_record(in);
  if (!header || is_blank(*header)) {
    throw ManifestError("manifest: missing header", {});
  }
  for (auto& name : *header) {
    name.erase(0, name.find_first_not_of(" \t"));
    name.erase(name.find_last_not_of(" \t") + 1);
  }
  std::size_t idx[5];
  for (int c = 0; c < 5; ++c) {
    auto pos = column_index(*header, kManifestColumns[c]);
    if (!pos && c < 4) {
      throw ManifestError(std::string("manifest: missing required column '") +
                              kRequiredColumns[c] + "'",
                          {});
    }
    idx[c] = pos.value_or(std::size_t(-1));
  }

  std::vector<ManifestEntry> entries;
  std::vector<std::string> problems;
  std::size_t row = 0;
  while (auto record = csv::read_record(in)) {
    if (is_blank(*record)) continue;
    ++row;
    auto field = [&](int c) -> std::string {
      return idx[c] < record->size() ? (*record)[idx[c]] : std::string();
    };
    std::vector<std::string> missing;
    for (int c = 0; c < 4; ++c) {
      if (field(c).empty()) missing.push_back(kRequiredColumns[c]);
    }
    if (!missing.empty()) {
      std::string msg = "row " + std::to_string(row) + ": missing";
      for (const auto& m : missing) msg += " " + m;
      problems.push_back(msg);
      continue;
    }
    auto mos = csv::parse_double(field(2));
    if (!mos || !std::isfinite(*mos)) {
      problems.push_back("row " + std::to_string(row) +
                         ": unparseable mos '" + field(2) + "'");
      continue;
    }
    entries.push_back({resolve(field(0), base_dir), resolve(field(1), base_dir),
                       *mos, field(3), field(4)});
  }
  if (!problems.empty()) {
    throw ManifestError("manifest: " + std::to_string(problems.size()) +
                            " invalid row(s)",
                        std::move(problems));
  }
  return entries;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest " + path.string(), {});
  return parse_manifest(in, path.parent_path());
}

MetricSpec parse_metric(const std::string& name, const MetricParams& base) {
  MetricSpec spec{name, MetricKind::kHaarPsi, base};
  std::string kind = name;
  if (auto at = name.find('@'); at != std::string::npos) {
    kind = name.substr(0, at);
    auto w = parse_wavelet(std::string_view(name).substr(at + 1));
    if (!w || kind == "psnr") {
      throw std::invalid_argument("unknown metric '" + name + "'");
    }
    spec.params.wavelet = *w;
  }
  if (kind == "haarpsi") {
    spec.kind = MetricKind::kHaarPsi;
    spec.params.color_mode = ColorMode::kGrayscale;
  } else if (kind == "haarpsic") {
    spec.kind = MetricKind::kHaarPsiColor;
    spec.params.color_mode = ColorMode::kColor;
  } else if (kind == "psnr") {
    spec.kind = MetricKind::kPsnr;
  } else {
    throw std::invalid_argument("unknown metric '" + name + "'");
  }
  spec.params.validate();
  return spec;
}

double score_pair(const MetricSpec& metric, const DecodedImage& reference,
                  const DecodedImage& distorted) {
  switch (metric.kind) {
    case MetricKind::kHaarPsi:
      return haarpsi_gray(as_gray(reference), as_gray(distorted), metric.params)
          .score;
    case MetricKind::kHaarPsiColor:
      return haarpsi_color(as_color(reference), as_color(distorted),
                           metric.params)
          .score;
    case MetricKind::kPsnr:
      return psnr(as_gray(reference), as_gray(distorted));
  }
  throw std::logic_error("score_pair: unhandled metric kind");
}

ScoreTable score_manifest(const std::vector<ManifestEntry>& entries,
                          const std::vector<MetricSpec>& metrics,
                          unsigned jobs) {
  ScoreTable table;
  for (const auto& m : metrics) table.metrics.push_back(m.label);
  table.rows.resize(entries.size());
  parallel_for(entries.size(), jobs, [&](std::size_t i) {
    ScoreRow& row = table.rows[i];
    row.entry = entries[i];
    try {
      const DecodedImage ref = decode_image(entries[i].reference_path);
      const DecodedImage dist = decode_image(entries[i].distorted_path);
      std::vector<double> scores;
      for (const auto& m : metrics) scores.push_back(score_pair(m, ref, dist));
      row.scores = std::move(scores);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return table;
}

void write_score_csv(std::ostream& out, const ScoreTable& table) {
  csv::Record header(std::begin(kManifestColumns), std::end(kManifestColumns));
  header.insert(header.end(), table.metrics.begin(), table.metrics.end());
  header.push_back("error");
  csv::write_record(out, header);
  for (const auto& row : table.rows) {
    csv::Record rec = {row.entry.reference_path, row.entry.distorted_path,
                       csv::format_exact(row.entry.mos), row.entry.database,
                       row.entry.distortion};
    for (std::size_t m = 0; m < table.metrics.size(); ++m) {
      rec.push_back(row.ok() ? csv::format_fixed(row.scores[m], 6) : "");
    }
    rec.push_back(row.error);
    csv::write_record(out, rec);
  }
}

ScoreTable read_score_csv(std::istream& in) {
  auto header = csv::read_record(in);
  if (!header || header->size() < 6 || header->back() != "error" ||
      !std::equal(std::begin(kManifestColumns), std::end(kManifestColumns),
                  header->begin())) {
    throw std::runtime_error("score csv: unexpected header");
  }
  ScoreTable table;
  table.metrics.assign(header->begin() + 5, header->end() - 1);
  std::size_t line = 1;
  while (auto rec = csv::read_record(in)) {
    ++line;
    if (is_blank(*rec)) continue;
    if (rec->size() != header->size()) {
      throw std::runtime_error("score csv: wrong field count on line " +
                               std::to_string(line));
    }
    ScoreRow row;
    auto mos = csv::parse_double((*rec)[2]);
    if (!mos) {
      throw std::runtime_error("score csv: bad mos on line " +
                               std::to_string(line));
    }
    row.entry = {(*rec)[0], (*rec)[1], *mos, (*rec)[3], (*rec)[4]};
    row.error = rec->back();
    if (row.ok()) {
      for (std::size_t m = 0; m < table.metrics.size(); ++m) {
        auto v = csv::parse_double((*rec)[5 + m]);
        if (!v) {
          throw std::runtime_error("score csv: bad score on line " +
                                   std::to_string(line));
        }
        row.scores.push_back(*v);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace haarpsi
