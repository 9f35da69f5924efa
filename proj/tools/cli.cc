#include "cli.h"

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "haarpsi/csv.h"
#include "haarpsi/filterbank.h"
#include "haarpsi/harness.h"
#include "haarpsi/image_io.h"
#include "haarpsi/metric.h"
#include "haarpsi/parallel.h"
#include "haarpsi/tuner.h"

namespace haarpsi::cli {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

WaveletId wavelet_or_usage(const std::string& name) {
  auto w = parse_wavelet(name);
  if (!w) throw UsageError("unknown wavelet '" + name + "'");
  return *w;
}

MetricParams params_or_usage(double c, double alpha, const std::string& wavelet,
                             bool color) {
  MetricParams p;
  p.c = c;
  p.alpha = alpha;
  p.wavelet = wavelet_or_usage(wavelet);
  p.color_mode = color ? ColorMode::kColor : ColorMode::kGrayscale;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return p;
}

std::vector<MetricSpec> metrics_or_usage(const std::vector<std::string>& names,
                                         const MetricParams& base) {
  if (names.empty()) throw UsageError("no metrics requested");
  std::vector<MetricSpec> specs;
  for (const auto& n : names) {
    try {
      specs.push_back(parse_metric(n, base));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return specs;
}

// Loads a manifest and reports every bad row before failing.
std::vector<ManifestEntry> load_or_report(const std::string& path,
                                          std::ostream& err) {
  try {
    auto entries = load_manifest(path);
    if (entries.empty()) throw std::runtime_error(path + ": no entries");
    return entries;
  } catch (const ManifestError& e) {
    for (const auto& p : e.problems()) err << path << ": " << p << '\n';
    throw;
  }
}

// "-" means stdout.
void write_text(const std::string& path, const std::string& text,
                std::ostream& out) {
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f || !(f << text)) throw std::runtime_error("cannot write " + path);
}

std::string fmt6(double v) { return csv::format_fixed(v, 6); }

// ------------------------------------------------------------- compare ----

struct CompareOptions {
  std::string reference;
  std::string distorted;
  bool color = false;
  double c = 30.0;
  double alpha = 4.2;
  std::string wavelet = "haar";
  std::string boundary = "zero";
  std::string dump_dir;
  bool json = false;
};

int cmd_compare(const CompareOptions& o, std::ostream& out) {
  MetricParams params = params_or_usage(o.c, o.alpha, o.wavelet, o.color);
  params.boundary =
      o.boundary == "symmetric" ? Boundary::kSymmetric : Boundary::kZero;
  const DecodedImage ref = decode_image(o.reference);
  const DecodedImage dist = decode_image(o.distorted);
  const bool want_maps = !o.dump_dir.empty();
  const ScoreResult r =
      o.color ? haarpsi_color(as_color(ref), as_color(dist), params, want_maps)
              : haarpsi_gray(as_gray(ref), as_gray(dist), params, want_maps);
  if (want_maps) dump_maps(*r.maps, o.dump_dir);
  if (o.json) {
    nlohmann::json j = {{"score", r.score},
                        {"C", params.c},
                        {"alpha", params.alpha},
                        {"wavelet", std::string(to_string(params.wavelet))},
                        {"color", o.color},
                        {"degenerate_weights", r.degenerate_weights}};
    out << j.dump(2) << '\n';
  } else {
    out << fmt6(r.score) << '\n';
  }
  return kExitOk;
}

// --------------------------------------------------------------- batch ----

struct BatchOptions {
  std::string manifest;
  std::vector<std::string> metrics{"haarpsi"};
  std::string out = "-";
  unsigned jobs = 0;
  double c = 30.0;
  double alpha = 4.2;
};

void warn_row_errors(const ScoreTable& table, std::ostream& err) {
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (!table.rows[i].ok()) {
      err << "warning: row " << i + 1 << ": " << table.rows[i].error << '\n';
    }
  }
}

int cmd_batch(const BatchOptions& o, std::ostream& out, std::ostream& err) {
  const auto metrics =
      metrics_or_usage(o.metrics, params_or_usage(o.c, o.alpha, "haar", false));
  const auto entries = load_or_report(o.manifest, err);
  const ScoreTable table = score_manifest(entries, metrics, o.jobs);
  warn_row_errors(table, err);
  std::ostringstream csv_text;
  write_score_csv(csv_text, table);
  write_text(o.out, csv_text.str(), out);
  return kExitOk;
}

// ------------------------------------------------------------ evaluate ----

struct EvaluateOptions {
  std::string manifest;
  std::string from_scores;
  std::vector<std::string> metrics{"haarpsi"};
  std::string baseline;
  std::string report = "-";
  std::string scatter_dir;
  std::string scores_out;
  std::vector<std::string> dmos;
  unsigned jobs = 0;
  double c = 30.0;
  double alpha = 4.2;
};

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out,
                 std::ostream& err) {
  if (o.manifest.empty() == o.from_scores.empty()) {
    throw UsageError("give exactly one of MANIFEST or --from-scores");
  }
  ScoreTable table;
  if (!o.from_scores.empty()) {
    std::ifstream in(o.from_scores);
    if (!in) throw std::runtime_error("cannot open " + o.from_scores);
    table = read_score_csv(in);
  } else {
    const auto metrics = metrics_or_usage(
        o.metrics, params_or_usage(o.c, o.alpha, "haar", false));
    const auto entries = load_or_report(o.manifest, err);
    table = score_manifest(entries, metrics, o.jobs);
    warn_row_errors(table, err);
  }
  if (!o.scores_out.empty()) {
    std::ostringstream csv_text;
    write_score_csv(csv_text, table);
    write_text(o.scores_out, csv_text.str(), out);
  }
  ReportOptions ro;
  ro.baseline = o.baseline;
  ro.dmos_databases.insert(o.dmos.begin(), o.dmos.end());
  EvaluationReport report;
  try {
    report = build_report(table, ro);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  write_text(o.report, to_json(report).dump(2) + "\n", out);
  if (!o.scatter_dir.empty()) write_scatter_csvs(report, o.scatter_dir);
  return kExitOk;
}

// ---------------------------------------------------------------- tune ----

struct TuneOptions {
  std::vector<std::string> manifests;
  TuneConfig cfg;
  bool gray = false;
  std::string wavelet = "haar";
  std::string out;
};

int cmd_tune(TuneOptions o, std::ostream& out, std::ostream& err) {
  o.cfg.color_mode = o.gray ? ColorMode::kGrayscale : ColorMode::kColor;
  o.cfg.wavelet = wavelet_or_usage(o.wavelet);
  try {
    o.cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  for (const auto& m : o.manifests) {
    auto entries = load_or_report(m, err);
    o.cfg.entries.insert(o.cfg.entries.end(), entries.begin(), entries.end());
  }

  TuneResult result;
  try {
    result = tune(o.cfg);
  } catch (const TuningError& e) {
    const std::string trace_path =
        (o.out.empty() ? std::string("tune") : o.out) + ".trace.json";
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& t : e.trace()) {
      trace.push_back({t.c, t.alpha,
                       std::isfinite(t.value) ? nlohmann::json(t.value)
                                              : nlohmann::json(nullptr)});
    }
    std::ofstream(trace_path) << trace.dump(2) << '\n';
    err << "error: tuning failed: " << e.what() << " (trace: " << trace_path
        << ")\n";
    return kExitData;
  }
  if (!o.out.empty()) {
    write_text(o.out, to_json(result, o.cfg).dump(2) + "\n", out);
  }

  char line[128];
  std::snprintf(line, sizeof line, "C=%ld alpha=%.1f\n", result.c_final,
                result.alpha_final);
  out << line;
  const auto full = prepare_databases(o.cfg.entries, o.cfg.color_mode,
                                      o.cfg.wavelet, o.cfg.jobs,
                                      o.cfg.dmos_databases);
  const auto srocc = subset_srocc(double(result.c_final), result.alpha_final,
                                  full);
  out << "full-set SROCC at the final parameters:\n";
  for (std::size_t i = 0; i < full.size(); ++i) {
    out << "  " << full[i].database << ' ' << fmt6(srocc[i]) << '\n';
  }
  return kExitOk;
}

// ------------------------------------------------------------- filters ----

struct FiltersOptions {
  std::string wavelet = "haar";
  int scale = 1;
};

void print_grid(std::ostream& out, const TapGrid& grid) {
  char buf[64];
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.12g", grid(r, c));
      out << (c ? " " : "") << buf;
    }
    out << '\n';
  }
}

int cmd_filters(const FiltersOptions& o, std::ostream& out) {
  const WaveletId id = wavelet_or_usage(o.wavelet);
  if (o.scale < 1 || o.scale > 3) {
    throw UsageError("scale must be 1, 2 or 3");
  }
  const FilterBank2D bank = build_filterbank(wavelet(id), o.scale);
  const TapGrid h = bank.horizontal.back().grid();
  const TapGrid v = bank.vertical.back().grid();
  out << "# " << to_string(id) << " scale " << o.scale << " horizontal "
      << h.rows() << "x" << h.cols() << '\n';
  print_grid(out, h);
  out << "\n# " << to_string(id) << " scale " << o.scale << " vertical "
      << v.rows() << "x" << v.cols() << '\n';
  print_grid(out, v);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Haar wavelet-based perceptual similarity index", "haarpsi"};
  app.require_subcommand(1);
  std::function<int()> action;

  CompareOptions compare;
  auto* c = app.add_subcommand("compare", "Score a distorted image against its reference");
  c->add_option("reference", compare.reference)->required();
  c->add_option("distorted", compare.distorted)->required();
  c->add_flag("--color", compare.color, "HaarPSIC on YIQ instead of grayscale");
  c->add_option("--c", compare.c, "Similarity constant C")->capture_default_str();
  c->add_option("--alpha", compare.alpha, "Logistic slope")->capture_default_str();
  c->add_option("--wavelet", compare.wavelet)->capture_default_str();
  c->add_option("--boundary", compare.boundary, "Convolution border handling")
      ->check(CLI::IsMember({"zero", "symmetric"}))
      ->capture_default_str();
  c->add_option("--dump-maps", compare.dump_dir, "Write normalized HS/W maps here");
  c->add_flag("--json", compare.json, "Print a JSON object");
  c->callback([&] { action = [&] { return cmd_compare(compare, out); }; });

  BatchOptions batch;
  batch.jobs = default_jobs();
  auto* b = app.add_subcommand("batch", "Score every row of a manifest");
  b->add_option("manifest", batch.manifest)->required();
  b->add_option("--metrics", batch.metrics, "haarpsi, haarpsic, psnr[, name@wavelet]")
      ->delimiter(',')
      ->capture_default_str();
  b->add_option("--out", batch.out, "Score CSV ('-' for stdout)")->capture_default_str();
  b->add_option("--jobs", batch.jobs)->check(CLI::PositiveNumber)->capture_default_str();
  b->add_option("--c", batch.c)->capture_default_str();
  b->add_option("--alpha", batch.alpha)->capture_default_str();
  b->callback([&] { action = [&] { return cmd_batch(batch, out, err); }; });

  EvaluateOptions eval;
  eval.jobs = default_jobs();
  auto* e = app.add_subcommand("evaluate", "Correlate metric scores with opinion scores");
  e->add_option("manifest", eval.manifest);
  e->add_option("--from-scores", eval.from_scores, "Reuse a score CSV from 'batch'");
  e->add_option("--metrics", eval.metrics)->delimiter(',')->capture_default_str();
  e->add_option("--baseline", eval.baseline, "Metric the others are tested against");
  e->add_option("--report", eval.report, "Report JSON ('-' for stdout)")->capture_default_str();
  e->add_option("--scatter", eval.scatter_dir, "Directory for per-database scatter CSVs");
  e->add_option("--scores-out", eval.scores_out, "Also write the score CSV");
  e->add_option("--dmos", eval.dmos, "Databases whose scores are DMOS")->delimiter(',');
  e->add_option("--jobs", eval.jobs)->check(CLI::PositiveNumber)->capture_default_str();
  e->add_option("--c", eval.c)->capture_default_str();
  e->add_option("--alpha", eval.alpha)->capture_default_str();
  e->callback([&] { action = [&] { return cmd_evaluate(eval, out, err); }; });

  TuneOptions tune_opts;
  tune_opts.cfg.jobs = default_jobs();
  auto* t = app.add_subcommand("tune", "Select C and alpha by grid search and Nelder-Mead");
  t->add_option("manifests", tune_opts.manifests)->required();
  t->add_option("--subset-fraction", tune_opts.cfg.subset_fraction)->capture_default_str();
  t->add_option("--seed", tune_opts.cfg.seed)->capture_default_str();
  t->add_option("--c-step", tune_opts.cfg.c_step)->capture_default_str();
  t->add_option("--alpha-step", tune_opts.cfg.alpha_step)->capture_default_str();
  t->add_option("--c-min", tune_opts.cfg.c_min)->capture_default_str();
  t->add_option("--c-max", tune_opts.cfg.c_max)->capture_default_str();
  t->add_option("--alpha-min", tune_opts.cfg.alpha_min)->capture_default_str();
  t->add_option("--alpha-max", tune_opts.cfg.alpha_max)->capture_default_str();
  t->add_option("--max-iters", tune_opts.cfg.max_iters)->capture_default_str();
  t->add_option("--tol", tune_opts.cfg.tol)->capture_default_str();
  t->add_option("--jobs", tune_opts.cfg.jobs)->check(CLI::PositiveNumber)->capture_default_str();
  t->add_flag("--gray", tune_opts.gray, "Tune the grayscale index instead of HaarPSIC");
  t->add_option("--wavelet", tune_opts.wavelet)->capture_default_str();
  t->add_option("--out", tune_opts.out, "TuneResult JSON");
  t->add_option("--dmos", tune_opts.cfg.dmos_databases,
                "Databases whose scores are DMOS (SROCC sign flipped)")
      ->delimiter(',');
  t->callback([&] { action = [&] { return cmd_tune(tune_opts, out, err); }; });

  FiltersOptions filters;
  auto* f = app.add_subcommand("filters", "Print the 2D filters of one scale");
  f->add_option("--wavelet", filters.wavelet)->capture_default_str();
  f->add_option("--scale", filters.scale)->capture_default_str();
  f->callback([&] { action = [&] { return cmd_filters(filters, out); }; });

  std::vector<const char*> argv = {"haarpsi"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    return action();
  } catch (const UsageError& ex) {
    err << "usage error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitData;
  }
}

}  // namespace haarpsi::cli
