#include "haarpsi/tuner.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "haarpsi/parallel.h"
#include "haarpsi/stats.h"

namespace haarpsi {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> grid_axis(double lo, double hi, double step) {
  std::vector<double> values;
  for (std::size_t i = 0;; ++i) {
    const double v = lo + double(i) * step;
    if (v > hi + 1e-9 * step) break;
    values.push_back(v);
  }
  return values;
}

// NaN for undefined points; other exceptions propagate.
double evaluate(const Objective& objective, double c, double alpha) {
  try {
    const double v = objective(c, alpha);
    return std::isfinite(v) ? v : kNaN;
  } catch (const UndefinedCorrelation&) {
    return kNaN;
  }
}

std::map<std::string, std::vector<const ManifestEntry*>> group_by_database(
    const std::vector<ManifestEntry>& entries) {
  std::map<std::string, std::vector<const ManifestEntry*>> groups;
  for (const auto& e : entries) groups[e.database].push_back(&e);
  return groups;
}

TuneSubset prepare(const std::string& database,
                   const std::vector<const ManifestEntry*>& rows,
                   ColorMode mode, WaveletId wavelet, unsigned jobs,
                   bool dmos) {
  TuneSubset subset;
  subset.database = database;
  subset.pairs.resize(rows.size());
  subset.mos.resize(rows.size());
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    const DecodedImage ref = decode_image(rows[i]->reference_path);
    const DecodedImage dist = decode_image(rows[i]->distorted_path);
    subset.pairs[i] =
        mode == ColorMode::kColor
            ? PreparedPair::color(as_color(ref), as_color(dist), wavelet)
            : PreparedPair::gray(as_gray(ref), as_gray(dist), wavelet);
    subset.mos[i] = dmos ? -rows[i]->mos : rows[i]->mos;
  });
  return subset;
}

}  // namespace

void TuneConfig::validate() const {
  if (!(c_min > 0.0 && c_min <= c_max)) {
    throw std::invalid_argument("tune: C range must be positive and nonempty");
  }
  if (!(alpha_min > 0.0 && alpha_min <= alpha_max)) {
    throw std::invalid_argument(
        "tune: alpha range must be positive and nonempty");
  }
  if (!(c_step > 0.0 && alpha_step > 0.0)) {
    throw std::invalid_argument("tune: grid steps must be positive");
  }
  if (!(subset_fraction > 0.0 && subset_fraction <= 1.0)) {
    throw std::invalid_argument("tune: subset fraction must lie in (0, 1]");
  }
  if (max_iters < 0 || !(tol >= 0.0)) {
    throw std::invalid_argument("tune: bad Nelder-Mead stopping rule");
  }
}

std::vector<TuneSubset> sample_subsets(const TuneConfig& cfg) {
  cfg.validate();
  if (cfg.entries.empty()) throw std::invalid_argument("tune: no databases");
  std::mt19937_64 rng(cfg.seed);
  std::vector<TuneSubset> subsets;
  for (const auto& [database, rows] : group_by_database(cfg.entries)) {
    const auto k = static_cast<std::size_t>(
        std::floor(cfg.subset_fraction * double(rows.size()) + 1e-9));
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(std::min(k, rows.size()));
    std::sort(order.begin(), order.end());
    std::vector<const ManifestEntry*> picked;
    for (std::size_t i : order) picked.push_back(rows[i]);
    subsets.push_back(
        prepare(database, picked, cfg.color_mode, cfg.wavelet, cfg.jobs,
                cfg.dmos_databases.contains(database)));
  }
  return subsets;
}

std::vector<TuneSubset> prepare_databases(
    const std::vector<ManifestEntry>& entries, ColorMode mode,
    WaveletId wavelet, unsigned jobs, const std::set<std::string>& dmos) {
  std::vector<TuneSubset> out;
  for (const auto& [database, rows] : group_by_database(entries)) {
    out.push_back(
        prepare(database, rows, mode, wavelet, jobs, dmos.contains(database)));
  }
  return out;
}

std::vector<double> subset_srocc(double c, double alpha,
                                 const std::vector<TuneSubset>& subsets) {
  std::vector<double> out;
  for (const auto& s : subsets) {
    if (s.pairs.size() < 4) {
      throw std::invalid_argument("objective: subset '" + s.database +
                                  "' has fewer than 4 rows");
    }
    std::vector<double> scores(s.pairs.size());
    for (std::size_t i = 0; i < s.pairs.size(); ++i) {
      scores[i] = s.pairs[i].score(c, alpha).score;
    }
    out.push_back(spearman(scores, s.mos));
  }
  return out;
}

double objective(double c, double alpha,
                 const std::vector<TuneSubset>& subsets) {
  if (subsets.empty()) throw std::invalid_argument("objective: no subsets");
  const auto values = subset_srocc(c, alpha, subsets);
  return std::accumulate(values.begin(), values.end(), 0.0) /
         double(values.size());
}

GridResult grid_search(const TuneConfig& cfg, const Objective& objective) {
  cfg.validate();
  GridResult result;
  Surface& s = result.surface;
  s.c_values = grid_axis(cfg.c_min, cfg.c_max, cfg.c_step);
  s.alpha_values = grid_axis(cfg.alpha_min, cfg.alpha_max, cfg.alpha_step);
  const std::size_t na = s.alpha_values.size();
  std::vector<double> flat(s.c_values.size() * na);
  parallel_for(flat.size(), cfg.jobs, [&](std::size_t node) {
    flat[node] =
        evaluate(objective, s.c_values[node / na], s.alpha_values[node % na]);
  });

  bool found = false;
  s.values.assign(s.c_values.size(), std::vector<double>(na));
  for (std::size_t node = 0; node < flat.size(); ++node) {
    const double c = s.c_values[node / na];
    const double alpha = s.alpha_values[node % na];
    const double v = flat[node];
    s.values[node / na][node % na] = v;
    result.trace.push_back({c, alpha, v});
    if (!std::isnan(v) && (!found || v > result.best_value)) {
      found = true;
      result.c_best = c;
      result.alpha_best = alpha;
      result.best_value = v;
    }
  }
  if (!found) {
    throw TuningError("grid search: objective undefined at every node",
                      result.trace);
  }
  return result;
}

NelderMeadResult nelder_mead(double c_start, double alpha_start,
                             const Objective& objective,
                             const NelderMeadOptions& o) {
  struct Vertex {
    double c, alpha, value;
  };
  NelderMeadResult result;
  auto eval = [&](double c, double alpha) {
    c = std::clamp(c, o.c_min, o.c_max);
    alpha = std::clamp(alpha, o.alpha_min, o.alpha_max);
    const double v = evaluate(objective, c, alpha);
    result.trace.push_back({c, alpha, v});
    if (std::isnan(v)) {
      throw TuningError("Nelder-Mead: objective undefined at C=" +
                            std::to_string(c) +
                            " alpha=" + std::to_string(alpha),
                        result.trace);
    }
    return Vertex{c, alpha, v};
  };
  auto step_from = [](double x, double step, double hi) {
    return x + step <= hi ? x + step : x - step;
  };

  std::array<Vertex, 3> simplex = {
      eval(c_start, alpha_start),
      eval(step_from(c_start, o.c_step, o.c_max), alpha_start),
      eval(c_start, step_from(alpha_start, o.alpha_step, o.alpha_max))};
  auto by_value = [](const Vertex& a, const Vertex& b) {
    return a.value > b.value;
  };

  for (;;) {
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    Vertex& best = simplex[0];
    Vertex& worst = simplex[2];
    if (best.value - worst.value < o.tol || result.iterations >= o.max_iters) {
      break;
    }
    ++result.iterations;
    const double cc = 0.5 * (simplex[0].c + simplex[1].c);
    const double ca = 0.5 * (simplex[0].alpha + simplex[1].alpha);
    auto along = [&](double t) {
      return eval(cc + t * (worst.c - cc), ca + t * (worst.alpha - ca));
    };

    const Vertex reflected = along(-1.0);
    if (reflected.value > best.value) {
      const Vertex expanded = along(-2.0);
      worst = expanded.value > reflected.value ? expanded : reflected;
      continue;
    }
    if (reflected.value > simplex[1].value) {
      worst = reflected;
      continue;
    }
    if (reflected.value > worst.value) {
      const Vertex outside = along(-0.5);
      if (outside.value >= reflected.value) {
        worst = outside;
        continue;
      }
    } else {
      const Vertex inside = along(0.5);
      if (inside.value > worst.value) {
        worst = inside;
        continue;
      }
    }
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      simplex[i] = eval(best.c + 0.5 * (simplex[i].c - best.c),
                        best.alpha + 0.5 * (simplex[i].alpha - best.alpha));
    }
  }
  result.c = simplex[0].c;
  result.alpha = simplex[0].alpha;
  result.value = simplex[0].value;
  return result;
}

TuneResult tune(const TuneConfig& cfg, const Objective& objective) {
  GridResult grid = grid_search(cfg, objective);
  TuneResult r;
  r.c_grid_best = grid.c_best;
  r.alpha_grid_best = grid.alpha_best;
  r.grid_best_value = grid.best_value;
  r.surface = std::move(grid.surface);
  r.trace = std::move(grid.trace);

  NelderMeadOptions nm{cfg.c_step,    cfg.alpha_step, cfg.c_min,
                       cfg.c_max,     cfg.alpha_min,  cfg.alpha_max,
                       cfg.max_iters, cfg.tol};
  NelderMeadResult refined;
  try {
    refined = nelder_mead(grid.c_best, grid.alpha_best, objective, nm);
  } catch (const TuningError& e) {
    auto trace = r.trace;
    trace.insert(trace.end(), e.trace().begin(), e.trace().end());
    throw TuningError(e.what(), std::move(trace));
  }
  r.trace.insert(r.trace.end(), refined.trace.begin(), refined.trace.end());
  r.c_refined = refined.c;
  r.alpha_refined = refined.alpha;
  r.refined_value = refined.value;
  r.iterations = refined.iterations;
  r.c_final = std::lround(refined.c);
  r.alpha_final = std::round(refined.alpha * 10.0) / 10.0;
  return r;
}

TuneResult tune(const TuneConfig& cfg) {
  const std::vector<TuneSubset> subsets = sample_subsets(cfg);
  TuneResult r = tune(cfg, [&subsets](double c, double alpha) {
    return objective(c, alpha, subsets);
  });
  for (const auto& s : subsets) r.subset_sizes[s.database] = s.pairs.size();
  return r;
}

namespace {

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double number_or_nan(const nlohmann::json& j) {
  return j.is_null() ? kNaN : j.get<double>();
}

}  // namespace

nlohmann::json to_json(const TuneResult& r, const TuneConfig& cfg) {
  nlohmann::json j;
  j["config"] = {{"c_range", {cfg.c_min, cfg.c_max}},
                 {"alpha_range", {cfg.alpha_min, cfg.alpha_max}},
                 {"c_step", cfg.c_step},
                 {"alpha_step", cfg.alpha_step},
                 {"subset_fraction", cfg.subset_fraction},
                 {"seed", cfg.seed},
                 {"dmos_databases", cfg.dmos_databases},
                 {"color", cfg.color_mode == ColorMode::kColor},
                 {"wavelet", std::string(to_string(cfg.wavelet))},
                 {"max_iters", cfg.max_iters},
                 {"tol", cfg.tol},
                 {"nelder_mead",
                  {{"reflection", 1.0},
                   {"expansion", 2.0},
                   {"contraction", 0.5},
                   {"shrink", 0.5}}}};
  j["c_grid_best"] = r.c_grid_best;
  j["alpha_grid_best"] = r.alpha_grid_best;
  j["grid_best_value"] = r.grid_best_value;
  j["c_refined"] = r.c_refined;
  j["alpha_refined"] = r.alpha_refined;
  j["refined_value"] = r.refined_value;
  j["iterations"] = r.iterations;
  j["c_final"] = r.c_final;
  j["alpha_final"] = r.alpha_final;
  j["subset_sizes"] = r.subset_sizes;
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : r.trace) {
    trace.push_back({t.c, t.alpha, number_or_null(t.value)});
  }
  j["objective_trace"] = trace;
  nlohmann::json values = nlohmann::json::array();
  for (const auto& row : r.surface.values) {
    nlohmann::json jr = nlohmann::json::array();
    for (double v : row) jr.push_back(number_or_null(v));
    values.push_back(jr);
  }
  j["surface"] = {{"c_values", r.surface.c_values},
                  {"alpha_values", r.surface.alpha_values},
                  {"mean_srocc", values}};
  return j;
}

TuneResult tune_result_from_json(const nlohmann::json& j) {
  TuneResult r;
  r.c_grid_best = j.at("c_grid_best").get<double>();
  r.alpha_grid_best = j.at("alpha_grid_best").get<double>();
  r.grid_best_value = j.at("grid_best_value").get<double>();
  r.c_refined = j.at("c_refined").get<double>();
  r.alpha_refined = j.at("alpha_refined").get<double>();
  r.refined_value = j.at("refined_value").get<double>();
  r.iterations = j.at("iterations").get<int>();
  r.c_final = j.at("c_final").get<long>();
  r.alpha_final = j.at("alpha_final").get<double>();
  r.subset_sizes =
      j.at("subset_sizes").get<std::map<std::string, std::size_t>>();
  for (const auto& t : j.at("objective_trace")) {
    r.trace.push_back(
        {t.at(0).get<double>(), t.at(1).get<double>(), number_or_nan(t.at(2))});
  }
  const auto& s = j.at("surface");
  r.surface.c_values = s.at("c_values").get<std::vector<double>>();
  r.surface.alpha_values = s.at("alpha_values").get<std::vector<double>>();
  for (const auto& row : s.at("mean_srocc")) {
    std::vector<double> values;
    for (const auto& v : row) values.push_back(number_or_nan(v));
    r.surface.values.push_back(std::move(values));
  }
  return r;
}

}  // namespace haarpsi
