#ifndef HAARPSI_TUNER_H_
#define HAARPSI_TUNER_H_

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "haarpsi/harness.h"
#include "haarpsi/metric.h"

namespace haarpsi {

struct TuneConfig {
  double c_min = 5.0;
  double c_max = 100.0;
  double alpha_min = 2.0;
  double alpha_max = 8.0;
  double c_step = 5.0;
  double alpha_step = 0.5;
  double subset_fraction = 0.25;
  std::uint64_t seed = 0;
  ColorMode color_mode = ColorMode::kColor;
  WaveletId wavelet = WaveletId::kHaar;
  int max_iters = 200;
  double tol = 1e-6;
  unsigned jobs = 1;
  // Databases scored as DMOS (higher = worse). Their opinion scores are
  // negated so that a good metric has positive SROCC everywhere.
  std::set<std::string> dmos_databases;
  // Entries of every database; grouped by ManifestEntry::database.
  std::vector<ManifestEntry> entries;

  // Throws std::invalid_argument on empty ranges, non-positive steps, a
  // fraction outside (0, 1] or no entries.
  void validate() const;
};

struct TracePoint {
  double c = 0.0;
  double alpha = 0.0;
  double value = 0.0;  // NaN when the objective was undefined

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

// Objective values on the grid, indexed [c][alpha]. Undefined nodes are NaN.
struct Surface {
  std::vector<double> c_values;
  std::vector<double> alpha_values;
  std::vector<std::vector<double>> values;
};

class TuningError : public std::runtime_error {
 public:
  TuningError(const std::string& what, std::vector<TracePoint> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<TracePoint>& trace() const { return trace_; }

 private:
  std::vector<TracePoint> trace_;
};

// Must be safe to call concurrently. Throwing UndefinedCorrelation (or
// returning a non-finite value) marks the point as undefined.
using Objective = std::function<double(double c, double alpha)>;

// One database's sampled rows, decoded and filtered once. Scoring under new
// parameters only redoes the pooling.
struct TuneSubset {
  std::string database;
  std::vector<PreparedPair> pairs;
  std::vector<double> mos;
};

// Draws floor(fraction * n) rows per database without replacement (one
// mt19937_64 stream seeded with `seed`, databases in label order), keeps
// them in manifest order and prepares the image pairs.
std::vector<TuneSubset> sample_subsets(const TuneConfig& cfg);

// Prepares every row of every database (fraction 1, no sampling).
std::vector<TuneSubset> prepare_databases(const std::vector<ManifestEntry>& entries,
                                          ColorMode mode, WaveletId wavelet,
                                          unsigned jobs,
                                          const std::set<std::string>& dmos = {});

// SROCC of each subset at (C, alpha).
std::vector<double> subset_srocc(double c, double alpha,
                                 const std::vector<TuneSubset>& subsets);

// Mean SROCC over the subsets. Throws std::invalid_argument if a subset has
// fewer than 4 rows and UndefinedCorrelation for constant scores.
double objective(double c, double alpha, const std::vector<TuneSubset>& subsets);

struct GridResult {
  double c_best = 0.0;
  double alpha_best = 0.0;
  double best_value = 0.0;
  Surface surface;
  std::vector<TracePoint> trace;  // node order, C-major
};

// Evaluates every node of the inclusive grid (optionally on cfg.jobs
// threads) and returns the first maximum in C-major order. Throws
// TuningError if no node is defined.
GridResult grid_search(const TuneConfig& cfg, const Objective& objective);

struct NelderMeadOptions {
  double c_step = 5.0;
  double alpha_step = 0.5;
  double c_min = 5.0, c_max = 100.0;
  double alpha_min = 2.0, alpha_max = 8.0;
  int max_iters = 200;
  double tol = 1e-6;
};

struct NelderMeadResult {
  double c = 0.0;
  double alpha = 0.0;
  double value = 0.0;
  int iterations = 0;
  std::vector<TracePoint> trace;
};

// Maximizes `objective` from `start` with reflection 1, expansion 2,
// contraction 0.5 and shrink 0.5. The initial simplex is start,
// start + (c_step, 0) and start + (0, alpha_step) (stepping down instead when
// that would leave the range). Points are clamped to the ranges. Stops when
// the spread of the simplex values drops below tol or after max_iters
// iterations. Throws TuningError (with the trace so far) on an undefined or
// non-finite value.
NelderMeadResult nelder_mead(double c_start, double alpha_start,
                             const Objective& objective,
                             const NelderMeadOptions& options);

struct TuneResult {
  double c_grid_best = 0.0;
  double alpha_grid_best = 0.0;
  double grid_best_value = 0.0;
  double c_refined = 0.0;
  double alpha_refined = 0.0;
  double refined_value = 0.0;
  int iterations = 0;
  long c_final = 0;        // round(c_refined)
  double alpha_final = 0;  // round(alpha_refined * 10) / 10
  std::map<std::string, std::size_t> subset_sizes;
  std::vector<TracePoint> trace;  // grid nodes, then Nelder-Mead evaluations
  Surface surface;
};

// Grid search followed by Nelder-Mead from the grid optimum, then rounding.
TuneResult tune(const TuneConfig& cfg, const Objective& objective);
// Same, with the mean-SROCC objective over subsets drawn by sample_subsets.
TuneResult tune(const TuneConfig& cfg);

nlohmann::json to_json(const TuneResult& result, const TuneConfig& cfg);
TuneResult tune_result_from_json(const nlohmann::json& j);

}  // namespace haarpsi

#endif  // HAARPSI_TUNER_H_
