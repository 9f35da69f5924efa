#ifndef HAARPSI_STATS_H_
#define HAARPSI_STATS_H_

#include <span>
#include <stdexcept>
#include <vector>

namespace haarpsi {

// Raised when a correlation coefficient is not defined for the input, e.g. a
// constant vector.
class UndefinedCorrelation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Metric scores paired with (D)MOS values. Construction checks equal length
// and rejects NaN. Infinite values are allowed (PSNR of identical images);
// they are ordered normally by the rank statistics and rejected by pearson.
class PairedSamples {
 public:
  PairedSamples(std::vector<double> scores, std::vector<double> mos);

  std::span<const double> scores() const { return scores_; }
  std::span<const double> mos() const { return mos_; }
  std::size_t size() const { return scores_.size(); }

 private:
  std::vector<double> scores_;
  std::vector<double> mos_;
};

// Fractional ranks starting at 1; ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);
// Tie-corrected tau-b.
double kendall_tau(std::span<const double> x, std::span<const double> y);

inline double pearson(const PairedSamples& p) {
  return pearson(p.scores(), p.mos());
}
inline double spearman(const PairedSamples& p) {
  return spearman(p.scores(), p.mos());
}
inline double kendall_tau(const PairedSamples& p) {
  return kendall_tau(p.scores(), p.mos());
}

struct SignificanceResult {
  double z_stat = 0.0;
  bool significant_05 = false;
};

// Two-tailed 5% critical value of the standard normal.
inline constexpr double kZCritical05 = 1.959964;

// Fisher-z comparison of two correlations over n samples, with the variance
// of each transform approximated by 1.06 / (n - 3). Throws std::domain_error
// for |r| >= 1 or n <= 3.
SignificanceResult significance(double r1, double r2, std::size_t n);

}  // namespace haarpsi

#endif  // HAARPSI_STATS_H_
