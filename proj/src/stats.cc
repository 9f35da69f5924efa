#include "haarpsi/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace haarpsi {
namespace {

void check_pair(std::span<const double> x, std::span<const double> y,
                const char* name) {
  if (x.size() != y.size()) {
    throw std::invalid_argument(std::string(name) +
                                ": vectors differ in length");
  }
  if (x.size() < 2) {
    throw UndefinedCorrelation(std::string(name) + ": need at least 2 samples");
  }
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

PairedSamples::PairedSamples(std::vector<double> scores, std::vector<double> mos)
    : scores_(std::move(scores)), mos_(std::move(mos)) {
  if (scores_.size() != mos_.size()) {
    throw std::invalid_argument("PairedSamples: length mismatch");
  }
  auto has_nan = [](const std::vector<double>& v) {
    return std::any_of(v.begin(), v.end(),
                       [](double d) { return std::isnan(d); });
  };
  if (has_nan(scores_) || has_nan(mos_)) {
    throw std::invalid_argument("PairedSamples: NaN value");
  }
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 (0-based) share rank mean(i+1 .. j)
    const double rank = 0.5 * double(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "pearson");
  const double n = double(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw UndefinedCorrelation("pearson: non-finite value");
    }
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw UndefinedCorrelation("pearson: zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "spearman");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  try {
    return pearson(rx, ry);
  } catch (const UndefinedCorrelation&) {
    throw UndefinedCorrelation("spearman: constant vector");
  }
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "kendall_tau");
  // concordant - discordant, and pairs not tied in x (resp. y)
  long long net = 0, untied_x = 0, untied_y = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const int sx = sign(x[i] - x[j]);
      const int sy = sign(y[i] - y[j]);
      net += sx * sy;
      untied_x += sx != 0;
      untied_y += sy != 0;
    }
  }
  if (untied_x == 0 || untied_y == 0) {
    throw UndefinedCorrelation("kendall_tau: all pairs tied");
  }
  return std::clamp(
      double(net) / std::sqrt(double(untied_x) * double(untied_y)), -1.0, 1.0);
}

SignificanceResult significance(double r1, double r2, std::size_t n) {
  if (!(std::abs(r1) < 1.0) || !(std::abs(r2) < 1.0)) {
    throw std::domain_error("significance: Fisher z undefined for |r| >= 1");
  }
  if (n <= 3) {
    throw std::domain_error("significance: need more than 3 samples");
  }
  const double sd = std::sqrt(2.0 * 1.06 / double(n - 3));
  SignificanceResult out;
  out.z_stat = (std::atanh(r1) - std::atanh(r2)) / sd;
  out.significant_05 = std::abs(out.z_stat) > kZCritical05;
  return out;
}

}  // namespace haarpsi
