#include "haarpsi/metric.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "haarpsi/image_io.h"

namespace haarpsi {
namespace {

constexpr int kScales = 3;

void require_same_shape(const ImagePlane& a, const ImagePlane& b,
                        const char* where) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(where) + ": images differ in size (" +
                         std::to_string(a.width()) + "x" +
                         std::to_string(a.height()) + " vs " +
                         std::to_string(b.width()) + "x" +
                         std::to_string(b.height()) + ")");
  }
}

void require_scoreable(const ImagePlane& f, const char* where) {
  if (f.width() < 4 || f.height() < 4) {
    throw DimensionError(std::string(where) +
                         ": image too small after preprocessing (need at "
                         "least 4x4 input, got " +
                         std::to_string(f.width()) + "x" +
                         std::to_string(f.height()) + ")");
  }
}

void require_orientation(int k) {
  if (k != 1 && k != 2) {
    throw std::invalid_argument("orientation k must be 1 or 2");
  }
}

ImagePlane abs_response(const ImagePlane& f, const SeparableFilter& filter,
                        Boundary boundary) {
  ImagePlane r = convolve_separable_same(f, filter, boundary);
  for (double& v : r.samples()) v = std::abs(v);
  return r;
}

const SeparableFilter& mean_filter_2x2() {
  static const SeparableFilter kMean{{0.5, 0.5}, {0.5, 0.5}};
  return kMean;
}

ImagePlane elementwise_max(const ImagePlane& a, const ImagePlane& b) {
  ImagePlane out(a.width(), a.height());
  std::transform(a.samples().begin(), a.samples().end(), b.samples().begin(),
                 out.samples().begin(),
                 [](double x, double y) { return std::max(x, y); });
  return out;
}

}  // namespace

void MetricParams::validate() const {
  if (!(std::isfinite(c) && c > 0.0)) {
    throw std::invalid_argument("C must be positive, got " + std::to_string(c));
  }
  if (!(std::isfinite(alpha) && alpha > 0.0)) {
    throw std::invalid_argument("alpha must be positive, got " +
                                std::to_string(alpha));
  }
}

double logistic(double x, double alpha) {
  return 1.0 / (1.0 + std::exp(-alpha * x));
}

double logistic_inverse(double y, double alpha) {
  if (!(y > 0.0 && y < 1.0)) {
    throw std::domain_error("logistic_inverse: argument " + std::to_string(y) +
                            " outside (0, 1)");
  }
  return std::log(y / (1.0 - y)) / alpha;
}

const FilterBank2D& metric_filterbank(WaveletId id) {
  static const auto kBanks = [] {
    std::array<FilterBank2D, 6> banks;
    for (WaveletId w : all_wavelets()) {
      banks[static_cast<std::size_t>(w)] = build_filterbank(wavelet(w), kScales);
    }
    // Haar taps are +-2^(-j/2) per axis. Moving the whole scale onto one
    // factor keeps every tap dyadic, so flat regions cancel exactly.
    FilterBank2D& haar = banks[static_cast<std::size_t>(WaveletId::kHaar)];
    for (auto* side : {&haar.horizontal, &haar.vertical}) {
      for (std::size_t j = 0; j < side->size(); ++j) {
        SeparableFilter& f = (*side)[j];
        const double scale = std::ldexp(1.0, -int(j + 1));
        for (double& t : f.column) t = std::copysign(scale, t);
        for (double& t : f.row) t = std::copysign(1.0, t);
      }
    }
    return banks;
  }();
  return kBanks[static_cast<std::size_t>(id)];
}

ImagePlane local_similarity_map(const ImagePlane& f1, const ImagePlane& f2,
                                int k, const FilterBank2D& bank,
                                const MetricParams& params) {
  require_same_shape(f1, f2, "local_similarity_map");
  require_orientation(k);
  if (bank.scales < 2) {
    throw std::invalid_argument("local_similarity_map: bank needs 2 scales");
  }
  params.validate();
  std::array<ImagePlane, 2> a, b;
  for (int j = 1; j <= 2; ++j) {
    a[j - 1] = abs_response(f1, bank.filter(k - 1, j), params.boundary);
    b[j - 1] = abs_response(f2, bank.filter(k - 1, j), params.boundary);
  }
  ImagePlane hs(f1.width(), f1.height());
  auto out = hs.samples();
  for (std::size_t x = 0; x < out.size(); ++x) {
    const double s =
        scalar_similarity(a[0].samples()[x], b[0].samples()[x], params.c) +
        scalar_similarity(a[1].samples()[x], b[1].samples()[x], params.c);
    out[x] = logistic(0.5 * s, params.alpha);
  }
  return hs;
}

ImagePlane weight_map(const ImagePlane& f, int k, const FilterBank2D& bank,
                      Boundary boundary) {
  require_orientation(k);
  if (bank.scales < 3) {
    throw std::invalid_argument("weight_map: bank needs 3 scales");
  }
  return abs_response(f, bank.filter(k - 1, 3), boundary);
}

PreparedPair PreparedPair::gray(const ImagePlane& f1, const ImagePlane& f2,
                                WaveletId wavelet_id, Boundary boundary) {
  require_same_shape(f1, f2, "haarpsi");
  const ImagePlane p1 = preprocess(f1);
  const ImagePlane p2 = preprocess(f2);
  require_scoreable(f1, "haarpsi");

  const FilterBank2D& bank = metric_filterbank(wavelet_id);
  PreparedPair pair;
  pair.width_ = p1.width();
  pair.height_ = p1.height();
  for (int k = 1; k <= 2; ++k) {
    Term term;
    for (int j = 1; j <= 2; ++j) {
      term.a[j - 1] = abs_response(p1, bank.filter(k - 1, j), boundary);
      term.b[j - 1] = abs_response(p2, bank.filter(k - 1, j), boundary);
    }
    term.weight = elementwise_max(weight_map(p1, k, bank, boundary),
                                  weight_map(p2, k, bank, boundary));
    pair.terms_.push_back(std::move(term));
  }
  return pair;
}

PreparedPair PreparedPair::color(const ColorImage& f1, const ColorImage& f2,
                                 WaveletId wavelet_id, Boundary boundary) {
  require_same_shape(f1.r, f2.r, "haarpsi_color");
  const YiqPlanes yiq1 = rgb_to_yiq(f1);
  const YiqPlanes yiq2 = rgb_to_yiq(f2);
  PreparedPair pair = gray(yiq1.y, yiq2.y, wavelet_id, boundary);

  const ImagePlane i1 = preprocess(yiq1.i), i2 = preprocess(yiq2.i);
  const ImagePlane q1 = preprocess(yiq1.q), q2 = preprocess(yiq2.q);
  const SeparableFilter& m = mean_filter_2x2();
  Term chroma;
  chroma.a = {abs_response(i1, m, boundary), abs_response(q1, m, boundary)};
  chroma.b = {abs_response(i2, m, boundary), abs_response(q2, m, boundary)};
  chroma.weight = ImagePlane(pair.width_, pair.height_);
  auto w = chroma.weight.samples();
  auto w1 = pair.terms_[0].weight.samples();
  auto w2 = pair.terms_[1].weight.samples();
  for (std::size_t x = 0; x < w.size(); ++x) w[x] = 0.5 * (w1[x] + w2[x]);
  pair.terms_.push_back(std::move(chroma));
  return pair;
}

ScoreResult PreparedPair::score(double c, double alpha, bool want_maps) const {
  MetricParams{c, alpha}.validate();
  ScoreResult result;
  if (want_maps) result.maps.emplace();

  double weighted = 0.0;
  double total_weight = 0.0;
  double unweighted = 0.0;
  std::size_t count = 0;
  for (const Term& term : terms_) {
    ImagePlane hs_map;
    if (want_maps) hs_map = ImagePlane(width_, height_);
    const auto a0 = term.a[0].samples(), a1 = term.a[1].samples();
    const auto b0 = term.b[0].samples(), b1 = term.b[1].samples();
    const auto w = term.weight.samples();
    for (std::size_t x = 0; x < w.size(); ++x) {
      const double s = scalar_similarity(a0[x], b0[x], c) +
                       scalar_similarity(a1[x], b1[x], c);
      const double hs = logistic(0.5 * s, alpha);
      weighted += hs * w[x];
      total_weight += w[x];
      unweighted += hs;
      if (want_maps) hs_map.samples()[x] = hs;
    }
    count += w.size();
    if (want_maps) {
      result.maps->hs.push_back(std::move(hs_map));
      result.maps->w.push_back(term.weight);
    }
  }

  double pooled;
  if (total_weight > 0.0) {
    pooled = weighted / total_weight;
  } else {
    pooled = unweighted / double(count);
    result.degenerate_weights = true;
  }
  // Rounding can push the pooled value a hair past l_alpha(1); the finish is
  // clamped so the index stays inside [0, 1].
  const double linear = logistic_inverse(pooled, alpha);
  result.score = std::clamp(linear * linear, 0.0, 1.0);
  return result;
}

ScoreResult haarpsi_gray(const ImagePlane& f1, const ImagePlane& f2,
                         const MetricParams& params, bool want_maps) {
  params.validate();
  return PreparedPair::gray(f1, f2, params.wavelet, params.boundary)
      .score(params.c, params.alpha, want_maps);
}

ScoreResult haarpsi_color(const ColorImage& f1, const ColorImage& f2,
                          const MetricParams& params, bool want_maps) {
  params.validate();
  return PreparedPair::color(f1, f2, params.wavelet, params.boundary)
      .score(params.c, params.alpha, want_maps);
}

double psnr(const ImagePlane& f1, const ImagePlane& f2, double peak) {
  require_same_shape(f1, f2, "psnr");
  if (f1.empty()) throw DimensionError("psnr: empty images");
  double sse = 0.0;
  for (std::size_t x = 0; x < f1.size(); ++x) {
    const double d = f1.samples()[x] - f2.samples()[x];
    sse += d * d;
  }
  const double mse = sse / double(f1.size());
  if (mse == 0.0) return kPsnrInfinity;
  return 10.0 * std::log10(peak * peak / mse);
}

void dump_maps(const MetricMaps& maps, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream sidecar(dir / "maps.txt");
  if (!sidecar) {
    throw std::runtime_error("cannot write " + (dir / "maps.txt").string());
  }
  sidecar.precision(17);
  auto emit = [&](const ImagePlane& map, const std::string& name) {
    const auto [lo, hi] =
        std::minmax_element(map.samples().begin(), map.samples().end());
    const double min = *lo, max = *hi;
    ImagePlane scaled(map.width(), map.height());
    if (max > min) {
      std::transform(map.samples().begin(), map.samples().end(),
                     scaled.samples().begin(), [&](double v) {
                       return 255.0 * (v - min) / (max - min);
                     });
    }
    write_image(dir / (name + ".png"), scaled);
    sidecar << name << ' ' << min << ' ' << max << '\n';
  };
  for (std::size_t k = 0; k < maps.hs.size(); ++k) {
    emit(maps.hs[k], "hs" + std::to_string(k + 1));
  }
  for (std::size_t k = 0; k < maps.w.size(); ++k) {
    emit(maps.w[k], "w" + std::to_string(k + 1));
  }
}

}  // namespace haarpsi
