#ifndef HAARPSI_METRIC_H_
#define HAARPSI_METRIC_H_

#include <array>
#include <filesystem>
#include <limits>
#include <optional>
#include <vector>

#include "haarpsi/filterbank.h"
#include "haarpsi/image.h"

namespace haarpsi {

enum class ColorMode { kGrayscale, kColor };

struct MetricParams {
  double c = 30.0;
  double alpha = 4.2;
  WaveletId wavelet = WaveletId::kHaar;
  ColorMode color_mode = ColorMode::kGrayscale;
  Boundary boundary = Boundary::kZero;

  // Throws std::invalid_argument unless C > 0 and alpha > 0 (both finite).
  void validate() const;
};

// hs[k] and w[k] for k = 0, 1 (horizontal, vertical) and, for the color
// index, k = 2 (chroma). w holds the combined weights that enter pooling.
struct MetricMaps {
  std::vector<ImagePlane> hs;
  std::vector<ImagePlane> w;
};

struct ScoreResult {
  double score = 0.0;
  // Set when the total weight vanished and the unweighted mean of the local
  // similarities was pooled instead.
  bool degenerate_weights = false;
  std::optional<MetricMaps> maps;
};

// (2ab + C) / (a^2 + b^2 + C); symmetric in a and b bit for bit.
inline double scalar_similarity(double a, double b, double c) {
  return (2.0 * (a * b) + c) / (a * a + b * b + c);
}

double logistic(double x, double alpha);
// ln(y / (1 - y)) / alpha; throws std::domain_error unless 0 < y < 1.
double logistic_inverse(double y, double alpha);

// The filter bank every metric call uses for `id` (three scales).
const FilterBank2D& metric_filterbank(WaveletId id);

// HS^(k) on already preprocessed planes, k in {1, 2}. Uses scales 1 and 2.
ImagePlane local_similarity_map(const ImagePlane& f1, const ImagePlane& f2,
                                int k, const FilterBank2D& bank,
                                const MetricParams& params);

// W^(k) = |g^(k)_3 * f| on an already preprocessed plane, k in {1, 2}.
ImagePlane weight_map(const ImagePlane& f, int k, const FilterBank2D& bank,
                      Boundary boundary = Boundary::kZero);

// Filter responses of one image pair. They do not depend on C or alpha, so a
// prepared pair can be pooled repeatedly under different parameters (the
// tuner relies on this).
class PreparedPair {
 public:
  // Both build from raw images and apply `preprocess` internally. Throw
  // DimensionError on a size mismatch or inputs smaller than 4x4.
  static PreparedPair gray(const ImagePlane& f1, const ImagePlane& f2,
                           WaveletId wavelet = WaveletId::kHaar,
                           Boundary boundary = Boundary::kZero);
  static PreparedPair color(const ColorImage& f1, const ColorImage& f2,
                            WaveletId wavelet = WaveletId::kHaar,
                            Boundary boundary = Boundary::kZero);

  ScoreResult score(double c, double alpha, bool want_maps = false) const;

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }

 private:
  // One similarity map: HS = l_alpha(mean_t S(|a_t|, |b_t|, C)) over the
  // two terms t, pooled with `weight`.
  struct Term {
    std::array<ImagePlane, 2> a;
    std::array<ImagePlane, 2> b;
    ImagePlane weight;
  };

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<Term> terms_;
};

// Grayscale index: preprocess both inputs, then pool HS^(1), HS^(2) with the
// max-combined scale-3 weights and finish with l_alpha^{-1}(.)^2.
ScoreResult haarpsi_gray(const ImagePlane& f1, const ImagePlane& f2,
                         const MetricParams& params = {},
                         bool want_maps = false);

// Color index in YIQ: adds a chroma similarity map from 2x2-mean-filtered I
// and Q channels, weighted by the average of the two luminance weights.
ScoreResult haarpsi_color(const ColorImage& f1, const ColorImage& f2,
                          const MetricParams& params = {},
                          bool want_maps = false);

// Sentinel returned by psnr for identical inputs.
inline constexpr double kPsnrInfinity = std::numeric_limits<double>::infinity();

// 10 log10(peak^2 / MSE) in dB; kPsnrInfinity when the MSE is zero.
double psnr(const ImagePlane& f1, const ImagePlane& f2, double peak = 255.0);

// Writes each map as an 8-bit PNG (hs1.png, w1.png, ...) after independent
// min-max normalization, plus maps.txt listing "<name> <min> <max>" per map.
void dump_maps(const MetricMaps& maps, const std::filesystem::path& dir);

}  // namespace haarpsi

#endif  // HAARPSI_METRIC_H_
