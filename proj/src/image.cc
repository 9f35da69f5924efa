#include "haarpsi/image.h"

#include <cmath>
#include <string>
#include <utility>

namespace haarpsi {

ImagePlane::ImagePlane(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), samples_(width * height, fill) {
  if (!std::isfinite(fill)) {
    throw std::invalid_argument("ImagePlane: fill value is not finite");
  }
}

ImagePlane::ImagePlane(std::size_t width, std::size_t height,
                       std::vector<double> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  if (samples_.size() != width_ * height_) {
    throw DimensionError("ImagePlane: " + std::to_string(samples_.size()) +
                         " samples for a " + std::to_string(width_) + "x" +
                         std::to_string(height_) + " plane");
  }
  for (double v : samples_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("ImagePlane: non-finite sample");
    }
  }
}

ColorImage::ColorImage(ImagePlane red, ImagePlane green, ImagePlane blue)
    : r(std::move(red)), g(std::move(green)), b(std::move(blue)) {
  if (!r.same_shape(g) || !r.same_shape(b)) {
    throw DimensionError("ColorImage: channel planes differ in size");
  }
}

ColorImage ColorImage::from_gray(const ImagePlane& gray) {
  return ColorImage(gray, gray, gray);
}

namespace {

constexpr double kYiq[3][3] = {
    {0.299, 0.587, 0.114},
    {0.596, -0.274, -0.322},
    {0.211, -0.523, 0.312},
};

ImagePlane mix(const ColorImage& img, const double (&w)[3]) {
  ImagePlane out(img.width(), img.height());
  auto r = img.r.samples();
  auto g = img.g.samples();
  auto b = img.b.samples();
  auto o = out.samples();
  for (std::size_t k = 0; k < o.size(); ++k) {
    o[k] = w[0] * r[k] + w[1] * g[k] + w[2] * b[k];
  }
  return out;
}

}  // namespace

ImagePlane rgb_to_gray(const ColorImage& img) { return mix(img, kYiq[0]); }

YiqPlanes rgb_to_yiq(const ColorImage& img) {
  return {mix(img, kYiq[0]), mix(img, kYiq[1]), mix(img, kYiq[2])};
}

ImagePlane preprocess(const ImagePlane& img) {
  if (img.width() < 2 || img.height() < 2) {
    throw DimensionError("preprocess: image must be at least 2x2, got " +
                         std::to_string(img.width()) + "x" +
                         std::to_string(img.height()));
  }
  const std::size_t w = img.width() / 2;
  const std::size_t h = img.height() / 2;
  ImagePlane out(w, h);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      out(i, j) = 0.25 * (img(2 * i, 2 * j) + img(2 * i, 2 * j + 1) +
                          img(2 * i + 1, 2 * j) + img(2 * i + 1, 2 * j + 1));
    }
  }
  return out;
}

}  // namespace haarpsi
