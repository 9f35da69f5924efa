#ifndef HAARPSI_IMAGE_H_
#define HAARPSI_IMAGE_H_

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace haarpsi {

// Thrown when two rasters that must agree in size do not, or a raster is too
// small for the requested operation.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Row-major plane of real-valued samples, nominally in [0, 255].
class ImagePlane {
 public:
  ImagePlane() = default;
  ImagePlane(std::size_t width, std::size_t height, double fill = 0.0);
  // Takes ownership of `samples`; throws if the size disagrees with
  // width * height or any sample is not finite.
  ImagePlane(std::size_t width, std::size_t height, std::vector<double> samples);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  double operator()(std::size_t row, std::size_t col) const {
    return samples_[row * width_ + col];
  }
  double& operator()(std::size_t row, std::size_t col) {
    return samples_[row * width_ + col];
  }

  std::span<const double> samples() const { return samples_; }
  std::span<double> samples() { return samples_; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(samples_).subspan(r * width_, width_);
  }

  bool same_shape(const ImagePlane& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const ImagePlane&, const ImagePlane&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> samples_;
};

struct ColorImage {
  ImagePlane r;
  ImagePlane g;
  ImagePlane b;

  ColorImage() = default;
  // Throws DimensionError unless all three planes share width and height.
  ColorImage(ImagePlane red, ImagePlane green, ImagePlane blue);

  std::size_t width() const { return r.width(); }
  std::size_t height() const { return r.height(); }

  // Replicates a gray plane into all three channels.
  static ColorImage from_gray(const ImagePlane& gray);

  friend bool operator==(const ColorImage&, const ColorImage&) = default;
};

struct YiqPlanes {
  ImagePlane y;
  ImagePlane i;
  ImagePlane q;
};

// Luma weights of the Matlab rgb2gray convention (first row of the YIQ
// matrix).
ImagePlane rgb_to_gray(const ColorImage& img);

// Per-pixel product with the NTSC YIQ matrix
//   [0.299  0.587  0.114; 0.596 -0.274 -0.322; 0.211 -0.523  0.312].
YiqPlanes rgb_to_yiq(const ColorImage& img);

// 2x2 block mean followed by dyadic subsampling. Output pixel (i, j) is the
// mean of input rows {2i, 2i+1} and columns {2j, 2j+1}; an odd trailing row
// or column is dropped. Throws DimensionError for inputs smaller than 2x2.
ImagePlane preprocess(const ImagePlane& img);

}  // namespace haarpsi

#endif  // HAARPSI_IMAGE_H_
