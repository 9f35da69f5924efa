#ifndef HAARPSI_IMAGE_IO_H_
#define HAARPSI_IMAGE_IO_H_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>

#include "haarpsi/image.h"

namespace haarpsi {

class ImageError : public std::runtime_error {
 public:
  enum class Kind { kUnreadable, kUnsupported, kCorrupt };

  ImageError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Single-channel inputs decode to ImagePlane, three-channel inputs to
// ColorImage.
using DecodedImage = std::variant<ImagePlane, ColorImage>;

// Reads PNG (gray, gray+alpha, RGB, RGBA, palette; 8 or 16 bit) and binary
// PGM/PPM. 8-bit samples keep their integer values; deeper samples are scaled
// to [0, 255]. Alpha is discarded.
DecodedImage decode_image(const std::filesystem::path& path);

// Convenience views of a decoded image.
ImagePlane as_gray(const DecodedImage& img);
ColorImage as_color(const DecodedImage& img);

// 8-bit writers. Samples are rounded and clamped to [0, 255]. The format is
// chosen from the extension: .png, .pgm/.ppm (binary). Gray planes written
// to .ppm or color images written to .pgm are rejected.
void write_image(const std::filesystem::path& path, const ImagePlane& img);
void write_image(const std::filesystem::path& path, const ColorImage& img);

}  // namespace haarpsi

#endif  // HAARPSI_IMAGE_IO_H_
