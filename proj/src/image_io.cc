#include "haarpsi/image_io.h"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <vector>

namespace haarpsi {
namespace {

using Bytes = std::vector<std::uint8_t>;

ImageError corrupt(const std::filesystem::path& path, const std::string& why) {
  return ImageError(ImageError::Kind::kCorrupt,
                    path.string() + ": corrupt stream: " + why);
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ImageError(ImageError::Kind::kUnreadable,
                     path.string() + ": cannot open file");
  }
  Bytes data((std::istreambuf_iterator<char>(in)),
             std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw ImageError(ImageError::Kind::kUnreadable,
                     path.string() + ": read failed");
  }
  return data;
}

// Raw interleaved samples as produced by either decoder.
struct RawRaster {
  std::size_t width = 0;
  std::size_t height = 0;
  int channels = 0;
  std::vector<double> samples;
};

DecodedImage to_decoded(RawRaster raw) {
  const std::size_t n = raw.width * raw.height;
  if (raw.channels == 1) {
    return ImagePlane(raw.width, raw.height, std::move(raw.samples));
  }
  std::vector<double> r(n), g(n), b(n);
  for (std::size_t k = 0; k < n; ++k) {
    r[k] = raw.samples[3 * k];
    g[k] = raw.samples[3 * k + 1];
    b[k] = raw.samples[3 * k + 2];
  }
  return ColorImage(ImagePlane(raw.width, raw.height, std::move(r)),
                    ImagePlane(raw.width, raw.height, std::move(g)),
                    ImagePlane(raw.width, raw.height, std::move(b)));
}

// ---------------------------------------------------------------- PNM ----

class PnmCursor {
 public:
  PnmCursor(const Bytes& data, const std::filesystem::path& path)
      : data_(data), path_(path) {}

  void skip_space_and_comments() {
    while (pos_ < data_.size()) {
      if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(data_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long read_uint(const char* field) {
    skip_space_and_comments();
    if (pos_ >= data_.size() || !std::isdigit(data_[pos_])) {
      throw corrupt(path_, std::string("bad PNM header field '") + field + "'");
    }
    unsigned long v = 0;
    while (pos_ < data_.size() && std::isdigit(data_[pos_])) {
      v = v * 10 + (data_[pos_] - '0');
      if (v > 1'000'000'000UL) throw corrupt(path_, "PNM header value overflow");
      ++pos_;
    }
    return v;
  }

  std::size_t& pos() { return pos_; }

 private:
  const Bytes& data_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 2;
};

RawRaster decode_pnm(const Bytes& data, const std::filesystem::path& path) {
  const int channels = data[1] == '5' ? 1 : 3;
  PnmCursor cur(data, path);
  const auto width = cur.read_uint("width");
  const auto height = cur.read_uint("height");
  const auto maxval = cur.read_uint("maxval");
  if (width == 0 || height == 0) throw corrupt(path, "zero image dimension");
  if (maxval == 0 || maxval > 65535) throw corrupt(path, "maxval out of range");
  if (cur.pos() >= data.size() || !std::isspace(data[cur.pos()])) {
    throw corrupt(path, "missing whitespace after PNM header");
  }
  ++cur.pos();

  const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
  const std::size_t count = width * height * channels;
  if (data.size() - cur.pos() < count * bytes_per_sample) {
    throw corrupt(path, "truncated PNM raster");
  }
  RawRaster raw{width, height, channels, std::vector<double>(count)};
  const std::uint8_t* p = data.data() + cur.pos();
  const double scale = maxval == 255 ? 1.0 : 255.0 / double(maxval);
  for (std::size_t k = 0; k < count; ++k) {
    unsigned v = bytes_per_sample == 1 ? p[k] : (p[2 * k] << 8) | p[2 * k + 1];
    if (v > maxval) throw corrupt(path, "sample exceeds maxval");
    raw.samples[k] = maxval == 255 ? double(v) : v * scale;
  }
  return raw;
}

// ---------------------------------------------------------------- PNG ----

struct MemoryReader {
  const Bytes* data;
  std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t len) {
  auto* src = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (src->data->size() - src->pos < len) {
    png_error(png, "unexpected end of PNG stream");
  }
  std::memcpy(out, src->data->data() + src->pos, len);
  src->pos += len;
}

struct PngErrorSink {
  char message[256] = {0};
};

void png_on_error(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
  std::snprintf(sink->message, sizeof(sink->message), "%s", msg);
  png_longjmp(png, 1);
}

void png_on_warning(png_structp, png_const_charp) {}

// Everything that must survive a longjmp lives outside this frame.
struct PngReadState {
  png_structp png = nullptr;
  png_infop info = nullptr;
  MemoryReader reader{};
  PngErrorSink errors;
  std::vector<std::uint8_t> pixels;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int channels = 0;
  int bit_depth = 0;

  ~PngReadState() { png_destroy_read_struct(&png, &info, nullptr); }
};

bool png_read_raw(PngReadState& st) {
  if (setjmp(png_jmpbuf(st.png))) return false;
  png_set_read_fn(st.png, &st.reader, png_read_from_memory);
  png_read_info(st.png, st.info);

  const int color_type = png_get_color_type(st.png, st.info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(st.png);
  if (color_type == PNG_COLOR_TYPE_GRAY &&
      png_get_bit_depth(st.png, st.info) < 8) {
    png_set_expand_gray_1_2_4_to_8(st.png);
  }
  if (png_get_valid(st.png, st.info, PNG_INFO_tRNS)) {
    png_set_tRNS_to_alpha(st.png);
  }
  png_set_strip_alpha(st.png);
  png_set_interlace_handling(st.png);
  png_read_update_info(st.png, st.info);

  st.width = png_get_image_width(st.png, st.info);
  st.height = png_get_image_height(st.png, st.info);
  st.channels = png_get_channels(st.png, st.info);
  st.bit_depth = png_get_bit_depth(st.png, st.info);
  const std::size_t stride = png_get_rowbytes(st.png, st.info);
  st.pixels.resize(stride * st.height);
  std::vector<png_bytep> rows(st.height);
  for (png_uint_32 y = 0; y < st.height; ++y) {
    rows[y] = st.pixels.data() + y * stride;
  }
  png_read_image(st.png, rows.data());
  png_read_end(st.png, nullptr);
  return true;
}

RawRaster decode_png(const Bytes& data, const std::filesystem::path& path) {
  PngReadState st;
  st.reader = {&data, 0};
  st.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &st.errors,
                                  png_on_error, png_on_warning);
  if (st.png == nullptr) throw std::bad_alloc();
  st.info = png_create_info_struct(st.png);
  if (st.info == nullptr) throw std::bad_alloc();

  if (!png_read_raw(st)) throw corrupt(path, st.errors.message);
  if (st.channels != 1 && st.channels != 3) {
    throw ImageError(ImageError::Kind::kUnsupported,
                     path.string() + ": unsupported PNG channel layout");
  }

  const std::size_t count = std::size_t(st.width) * st.height * st.channels;
  RawRaster raw{st.width, st.height, st.channels, std::vector<double>(count)};
  if (st.bit_depth == 8) {
    for (std::size_t k = 0; k < count; ++k) raw.samples[k] = st.pixels[k];
  } else {
    for (std::size_t k = 0; k < count; ++k) {
      const unsigned v = (st.pixels[2 * k] << 8) | st.pixels[2 * k + 1];
      raw.samples[k] = v * (255.0 / 65535.0);
    }
  }
  return raw;
}

struct PngWriteState {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* file = nullptr;
  PngErrorSink errors;

  ~PngWriteState() {
    png_destroy_write_struct(&png, &info);
    if (file != nullptr) std::fclose(file);
  }
};

bool png_write_raw(PngWriteState& st, std::size_t width, std::size_t height,
                   int channels, std::vector<std::uint8_t>& pixels) {
  if (setjmp(png_jmpbuf(st.png))) return false;
  png_init_io(st.png, st.file);
  png_set_IHDR(st.png, st.info, png_uint_32(width), png_uint_32(height), 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(st.png, st.info);
  for (std::size_t y = 0; y < height; ++y) {
    png_write_row(st.png, pixels.data() + y * width * channels);
  }
  png_write_end(st.png, nullptr);
  return true;
}

std::uint8_t to_byte(double v) {
  return std::uint8_t(std::clamp(std::lround(v), 0L, 255L));
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

void write_interleaved(const std::filesystem::path& path, std::size_t width,
                       std::size_t height, int channels,
                       std::vector<std::uint8_t> pixels) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    PngWriteState st;
    st.file = std::fopen(path.string().c_str(), "wb");
    if (st.file == nullptr) {
      throw ImageError(ImageError::Kind::kUnreadable,
                       path.string() + ": cannot open for writing");
    }
    st.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &st.errors,
                                     png_on_error, png_on_warning);
    if (st.png == nullptr) throw std::bad_alloc();
    st.info = png_create_info_struct(st.png);
    if (st.info == nullptr) throw std::bad_alloc();
    if (!png_write_raw(st, width, height, channels, pixels)) {
      throw ImageError(ImageError::Kind::kCorrupt,
                       path.string() + ": PNG encode failed: " +
                           st.errors.message);
    }
    return;
  }
  const bool pgm = ext == ".pgm";
  const bool ppm = ext == ".ppm";
  if (!pgm && !ppm) {
    throw ImageError(ImageError::Kind::kUnsupported,
                     path.string() + ": unsupported output format '" + ext +
                         "'");
  }
  if ((pgm && channels != 1) || (ppm && channels != 3)) {
    throw ImageError(ImageError::Kind::kUnsupported,
                     path.string() + ": channel count does not match format");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ImageError(ImageError::Kind::kUnreadable,
                     path.string() + ": cannot open for writing");
  }
  out << (pgm ? "P5" : "P6") << '\n'
      << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()),
            std::streamsize(pixels.size()));
  if (!out) {
    throw ImageError(ImageError::Kind::kUnreadable,
                     path.string() + ": write failed");
  }
}

}  // namespace

DecodedImage decode_image(const std::filesystem::path& path) {
  const Bytes data = read_file(path);
  static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P',  'N',  'G',
                                                0x0D, 0x0A, 0x1A, 0x0A};
  if (data.size() >= 8 && std::equal(kPngMagic, kPngMagic + 8, data.begin())) {
    return to_decoded(decode_png(data, path));
  }
  if (data.size() >= 2 && data[0] == 'P' && (data[1] == '5' || data[1] == '6')) {
    return to_decoded(decode_pnm(data, path));
  }
  if (data.empty()) throw corrupt(path, "empty file");
  throw ImageError(ImageError::Kind::kUnsupported,
                   path.string() + ": unsupported image format");
}

ImagePlane as_gray(const DecodedImage& img) {
  if (const auto* plane = std::get_if<ImagePlane>(&img)) return *plane;
  return rgb_to_gray(std::get<ColorImage>(img));
}

ColorImage as_color(const DecodedImage& img) {
  if (const auto* color = std::get_if<ColorImage>(&img)) return *color;
  return ColorImage::from_gray(std::get<ImagePlane>(img));
}

void write_image(const std::filesystem::path& path, const ImagePlane& img) {
  std::vector<std::uint8_t> px(img.size());
  std::transform(img.samples().begin(), img.samples().end(), px.begin(),
                 to_byte);
  write_interleaved(path, img.width(), img.height(), 1, std::move(px));
}

void write_image(const std::filesystem::path& path, const ColorImage& img) {
  const std::size_t n = img.r.size();
  std::vector<std::uint8_t> px(3 * n);
  for (std::size_t k = 0; k < n; ++k) {
    px[3 * k] = to_byte(img.r.samples()[k]);
    px[3 * k + 1] = to_byte(img.g.samples()[k]);
    px[3 * k + 2] = to_byte(img.b.samples()[k]);
  }
  write_interleaved(path, img.width(), img.height(), 3, std::move(px));
}

}  // namespace haarpsi
