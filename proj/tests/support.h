// Shared helpers for the unit and acceptance tests.
#ifndef HAARPSI_TESTS_SUPPORT_H_
#define HAARPSI_TESTS_SUPPORT_H_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "haarpsi/harness.h"
#include "haarpsi/image.h"
#include "haarpsi/image_io.h"
#include "haarpsi/metric.h"
#include "oracle.h"

namespace testing_support {

using haarpsi::ColorImage;
using haarpsi::ImagePlane;

inline ImagePlane random_plane(std::size_t w, std::size_t h,
                               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 255.0);
  std::vector<double> s(w * h);
  for (double& v : s) v = u(rng);
  return ImagePlane(w, h, std::move(s));
}

inline ColorImage random_color(std::size_t w, std::size_t h,
                               std::mt19937_64& rng) {
  return ColorImage(random_plane(w, h, rng), random_plane(w, h, rng),
                    random_plane(w, h, rng));
}

// A smooth random image: sum of a few random sinusoids plus mild noise, so
// the weights are far from degenerate.
inline ImagePlane textured_plane(std::size_t w, std::size_t h,
                                 std::mt19937_64& rng) {
  std::uniform_real_distribution<double> freq(0.05, 0.6), phase(0.0, 6.283),
      amp(10.0, 50.0), noise(-8.0, 8.0);
  double fx[3], fy[3], ph[3], am[3];
  for (int i = 0; i < 3; ++i) {
    fx[i] = freq(rng);
    fy[i] = freq(rng);
    ph[i] = phase(rng);
    am[i] = amp(rng);
  }
  ImagePlane p(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double v = 128.0;
      for (int i = 0; i < 3; ++i)
        v += am[i] * std::sin(fx[i] * double(x) + fy[i] * double(y) + ph[i]);
      p(y, x) = std::clamp(v + noise(rng), 0.0, 255.0);
    }
  return p;
}

inline oracle::Grid to_grid(const ImagePlane& p) {
  oracle::Grid g(p.height(), std::vector<double>(p.width()));
  for (std::size_t y = 0; y < p.height(); ++y)
    for (std::size_t x = 0; x < p.width(); ++x) g[y][x] = p(y, x);
  return g;
}

inline oracle::Rgb to_rgb(const ColorImage& c) {
  return {to_grid(c.r), to_grid(c.g), to_grid(c.b)};
}

inline ImagePlane add_gaussian_noise(const ImagePlane& p, double sigma,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  ImagePlane out = p;
  for (double& v : out.samples()) v += n(rng);
  return out;
}

// Box blur with a width x width kernel, edge samples replicated.
inline ImagePlane box_blur(const ImagePlane& p, int width) {
  const long w = long(p.width()), h = long(p.height());
  const long lo = -(width - 1) / 2, hi = lo + width - 1;
  auto at = [&](long y, long x) {
    return p(std::size_t(std::clamp(y, 0L, h - 1)),
             std::size_t(std::clamp(x, 0L, w - 1)));
  };
  ImagePlane out(p.width(), p.height());
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x) {
      double s = 0.0;
      for (long dy = lo; dy <= hi; ++dy)
        for (long dx = lo; dx <= hi; ++dx) s += at(y + dy, x + dx);
      out(std::size_t(y), std::size_t(x)) = s / double(width * width);
    }
  return out;
}

// Smooth concave objective whose maximum sits at (30, 4.2).
inline double peak_objective(double c, double alpha) {
  const double dc = (c - 30.0) / 50.0, da = (alpha - 4.2) / 3.0;
  return 1.0 - dc * dc - da * da;
}

inline std::filesystem::path data_dir() { return HAARPSI_TEST_DATA_DIR; }

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("haarpsi_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Writes `count` distorted color images (noise or blur of a few textured
// references) under dir/<database>/ and returns their manifest rows. The
// MOS of each row is a strictly increasing function of its default-parameter
// HaarPSIC score, or random when `random_mos` is set.
inline std::vector<haarpsi::ManifestEntry> synthetic_database(
    const std::filesystem::path& dir, const std::string& database,
    int count, std::uint64_t seed, bool random_mos = false) {
  std::mt19937_64 rng(seed);
  const auto sub = dir / database;
  std::filesystem::create_directories(sub);
  std::vector<ColorImage> refs;
  for (int r = 0; r < 3; ++r) {
    ColorImage c(textured_plane(24, 24, rng), textured_plane(24, 24, rng),
                 textured_plane(24, 24, rng));
    haarpsi::write_image(sub / ("ref" + std::to_string(r) + ".ppm"), c);
    refs.push_back(haarpsi::as_color(
        haarpsi::decode_image(sub / ("ref" + std::to_string(r) + ".ppm"))));
  }
  std::uniform_real_distribution<double> sigma(2.0, 40.0), u(0.0, 100.0);
  std::vector<haarpsi::ManifestEntry> entries;
  for (int k = 0; k < count; ++k) {
    const int r = k % 3;
    const bool noise = k % 2 == 0;
    const double level = sigma(rng);
    auto distort = [&](const ImagePlane& p, std::uint64_t s) {
      return noise ? add_gaussian_noise(p, level, s)
                   : box_blur(p, 2 + int(level) % 5);
    };
    ColorImage d(distort(refs[r].r, seed * 1000 + 3 * k),
                 distort(refs[r].g, seed * 1000 + 3 * k + 1),
                 distort(refs[r].b, seed * 1000 + 3 * k + 2));
    const auto name = "d" + std::to_string(k) + ".ppm";
    haarpsi::write_image(sub / name, d);
    d = haarpsi::as_color(haarpsi::decode_image(sub / name));
    const double score = haarpsi::haarpsi_color(refs[r], d).score;
    entries.push_back({(sub / ("ref" + std::to_string(r) + ".ppm")).string(),
                       (sub / name).string(),
                       random_mos ? u(rng) : 1.0 + 9.0 * score * score,
                       database, noise ? "noise" : "blur"});
  }
  return entries;
}

inline void write_manifest(const std::filesystem::path& path,
                           const std::vector<haarpsi::ManifestEntry>& entries) {
  std::ofstream out(path);
  out.precision(17);
  out << "reference_path,distorted_path,mos,database,distortion\n";
  for (const auto& e : entries) {
    out << e.reference_path << ',' << e.distorted_path << ',' << e.mos << ','
        << e.database << ',' << e.distortion << '\n';
  }
}

}  // namespace testing_support

#endif  // HAARPSI_TESTS_SUPPORT_H_
