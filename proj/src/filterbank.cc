#include "haarpsi/filterbank.h"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace haarpsi {
namespace {

// Decomposition filters (Lo_D / Hi_D in the usual wavelet toolbox naming).
// For CDF only the nonzero taps of the 9/7 analysis pair are kept.
std::array<Wavelet1D, 6> make_wavelets() {
  const double s = 1.0 / std::sqrt(2.0);
  return {{
      {WaveletId::kHaar, {s, s}, {-s, s}},
      {WaveletId::kDaub2,
       {-0.12940952255126037, 0.2241438680420134, 0.8365163037378079,
        0.48296291314453416},
       {-0.48296291314453416, 0.8365163037378079, -0.2241438680420134,
        -0.12940952255126037}},
      {WaveletId::kDaub4,
       {-0.010597401785069032, 0.0328830116668852, 0.030841381835560764,
        -0.18703481171909309, -0.027983769416859854, 0.6308807679298589,
        0.7148465705529157, 0.2303778133088965},
       {-0.2303778133088965, 0.7148465705529157, -0.6308807679298589,
        -0.027983769416859854, 0.18703481171909309, 0.030841381835560764,
        -0.0328830116668852, -0.010597401785069032}},
      {WaveletId::kSym4,
       {-0.07576571478927333, -0.02963552764599851, 0.49761866763201545,
        0.8037387518059161, 0.29785779560527736, -0.09921954357684722,
        -0.012603967262037833, 0.0322231006040427},
       {-0.0322231006040427, -0.012603967262037833, 0.09921954357684722,
        0.29785779560527736, -0.8037387518059161, 0.49761866763201545,
        0.02963552764599851, -0.07576571478927333}},
      {WaveletId::kCoif1,
       {-0.015655728135791993, -0.07273261951252645, 0.3848648468648578,
        0.8525720202116004, 0.3378976624574818, -0.07273261951252645},
       {0.07273261951252645, 0.3378976624574818, -0.8525720202116004,
        0.3848648468648578, 0.07273261951252645, -0.015655728135791993}},
      {WaveletId::kCdf,
       {0.03782845550726404, -0.023849465019556843, -0.11062440441843718,
        0.37740285561283066, 0.8526986790088938, 0.37740285561283066,
        -0.11062440441843718, -0.023849465019556843, 0.03782845550726404},
       {-0.06453888262869706, 0.04068941760916406, 0.41809227322161724,
        -0.7884856164055829, 0.41809227322161724, 0.04068941760916406,
        -0.06453888262869706}},
  }};
}

constexpr std::array<std::string_view, 6> kNames = {
    "haar", "daub2", "daub4", "sym4", "coif1", "cdf"};

std::vector<double> convolve_full(const std::vector<double>& a,
                                  const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) out[i + k] += a[i] * b[k];
  }
  return out;
}

std::vector<double> upsample2(const std::vector<double>& x) {
  std::vector<double> out(2 * x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) out[2 * i] = x[i];
  return out;
}

void trim_trailing_zeros(std::vector<double>& x) {
  while (x.size() > 1 && x.back() == 0.0) x.pop_back();
}

// Maps an out-of-range index into [0, n) by whole-sample mirroring with the
// edge sample repeated: ... 1 0 | 0 1 ... n-1 | n-1 n-2 ...
std::ptrdiff_t mirror(std::ptrdiff_t i, std::ptrdiff_t n) {
  const std::ptrdiff_t period = 2 * n;
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

// 1D same-size convolution along rows (stride 1) or columns (stride width).
void convolve_axis(const double* in, double* out, std::size_t length,
                   std::size_t stride, const std::vector<double>& taps,
                   Boundary boundary) {
  const auto n = static_cast<std::ptrdiff_t>(length);
  const auto center = static_cast<std::ptrdiff_t>(taps.size() / 2);
  for (std::ptrdiff_t x = 0; x < n; ++x) {
    double acc = 0.0;
    for (std::size_t v = 0; v < taps.size(); ++v) {
      std::ptrdiff_t src = x - static_cast<std::ptrdiff_t>(v) + center;
      if (src < 0 || src >= n) {
        if (boundary == Boundary::kZero) continue;
        src = mirror(src, n);
      }
      acc += taps[v] * in[src * stride];
    }
    out[x * stride] = acc;
  }
}

}  // namespace

const Wavelet1D& wavelet(WaveletId id) {
  static const std::array<Wavelet1D, 6> kWavelets = make_wavelets();
  return kWavelets[static_cast<std::size_t>(id)];
}

std::string_view to_string(WaveletId id) {
  return kNames[static_cast<std::size_t>(id)];
}

std::optional<WaveletId> parse_wavelet(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<WaveletId>(i);
  }
  return std::nullopt;
}

std::vector<WaveletId> all_wavelets() {
  return {WaveletId::kHaar, WaveletId::kDaub2, WaveletId::kDaub4,
          WaveletId::kSym4, WaveletId::kCoif1, WaveletId::kCdf};
}

Cascade1D cascade_1d(const Wavelet1D& w, int j) {
  if (j < 1) {
    throw std::invalid_argument("cascade_1d: scale must be >= 1, got " +
                                std::to_string(j));
  }
  Cascade1D c{w.h, w.g};
  for (int level = 2; level <= j; ++level) {
    auto up_h = upsample2(c.h);
    auto up_g = upsample2(c.g);
    trim_trailing_zeros(up_h);
    trim_trailing_zeros(up_g);
    c.h = convolve_full(w.h, up_h);
    c.g = convolve_full(w.h, up_g);
  }
  return c;
}

TapGrid::TapGrid(std::size_t rows, std::size_t cols, std::vector<double> taps)
    : rows_(rows), cols_(cols), taps_(std::move(taps)) {
  if (taps_.size() != rows_ * cols_ || taps_.empty()) {
    throw std::invalid_argument("TapGrid: tap count does not match shape");
  }
}

TapGrid TapGrid::outer(const std::vector<double>& column,
                       const std::vector<double>& row) {
  std::vector<double> taps(column.size() * row.size());
  for (std::size_t r = 0; r < column.size(); ++r) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      taps[r * row.size() + c] = column[r] * row[c];
    }
  }
  return TapGrid(column.size(), row.size(), std::move(taps));
}

TapGrid TapGrid::transpose() const {
  std::vector<double> t(taps_.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t[c * rows_ + r] = (*this)(r, c);
  }
  return TapGrid(cols_, rows_, std::move(t));
}

FilterBank2D build_filterbank(const Wavelet1D& w, int scales) {
  if (scales < 1) {
    throw std::invalid_argument("build_filterbank: need at least one scale");
  }
  FilterBank2D bank;
  bank.wavelet = w.id;
  bank.scales = scales;
  for (int j = 1; j <= scales; ++j) {
    Cascade1D c = cascade_1d(w, j);
    bank.horizontal.push_back({c.g, c.h});
    bank.vertical.push_back({c.h, c.g});
  }
  return bank;
}

ImagePlane convolve2d_same(const ImagePlane& img, const TapGrid& filter,
                           Boundary boundary) {
  if (filter.rows() > img.height() || filter.cols() > img.width()) {
    throw DimensionError("convolve2d_same: " + std::to_string(filter.rows()) +
                         "x" + std::to_string(filter.cols()) +
                         " filter exceeds " + std::to_string(img.height()) +
                         "x" + std::to_string(img.width()) + " image");
  }
  const auto h = static_cast<std::ptrdiff_t>(img.height());
  const auto w = static_cast<std::ptrdiff_t>(img.width());
  const auto cr = static_cast<std::ptrdiff_t>(filter.rows() / 2);
  const auto cc = static_cast<std::ptrdiff_t>(filter.cols() / 2);
  ImagePlane out(img.width(), img.height());
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::size_t u = 0; u < filter.rows(); ++u) {
        std::ptrdiff_t sy = y - static_cast<std::ptrdiff_t>(u) + cr;
        if (sy < 0 || sy >= h) {
          if (boundary == Boundary::kZero) continue;
          sy = mirror(sy, h);
        }
        for (std::size_t v = 0; v < filter.cols(); ++v) {
          std::ptrdiff_t sx = x - static_cast<std::ptrdiff_t>(v) + cc;
          if (sx < 0 || sx >= w) {
            if (boundary == Boundary::kZero) continue;
            sx = mirror(sx, w);
          }
          acc += filter(u, v) * img(sy, sx);
        }
      }
      out(y, x) = acc;
    }
  }
  return out;
}

ImagePlane convolve_separable_same(const ImagePlane& img,
                                   const SeparableFilter& filter,
                                   Boundary boundary) {
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  ImagePlane tmp(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    convolve_axis(img.samples().data() + y * w, tmp.samples().data() + y * w,
                  w, 1, filter.row, boundary);
  }
  ImagePlane out(w, h);
  for (std::size_t x = 0; x < w; ++x) {
    convolve_axis(tmp.samples().data() + x, out.samples().data() + x, h, w,
                  filter.column, boundary);
  }
  return out;
}

}  // namespace haarpsi
