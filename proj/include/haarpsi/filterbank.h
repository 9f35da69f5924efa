#ifndef HAARPSI_FILTERBANK_H_
#define HAARPSI_FILTERBANK_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "haarpsi/image.h"

namespace haarpsi {

enum class WaveletId { kHaar, kDaub2, kDaub4, kSym4, kCoif1, kCdf };

// Low-pass (scaling) and high-pass (wavelet) decomposition filters.
struct Wavelet1D {
  WaveletId id;
  std::vector<double> h;
  std::vector<double> g;

  // Everything except the biorthogonal CDF 9/7 pair.
  bool orthogonal() const { return id != WaveletId::kCdf; }
};

const Wavelet1D& wavelet(WaveletId id);
std::string_view to_string(WaveletId id);
// Accepts "haar", "daub2", "daub4", "sym4", "coif1", "cdf".
std::optional<WaveletId> parse_wavelet(std::string_view name);
std::vector<WaveletId> all_wavelets();

struct Cascade1D {
  std::vector<double> h;
  std::vector<double> g;
};

// Scale-j filters: h_1 = h, g_1 = g and for j > 1
//   g_j = h_1 * up2(g_{j-1}),  h_j = h_1 * up2(h_{j-1}),
// where up2 interleaves zeros and trailing zero taps are trimmed.
// Throws std::invalid_argument for j < 1.
Cascade1D cascade_1d(const Wavelet1D& w, int j);

// Dense 2D tap grid, row-major.
class TapGrid {
 public:
  TapGrid() = default;
  TapGrid(std::size_t rows, std::size_t cols, std::vector<double> taps);

  static TapGrid outer(const std::vector<double>& column,
                       const std::vector<double>& row);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const {
    return taps_[r * cols_ + c];
  }
  const std::vector<double>& taps() const { return taps_; }
  TapGrid transpose() const;

  friend bool operator==(const TapGrid&, const TapGrid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> taps_;
};

// Rank-one 2D filter outer(column, row): `column` runs down the rows and
// `row` runs across the columns.
struct SeparableFilter {
  std::vector<double> column;
  std::vector<double> row;

  TapGrid grid() const { return TapGrid::outer(column, row); }
};

// horizontal[j-1] = g_j (x) h_j responds to horizontal structures,
// vertical[j-1] = h_j (x) g_j to vertical ones.
struct FilterBank2D {
  WaveletId wavelet = WaveletId::kHaar;
  int scales = 0;
  std::vector<SeparableFilter> horizontal;
  std::vector<SeparableFilter> vertical;

  // 0-based orientation index: 0 horizontal, 1 vertical.
  const SeparableFilter& filter(int orientation, int scale) const {
    return orientation == 0 ? horizontal[scale - 1] : vertical[scale - 1];
  }
};

FilterBank2D build_filterbank(const Wavelet1D& w, int scales);

enum class Boundary { kZero, kSymmetric };

// Same-size true convolution (the filter is flipped). The filter center sits
// at index floor(size / 2) along each axis, which is the geometric center for
// odd sizes. Out-of-range samples are zero or mirrored (whole-sample
// symmetric, edge repeated) depending on `boundary`. Throws DimensionError if
// the filter is larger than the image in either dimension.
ImagePlane convolve2d_same(const ImagePlane& img, const TapGrid& filter,
                           Boundary boundary = Boundary::kZero);

// Same result as convolve2d_same on filter.grid(), computed as two 1D passes.
// Filters larger than the image are allowed.
ImagePlane convolve_separable_same(const ImagePlane& img,
                                   const SeparableFilter& filter,
                                   Boundary boundary = Boundary::kZero);

}  // namespace haarpsi

#endif  // HAARPSI_FILTERBANK_H_
