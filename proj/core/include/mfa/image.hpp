#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mfa {

/// Axis-aligned pixel rectangle, (row, col) of its top-left corner plus extent.
struct Rect {
  int row = 0;
  int col = 0;
  int height = 0;
  int width = 0;

  int pixel_count() const noexcept { return height * width; }
  bool operator==(const Rect&) const = default;
};

/// Dense 2D raster of doubles.
///
/// Row-major with a top-left origin; every accessor takes (row, col). All
/// library operations return fresh grids and never touch their inputs.
class ImageGrid {
 public:
  /// Constant-filled grid. Throws DomainError unless width, height >= 1.
  ImageGrid(int width, int height, double fill = 0.0);

  /// Takes ownership of `samples`. Throws DomainError when
  /// samples.size() != width * height or any sample is non-finite.
  ImageGrid(int width, int height, std::vector<double> samples);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return samples_.size(); }

  double operator()(int row, int col) const noexcept {
    return samples_[static_cast<std::size_t>(row) * width_ + col];
  }
  double& operator()(int row, int col) noexcept {
    return samples_[static_cast<std::size_t>(row) * width_ + col];
  }

  std::span<const double> samples() const noexcept { return samples_; }
  std::span<double> samples() noexcept { return samples_; }

  bool same_shape(const ImageGrid& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }
  bool contains(const Rect& r) const noexcept;
  bool all_finite() const noexcept;

  double min() const noexcept;
  double max() const noexcept;
  double sum() const noexcept;
  double mean() const noexcept { return sum() / static_cast<double>(size()); }

  bool operator==(const ImageGrid&) const = default;

 private:
  int width_;
  int height_;
  std::vector<double> samples_;
};

/// Every sample multiplied by k.
ImageGrid scale_intensity(const ImageGrid& img, double k);

/// Elementwise a - b. Throws DomainError on shape mismatch.
ImageGrid subtract(const ImageGrid& a, const ImageGrid& b);

/// a + s * b (axpy). Throws DomainError on shape mismatch.
ImageGrid add_scaled(const ImageGrid& a, double s, const ImageGrid& b);

/// Sum of elementwise products.
double dot(const ImageGrid& a, const ImageGrid& b);

/// Copy of the pixels inside `r`.
ImageGrid crop(const ImageGrid& img, const Rect& r);

/// Unbiased sample variance of the pixels inside `r`.
double region_variance(const ImageGrid& img, const Rect& r);

void require_same_shape(const ImageGrid& a, const ImageGrid& b, const char* what);

}  // namespace mfa
