#pragma once

#include <vector>

#include "mfa/image.hpp"

namespace mfa {

/// How samples outside the image are synthesized.
enum class Boundary {
  /// Mirror without repeating the edge pixel: x[-1] = x[1], x[n] = x[n-2].
  Reflect,
  /// Clamp to the nearest edge pixel.
  Replicate,
  /// Outside samples are 0.
  Zero,
};

/// Square (2r+1)x(2r+1) filter, center-indexed, row-major weights.
class Kernel {
 public:
  /// Throws DomainError if radius < 0, weights.size() != (2r+1)^2, or any weight is non-finite.
  Kernel(int radius, std::vector<double> weights);

  /// 1x1 kernel with weight 1.
  static Kernel identity();

  int radius() const noexcept { return radius_; }
  int side() const noexcept { return 2 * radius_ + 1; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// Weight at offset (du, dv) from the center; both in [-radius, radius].
  double at(int du, int dv) const noexcept {
    return weights_[static_cast<std::size_t>(du + radius_) * side() + (dv + radius_)];
  }

  double sum() const noexcept;
  double energy() const noexcept;  // sum of squared weights

  bool operator==(const Kernel&) const = default;

 private:
  int radius_;
  std::vector<double> weights_;
};

/// Kernel rotated by 180 degrees; flip(flip(k)) == k.
Kernel flip(const Kernel& k);

/// Maps a possibly out-of-range index onto [0, n) under `b`; returns -1 for Zero outside.
int resolve_index(int i, int n, Boundary b) noexcept;

/// out(i, j) = sum_{u,v} k(u, v) * img(i - u, j - v).
ImageGrid convolve2d(const ImageGrid& img, const Kernel& k, Boundary b = Boundary::Reflect);

/// out(i, j) = sum_{u,v} k(u, v) * img(i + u, j + v).
ImageGrid correlate2d(const ImageGrid& img, const Kernel& k, Boundary b = Boundary::Reflect);

/// Exact adjoint of convolve2d(., k, b): <convolve2d(x), y> == <x, convolve2d_adjoint(y)>
/// for every boundary policy. With Boundary::Zero this equals convolve2d(y, flip(k), Zero);
/// with Reflect/Replicate the out-of-range taps are folded back onto the pixels they read.
ImageGrid convolve2d_adjoint(const ImageGrid& y, const Kernel& k, Boundary b = Boundary::Reflect);

}  // namespace mfa
