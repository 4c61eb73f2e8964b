#include "mfa/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfa/error.hpp"

namespace mfa {
namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw DomainError("image dimensions must be >= 1, got " + std::to_string(width) + "x" +
                      std::to_string(height));
  }
}

}  // namespace

ImageGrid::ImageGrid(int width, int height, double fill) : width_(width), height_(height) {
  check_dims(width, height);
  if (!std::isfinite(fill)) throw DomainError("image fill value must be finite");
  samples_.assign(static_cast<std::size_t>(width) * height, fill);
}

ImageGrid::ImageGrid(int width, int height, std::vector<double> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  check_dims(width, height);
  if (samples_.size() != static_cast<std::size_t>(width) * height) {
    throw DomainError("sample count " + std::to_string(samples_.size()) + " does not match " +
                      std::to_string(width) + "x" + std::to_string(height));
  }
  if (!all_finite()) throw DomainError("image samples must be finite");
}

bool ImageGrid::contains(const Rect& r) const noexcept {
  return r.row >= 0 && r.col >= 0 && r.height >= 0 && r.width >= 0 &&
         r.row + r.height <= height_ && r.col + r.width <= width_;
}

bool ImageGrid::all_finite() const noexcept {
  return std::all_of(samples_.begin(), samples_.end(), [](double v) { return std::isfinite(v); });
}

double ImageGrid::min() const noexcept { return *std::min_element(samples_.begin(), samples_.end()); }
double ImageGrid::max() const noexcept { return *std::max_element(samples_.begin(), samples_.end()); }

double ImageGrid::sum() const noexcept {
  double s = 0.0;
  for (double v : samples_) s += v;
  return s;
}

void require_same_shape(const ImageGrid& a, const ImageGrid& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DomainError(std::string(what) + ": dimension mismatch (" + std::to_string(a.width()) +
                      "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                      std::to_string(b.height()) + ")");
  }
}

ImageGrid scale_intensity(const ImageGrid& img, double k) {
  if (!std::isfinite(k)) throw DomainError("scale_intensity: factor must be finite");
  ImageGrid out = img;
  for (double& v : out.samples()) v *= k;
  return out;
}

ImageGrid subtract(const ImageGrid& a, const ImageGrid& b) {
  return add_scaled(a, -1.0, b);
}

ImageGrid add_scaled(const ImageGrid& a, double s, const ImageGrid& b) {
  require_same_shape(a, b, "add_scaled");
  ImageGrid out = a;
  auto o = out.samples();
  auto bs = b.samples();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += s * bs[i];
  return out;
}

double dot(const ImageGrid& a, const ImageGrid& b) {
  require_same_shape(a, b, "dot");
  double acc = 0.0;
  auto as = a.samples();
  auto bs = b.samples();
  for (std::size_t i = 0; i < as.size(); ++i) acc += as[i] * bs[i];
  return acc;
}

ImageGrid crop(const ImageGrid& img, const Rect& r) {
  if (!img.contains(r) || r.pixel_count() == 0) throw DomainError("crop: rectangle outside image");
  ImageGrid out(r.width, r.height);
  for (int i = 0; i < r.height; ++i)
    for (int j = 0; j < r.width; ++j) out(i, j) = img(r.row + i, r.col + j);
  return out;
}

double region_variance(const ImageGrid& img, const Rect& r) {
  if (!img.contains(r) || r.pixel_count() < 2)
    throw DomainError("region_variance: rectangle outside image or smaller than 2 pixels");
  double mean = 0.0;
  for (int i = 0; i < r.height; ++i)
    for (int j = 0; j < r.width; ++j) mean += img(r.row + i, r.col + j);
  mean /= r.pixel_count();
  double ss = 0.0;
  for (int i = 0; i < r.height; ++i)
    for (int j = 0; j < r.width; ++j) {
      const double d = img(r.row + i, r.col + j) - mean;
      ss += d * d;
    }
  return ss / (r.pixel_count() - 1);
}

}  // namespace mfa
