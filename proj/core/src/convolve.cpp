#include "mfa/convolve.hpp"

#include <cmath>
#include <string>

#include "mfa/error.hpp"

namespace mfa {
namespace {

// Per-axis lookup: table[i * side + t] = source index for output i and tap t,
// where tap t corresponds to offset (t - r) and `sign` selects i - off or i + off.
std::vector<int> index_table(int n, int r, int sign, Boundary b) {
  const int side = 2 * r + 1;
  std::vector<int> table(static_cast<std::size_t>(n) * side);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < side; ++t) table[static_cast<std::size_t>(i) * side + t] = resolve_index(i + sign * (t - r), n, b);
  return table;
}

ImageGrid filter(const ImageGrid& img, const Kernel& k, Boundary b, int sign) {
  const int h = img.height();
  const int w = img.width();
  const int r = k.radius();
  const int side = k.side();
  const auto rows = index_table(h, r, sign, b);
  const auto cols = index_table(w, r, sign, b);
  const auto& wts = k.weights();
  const auto src = img.samples();

  std::vector<double> out(img.size());
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      double acc = 0.0;
      for (int tu = 0; tu < side; ++tu) {
        const int si = rows[static_cast<std::size_t>(i) * side + tu];
        if (si < 0) continue;
        const double* srow = src.data() + static_cast<std::size_t>(si) * w;
        const double* krow = wts.data() + static_cast<std::size_t>(tu) * side;
        const int* crow = cols.data() + static_cast<std::size_t>(j) * side;
        for (int tv = 0; tv < side; ++tv) {
          const int sj = crow[tv];
          if (sj < 0) continue;
          acc += krow[tv] * srow[sj];
        }
      }
      out[static_cast<std::size_t>(i) * w + j] = acc;
    }
  }
  return ImageGrid(w, h, std::move(out));
}

}  // namespace

Kernel::Kernel(int radius, std::vector<double> weights) : radius_(radius), weights_(std::move(weights)) {
  if (radius < 0) throw DomainError("kernel radius must be >= 0");
  const auto side = static_cast<std::size_t>(2 * radius + 1);
  if (weights_.size() != side * side)
    throw DomainError("kernel of radius " + std::to_string(radius) + " needs " + std::to_string(side * side) +
                      " weights, got " + std::to_string(weights_.size()));
  for (double v : weights_)
    if (!std::isfinite(v)) throw DomainError("kernel weights must be finite");
}

Kernel Kernel::identity() { return Kernel(0, {1.0}); }

double Kernel::sum() const noexcept {
  double s = 0.0;
  for (double v : weights_) s += v;
  return s;
}

double Kernel::energy() const noexcept {
  double s = 0.0;
  for (double v : weights_) s += v * v;
  return s;
}

Kernel flip(const Kernel& k) {
  std::vector<double> w(k.weights().rbegin(), k.weights().rend());
  return Kernel(k.radius(), std::move(w));
}

int resolve_index(int i, int n, Boundary b) noexcept {
  if (i >= 0 && i < n) return i;
  switch (b) {
    case Boundary::Zero:
      return -1;
    case Boundary::Replicate:
      return i < 0 ? 0 : n - 1;
    case Boundary::Reflect: {
      if (n == 1) return 0;
      const int period = 2 * (n - 1);
      int m = i % period;
      if (m < 0) m += period;
      return m < n ? m : period - m;
    }
  }
  return -1;
}

ImageGrid convolve2d(const ImageGrid& img, const Kernel& k, Boundary b) { return filter(img, k, b, -1); }

ImageGrid correlate2d(const ImageGrid& img, const Kernel& k, Boundary b) { return filter(img, k, b, +1); }

ImageGrid convolve2d_adjoint(const ImageGrid& y, const Kernel& k, Boundary b) {
  if (b == Boundary::Zero) return correlate2d(y, k, Boundary::Zero);

  const int h = y.height();
  const int w = y.width();
  const int r = k.radius();
  const int side = k.side();
  const auto rows = index_table(h, r, -1, b);
  const auto cols = index_table(w, r, -1, b);
  const auto& wts = k.weights();
  const auto ys = y.samples();

  // Scatter each output sample back along the taps that produced it. The
  // visiting order is fixed, so the result is reproducible bit for bit.
  std::vector<double> out(y.size(), 0.0);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const double v = ys[static_cast<std::size_t>(i) * w + j];
      for (int tu = 0; tu < side; ++tu) {
        const int si = rows[static_cast<std::size_t>(i) * side + tu];
        double* orow = out.data() + static_cast<std::size_t>(si) * w;
        const double* krow = wts.data() + static_cast<std::size_t>(tu) * side;
        const int* crow = cols.data() + static_cast<std::size_t>(j) * side;
        for (int tv = 0; tv < side; ++tv) orow[crow[tv]] += krow[tv] * v;
      }
    }
  }
  return ImageGrid(w, h, std::move(out));
}

}  // namespace mfa
