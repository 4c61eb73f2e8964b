#include "mfa/baseline.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <string>

#include "mfa/error.hpp"

namespace mfa {
namespace {

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> fftw_alloc(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (!p) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

struct PlanDeleter {
  void operator()(fftw_plan p) const { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter>;

}  // namespace

const Kernel& sharpen_kernel() {
  static const Kernel k(1, {-0.167, -0.67, -0.167,
                            -0.67, 4.33, -0.67,
                            -0.167, -0.67, -0.167});
  return k;
}

ImageGrid sharpen(const ImageGrid& img, int passes) {
  if (passes < 1) throw DomainError("sharpen: passes must be >= 1");
  ImageGrid out = img;
  for (int p = 0; p < passes; ++p) out = convolve2d(out, sharpen_kernel(), Boundary::Reflect);
  return out;
}

ImageGrid wiener(const ImageGrid& g, const Psf& psf, const NoiseModel& noise, const WienerOptions& opts) {
  if (opts.signal_power && !(*opts.signal_power > 0.0))
    throw DomainError("wiener: explicit signal power must be > 0");
  const int r = psf.kernel().radius();
  const int ph = next_pow2(g.height() + 2 * r);
  const int pw = next_pow2(g.width() + 2 * r);
  const int top = (ph - g.height()) / 2;
  const int left = (pw - g.width()) / 2;
  const std::size_t total = static_cast<std::size_t>(ph) * pw;
  const int cw = pw / 2 + 1;
  const std::size_t spectrum = static_cast<std::size_t>(ph) * cw;

  auto image = fftw_alloc<double>(total);
  auto kernel = fftw_alloc<double>(total);
  auto image_hat = fftw_alloc<fftw_complex>(spectrum);
  auto kernel_hat = fftw_alloc<fftw_complex>(spectrum);

  // FFTW_ESTIMATE leaves the inputs untouched during planning and picks the same
  // algorithm every run, which keeps the output reproducible.
  const Plan fwd_image(fftw_plan_dft_r2c_2d(ph, pw, image.get(), image_hat.get(), FFTW_ESTIMATE));
  const Plan fwd_kernel(fftw_plan_dft_r2c_2d(ph, pw, kernel.get(), kernel_hat.get(), FFTW_ESTIMATE));
  const Plan inverse(fftw_plan_dft_c2r_2d(ph, pw, image_hat.get(), image.get(), FFTW_ESTIMATE));

  for (int i = 0; i < ph; ++i)
    for (int j = 0; j < pw; ++j)
      image[static_cast<std::size_t>(i) * pw + j] = g(resolve_index(i - top, g.height(), Boundary::Reflect),
                                                      resolve_index(j - left, g.width(), Boundary::Reflect));
  std::fill(kernel.get(), kernel.get() + total, 0.0);
  for (int du = -r; du <= r; ++du)
    for (int dv = -r; dv <= r; ++dv) {
      const int i = (du + ph) % ph;
      const int j = (dv + pw) % pw;
      kernel[static_cast<std::size_t>(i) * pw + j] += psf.kernel().at(du, dv);
    }

  fftw_execute(fwd_image.get());
  fftw_execute(fwd_kernel.get());

  const double var = noise.variance();
  const double m = static_cast<double>(total);
  for (std::size_t k = 0; k < spectrum; ++k) {
    const std::complex<double> gk(image_hat[k][0], image_hat[k][1]);
    const std::complex<double> hk(kernel_hat[k][0], kernel_hat[k][1]);
    double ratio = 0.0;
    if (var > 0.0) {
      const double s = opts.signal_power ? *opts.signal_power : std::max(std::norm(gk) / m, var);
      ratio = var / s;
    }
    const double denom = std::norm(hk) + ratio;
    const std::complex<double> fk = denom > 0.0 ? std::conj(hk) * gk / denom : std::complex<double>(0.0, 0.0);
    image_hat[k][0] = fk.real();
    image_hat[k][1] = fk.imag();
  }
  fftw_execute(inverse.get());

  ImageGrid out(g.width(), g.height());
  for (int i = 0; i < g.height(); ++i)
    for (int j = 0; j < g.width(); ++j)
      out(i, j) = image[static_cast<std::size_t>(i + top) * pw + (j + left)] / m;
  return out;
}

ImageGrid sobel(const ImageGrid& img) {
  if (img.width() < 3 || img.height() < 3) throw DomainError("sobel: image must be at least 3x3");
  static const Kernel gx(1, {-1, 0, 1, -2, 0, 2, -1, 0, 1});
  static const Kernel gy(1, {-1, -2, -1, 0, 0, 0, 1, 2, 1});
  const ImageGrid dx = correlate2d(img, gx, Boundary::Reflect);
  const ImageGrid dy = correlate2d(img, gy, Boundary::Reflect);
  ImageGrid out(img.width(), img.height());
  auto o = out.samples();
  auto a = dx.samples(), b = dy.samples();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::hypot(a[i], b[i]);
  return out;
}

}  // namespace mfa
