#pragma once

#include <optional>

#include "mfa/convolve.hpp"
#include "mfa/image.hpp"
#include "mfa/noise_model.hpp"
#include "mfa/psf.hpp"

namespace mfa {

/// The 3x3 sharpening kernel
///   -0.167 -0.67  -0.167
///   -0.67   4.33  -0.67
///   -0.167 -0.67  -0.167
/// Entries are used as printed; the kernel sums to 0.982, not 1.
const Kernel& sharpen_kernel();

/// Applies the sharpening kernel `passes` times with reflect boundary. Throws DomainError if passes < 1.
ImageGrid sharpen(const ImageGrid& img, int passes = 1);

struct WienerOptions {
  /// Constant signal power per pixel. When empty, the power at each frequency
  /// is estimated as max(|G|^2 / M, sigma^2) with M the padded pixel count.
  std::optional<double> signal_power;
};

/// Frequency-domain Wiener deconvolution F = conj(H) G / (|H|^2 + sigma^2 / S).
///
/// The image is reflect-padded by at least the PSF radius on every side up to
/// the next power of two in each axis, filtered, and cropped back.
ImageGrid wiener(const ImageGrid& g, const Psf& psf, const NoiseModel& noise, const WienerOptions& opts = {});

/// Gradient magnitude sqrt(Gx^2 + Gy^2) from the 3x3 Sobel stencils, reflect boundary.
/// Throws DomainError below 3x3.
ImageGrid sobel(const ImageGrid& img);

}  // namespace mfa
