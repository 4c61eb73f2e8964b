#pragma once

#include <string>
#include <vector>

#include "mfa/image.hpp"
#include "mfa/noise_model.hpp"

namespace mfa {

/// sqrt(mean((a - b)^2)). Throws DomainError on shape mismatch.
double rmse(const ImageGrid& a, const ImageGrid& b);

/// 20 log10(peak / rmse(a, ref)); +infinity when the images are identical.
double psnr(const ImageGrid& a, const ImageGrid& ref, double peak);

/// psnr with the reference maximum as peak.
double psnr(const ImageGrid& a, const ImageGrid& ref);

/// Noise variance of a flood acquisition inside `region`.
///
/// A least-squares plane is removed first so slow non-uniformity of the flood
/// does not count as noise; the residual variance uses n - 3 degrees of
/// freedom. measured_at_scale is the region mean (1 when that mean is not positive).
/// Throws DomainError if the region leaves the image or has fewer than 16 pixels.
NoiseModel estimate_noise_variance(const ImageGrid& flood, const Rect& region);

struct MetricRow {
  std::string name;
  double value;
};

/// "metric,value" header plus one row per metric.
std::string format_metrics_csv(const std::vector<MetricRow>& rows);

}  // namespace mfa
