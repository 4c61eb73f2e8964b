#include "mfa/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mfa/error.hpp"
#include "mfa/text_format.hpp"

namespace mfa {

double rmse(const ImageGrid& a, const ImageGrid& b) {
  require_same_shape(a, b, "rmse");
  double ss = 0.0;
  auto as = a.samples();
  auto bs = b.samples();
  for (std::size_t i = 0; i < as.size(); ++i) {
    const double d = as[i] - bs[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(as.size()));
}

double psnr(const ImageGrid& a, const ImageGrid& ref, double peak) {
  if (!(peak > 0.0)) throw DomainError("psnr: peak must be > 0");
  const double e = rmse(a, ref);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(peak / e);
}

double psnr(const ImageGrid& a, const ImageGrid& ref) { return psnr(a, ref, ref.max()); }

NoiseModel estimate_noise_variance(const ImageGrid& flood, const Rect& region) {
  if (!flood.contains(region)) throw DomainError("estimate_noise_variance: region outside image");
  const int n = region.pixel_count();
  if (n < 16) throw DomainError("estimate_noise_variance: region needs at least 16 pixels");

  // Plane v = c0 + c1 * row + c2 * col, coordinates centered for conditioning.
  const double rc = region.row + 0.5 * (region.height - 1);
  const double cc = region.col + 0.5 * (region.width - 1);
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd values(n);
  int k = 0;
  for (int i = region.row; i < region.row + region.height; ++i)
    for (int j = region.col; j < region.col + region.width; ++j, ++k) {
      design(k, 0) = 1.0;
      design(k, 1) = i - rc;
      design(k, 2) = j - cc;
      values(k) = flood(i, j);
    }
  if ((values.array() == values(0)).all()) return NoiseModel(0.0, values(0) > 0.0 ? values(0) : 1.0);
  const Eigen::Vector3d coeff = design.colPivHouseholderQr().solve(values);
  const Eigen::VectorXd residual = values - design * coeff;
  const double variance = std::max(0.0, residual.squaredNorm() / (n - 3));
  const double mean = values.mean();
  return NoiseModel(variance, mean > 0.0 ? mean : 1.0);
}

std::string format_metrics_csv(const std::vector<MetricRow>& rows) {
  std::string out = "metric,value\n";
  for (const auto& r : rows) out += r.name + "," + format_real(r.value) + "\n";
  return out;
}

}  // namespace mfa
