#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfa/convolve.hpp"
#include "mfa/error.hpp"
#include "mfa/image.hpp"

namespace mfa {

/// Normalized, nonnegative blur kernel together with the Gaussian sigma it was built from.
class Psf {
 public:
  /// Throws DomainError unless sigma > 0, weights are >= 0 and sum to 1 within 1e-9.
  Psf(Kernel kernel, double sigma);

  const Kernel& kernel() const noexcept { return kernel_; }
  double sigma() const noexcept { return sigma_; }

 private:
  Kernel kernel_;
  double sigma_;
};

/// Smallest radius that covers +-3 sigma.
int recommended_radius(double sigma);

/// Sampled isotropic Gaussian exp(-(dx^2 + dy^2) / (2 sigma^2)) on integer
/// offsets, normalized to unit sum. Warns when radius < ceil(3 sigma).
Psf gaussian_psf(double sigma, int radius);
inline Psf gaussian_psf(double sigma) { return gaussian_psf(sigma, recommended_radius(sigma)); }

struct PointSourceFit {
  double sigma = 0.0;
  double center_row = 0.0;
  double center_col = 0.0;
  double amplitude = 0.0;
  /// Residual RMS divided by the fitted amplitude.
  double fit_rmse = 0.0;
  int iterations = 0;
};

class FitError : public Error {
 public:
  FitError(const std::string& what, std::optional<PointSourceFit> best = std::nullopt)
      : Error(what), best_(best) {}
  const std::optional<PointSourceFit>& best_so_far() const noexcept { return best_; }

 private:
  std::optional<PointSourceFit> best_;
};

struct PointSourceFitOptions {
  int max_iterations = 100;
  double step_tolerance = 1e-8;
};

/// Least-squares fit of A * exp(-((r - cr)^2 + (c - cc)^2) / (2 sigma^2)).
///
/// Starts from intensity moments and refines (A, cr, cc, sigma) by Gauss-Newton
/// with an analytic Jacobian. Converged once every component of a step is
/// below `step_tolerance`. Throws FitError("no dominant blob") when the peak
/// does not stand clear of the background, and FitError with the best iterate
/// if the cap is hit.
PointSourceFit fit_sigma_to_point_source(const ImageGrid& img, const PointSourceFitOptions& opts = {});

enum class LineOrientation { Horizontal, Vertical };

struct LineVerifyOptions {
  /// Fraction of the line length excluded at each end.
  double end_margin = 0.10;
};

/// Compares an acquired line source against an ideal unit line blurred by `psf`.
///
/// The ideal line is placed on the row (horizontal) or column (vertical) where
/// the acquired profile peaks, convolved with the PSF, and scaled by the
/// least-squares amplitude. The comparison window spans +-ceil(3 sigma) across
/// the line and excludes `end_margin` of its length at each end. Returns the
/// residual RMS as a percentage of the fitted peak. Throws DomainError when the
/// acquired intensity is elongated along the other axis.
double verify_line_source(const Psf& psf, const ImageGrid& acquired_line, LineOrientation orientation,
                          const LineVerifyOptions& opts = {});

/// sigma = slope * distance + intercept, ordinary least squares.
struct DepthTrend {
  double slope = 0.0;
  double intercept = 0.0;
  double fit_residual = 0.0;  // RMS of residuals
};

struct DepthPoint {
  double distance_cm = 0.0;
  double sigma = 0.0;
  double fit_rmse = 0.0;
};

/// Throws DomainError with fewer than two distinct distances.
DepthTrend fit_depth_trend(const std::vector<DepthPoint>& points);

struct SigmaPrediction {
  double sigma = 0.0;
  /// Set when the unclamped prediction was <= 0 and sigma was raised to sigma_min.
  std::optional<std::string> warning;
};

SigmaPrediction predict_sigma(const DepthTrend& trend, double distance_cm, double sigma_min = 0.1);

/// Parses "distance_cm,sigma[,fit_rmse]" rows; a non-numeric first line is treated as a header.
std::vector<DepthPoint> parse_depth_csv(const std::string& text);
std::string format_depth_csv(const std::vector<DepthPoint>& points);

}  // namespace mfa
