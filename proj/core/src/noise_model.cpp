#include "mfa/noise_model.hpp"

#include <cmath>

#include "mfa/error.hpp"

namespace mfa {

NoiseModel::NoiseModel(double variance, double measured_at_scale)
    : variance_(variance), measured_at_scale_(measured_at_scale) {
  if (!std::isfinite(variance) || variance < 0.0) throw DomainError("noise variance must be finite and >= 0");
  if (!std::isfinite(measured_at_scale) || !(measured_at_scale > 0.0))
    throw DomainError("noise calibration scale must be finite and > 0");
}

double NoiseModel::stddev() const noexcept { return std::sqrt(variance_); }

NoiseModel NoiseModel::rescaled(double k) const {
  if (!std::isfinite(k) || k == 0.0) throw DomainError("noise rescale factor must be finite and nonzero");
  return NoiseModel(variance_ * k * k, measured_at_scale_ * std::abs(k));
}

}  // namespace mfa
