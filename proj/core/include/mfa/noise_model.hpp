#pragma once

namespace mfa {

/// Additive noise variance together with the intensity scale it was measured at.
class NoiseModel {
 public:
  /// Throws DomainError unless variance >= 0 and measured_at_scale > 0 (both finite).
  /// Restoration requires variance > 0; Wiener and degradation also accept 0.
  explicit NoiseModel(double variance, double measured_at_scale = 1.0);

  double variance() const noexcept { return variance_; }
  double stddev() const noexcept;
  double measured_at_scale() const noexcept { return measured_at_scale_; }

  /// Model for the same acquisition after every intensity is multiplied by k:
  /// variance * k^2, measured_at_scale * |k|.
  NoiseModel rescaled(double k) const;

  /// Model for an image whose intensity scale is `scale` (same units as measured_at_scale).
  NoiseModel at_scale(double scale) const { return rescaled(scale / measured_at_scale_); }

 private:
  double variance_;
  double measured_at_scale_;
};

}  // namespace mfa
