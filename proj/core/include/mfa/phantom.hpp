#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "mfa/image.hpp"
#include "mfa/noise_model.hpp"
#include "mfa/psf.hpp"

namespace mfa {

/// Filled disk: pixels with (row - center_row)^2 + (col - center_col)^2 <= radius^2.
struct Disk {
  double center_row = 0.0;
  double center_col = 0.0;
  double radius = 0.0;
  double intensity = 0.0;
};

struct RectShape {
  Rect area;
  double intensity = 0.0;
};

using Shape = std::variant<Disk, RectShape>;

/// Piecewise-constant test object. Shapes are painted in order over the
/// background, so later shapes overwrite earlier ones where they overlap.
struct PhantomSpec {
  int width = 0;
  int height = 0;
  double background = 0.0;
  std::vector<Shape> shapes;
};

/// Line-oriented text format, '#' starts a comment:
///   width <int>
///   height <int>
///   background <real>
///   disk <center_row> <center_col> <radius> <intensity>
///   rect <row> <col> <height> <width> <intensity>
/// Throws ParseError (with the byte offset of the offending line) on malformed input.
PhantomSpec parse_phantom_spec(const std::string& text);
PhantomSpec load_phantom_spec(const std::filesystem::path& path);

/// Throws DomainError if a shape leaves the image or an intensity is negative or non-finite.
void validate(const PhantomSpec& spec);

ImageGrid render_phantom(const PhantomSpec& spec);

enum class NoiseKind {
  /// i.i.d. Gaussian with the model's variance.
  Gaussian,
  /// Poisson counts with mean max(blurred, 0); ignores the variance. Physical
  /// gamma-camera noise, outside the Gaussian likelihood used for restoration.
  Poisson,
};

/// convolve(ideal, psf, reflect) plus seeded noise. Same seed, same bytes.
ImageGrid degrade(const ImageGrid& ideal, const Psf& psf, const NoiseModel& noise, std::uint64_t seed,
                  NoiseKind kind = NoiseKind::Gaussian);

}  // namespace mfa
