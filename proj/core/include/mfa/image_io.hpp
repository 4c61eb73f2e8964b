#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mfa/image.hpp"

namespace mfa {

enum class ImageFormat {
  /// Portable graymap. Reads P2 and P5 (8- or 16-bit); writes 16-bit P5.
  Pgm,
  /// "MFAG" magic, u32 width, u32 height, u32 reserved (0), then width*height
  /// f64 samples. Everything little-endian. Lossless.
  F64Raw,
};

/// `.pgm` maps to Pgm, anything else to F64Raw.
ImageFormat format_from_path(const std::filesystem::path& path);

/// Linear map used when writing PGM: gray = round((v - low) / (high - low) * 65535).
struct PgmStretch {
  double low = 0.0;
  double high = 0.0;
};

ImageGrid decode_pgm(const std::vector<std::uint8_t>& bytes);
ImageGrid decode_f64raw(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> encode_f64raw(const ImageGrid& img);
std::vector<std::uint8_t> encode_pgm(const ImageGrid& img, PgmStretch* stretch_out = nullptr);

/// Reads an image. PGM gray levels are widened to doubles unchanged.
/// Throws IoError when the file cannot be read and ParseError on malformed content.
ImageGrid load(const std::filesystem::path& path, ImageFormat format);
inline ImageGrid load(const std::filesystem::path& path) { return load(path, format_from_path(path)); }

/// Writes an image. PGM output is min-max stretched to [0, 65535]; the stretch
/// is recorded next to it in `<path>.stretch` as "low <v>\nhigh <v>\n".
void save(const ImageGrid& img, const std::filesystem::path& path, ImageFormat format);
inline void save(const ImageGrid& img, const std::filesystem::path& path) {
  save(img, path, format_from_path(path));
}

std::filesystem::path stretch_sidecar_path(const std::filesystem::path& pgm_path);

}  // namespace mfa
