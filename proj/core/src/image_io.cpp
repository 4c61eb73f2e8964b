#include "mfa/image_io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "mfa/error.hpp"
#include "mfa/text_format.hpp"

namespace mfa {
namespace {

constexpr std::size_t kF64HeaderSize = 16;

std::uint32_t read_u32_le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t read_u64_le(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void write_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class PgmReader {
 public:
  explicit PgmReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ >= bytes_.size(); }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long read_uint(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    unsigned long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 0xFFFFFFFFul) throw ParseError(std::string("PGM ") + what + " out of range", start);
      ++pos_;
    }
    if (pos_ == start) throw ParseError(std::string("PGM: expected ") + what, start);
    if (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#')
      throw ParseError(std::string("PGM: malformed ") + what, pos_);
    return v;
  }

  std::uint8_t byte_at(std::size_t i) const { return bytes_[i]; }
  std::size_t size() const { return bytes_.size(); }
  void advance(std::size_t n) { pos_ += n; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace

ImageFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".pgm" ? ImageFormat::Pgm : ImageFormat::F64Raw;
}

std::filesystem::path stretch_sidecar_path(const std::filesystem::path& pgm_path) {
  auto p = pgm_path;
  p += ".stretch";
  return p;
}

ImageGrid decode_pgm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
    throw ParseError("PGM: missing P2/P5 magic", 0);
  const bool binary = bytes[1] == '5';
  PgmReader r(bytes);
  r.advance(2);
  if (r.at_end() || !std::isspace(r.byte_at(r.pos()))) throw ParseError("PGM: malformed magic", 2);

  const std::size_t dims_at = r.pos();
  const auto width = r.read_uint("width");
  const auto height = r.read_uint("height");
  if (width == 0 || height == 0 || width > 1u << 20 || height > 1u << 20)
    throw ParseError("PGM: unsupported dimensions", dims_at);
  const std::size_t maxval_at = r.pos();
  const auto maxval = r.read_uint("maxval");
  if (maxval == 0 || maxval > 65535) throw ParseError("PGM: maxval must be in [1, 65535]", maxval_at);

  const std::size_t count = width * height;
  std::vector<double> samples;
  samples.reserve(count);

  if (binary) {
    // Exactly one whitespace byte separates the header from the raster.
    if (r.at_end()) throw ParseError("PGM: missing raster", r.pos());
    r.advance(1);
    const std::size_t bps = maxval < 256 ? 1 : 2;
    const std::size_t start = r.pos();
    const std::size_t available = bytes.size() - start;
    if (available < count * bps)
      throw ParseError("PGM: raster holds " + std::to_string(available / bps) + " samples, header says " +
                           std::to_string(count),
                       bytes.size());
    if (available > count * bps)
      throw ParseError("PGM: trailing bytes after raster", start + count * bps);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t at = start + i * bps;
      unsigned v = bps == 1 ? bytes[at] : (static_cast<unsigned>(bytes[at]) << 8) | bytes[at + 1];
      if (v > maxval) throw ParseError("PGM: sample exceeds maxval", at);
      samples.push_back(static_cast<double>(v));
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      r.skip_space_and_comments();
      if (r.at_end())
        throw ParseError("PGM: found " + std::to_string(i) + " samples, header says " + std::to_string(count),
                         r.pos());
      const std::size_t at = r.pos();
      const auto v = r.read_uint("sample");
      if (v > maxval) throw ParseError("PGM: sample exceeds maxval", at);
      samples.push_back(static_cast<double>(v));
    }
    r.skip_space_and_comments();
    if (!r.at_end()) throw ParseError("PGM: more samples than header dimensions", r.pos());
  }
  return ImageGrid(static_cast<int>(width), static_cast<int>(height), std::move(samples));
}

ImageGrid decode_f64raw(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kF64HeaderSize) throw ParseError("f64-raw: truncated header", bytes.size());
  if (bytes[0] != 'M' || bytes[1] != 'F' || bytes[2] != 'A' || bytes[3] != 'G')
    throw ParseError("f64-raw: bad magic", 0);
  const std::uint32_t width = read_u32_le(bytes.data() + 4);
  const std::uint32_t height = read_u32_le(bytes.data() + 8);
  if (width == 0 || height == 0 || width > (1u << 20) || height > (1u << 20))
    throw ParseError("f64-raw: unsupported dimensions", 4);
  if (read_u32_le(bytes.data() + 12) != 0) throw ParseError("f64-raw: reserved field must be 0", 12);
  const std::size_t count = static_cast<std::size_t>(width) * height;
  const std::size_t expected = kF64HeaderSize + count * 8;
  if (bytes.size() != expected)
    throw ParseError("f64-raw: payload is " + std::to_string(bytes.size() - kF64HeaderSize) +
                         " bytes, header implies " + std::to_string(count * 8),
                     std::min(bytes.size(), expected));
  std::vector<double> samples(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = kF64HeaderSize + 8 * i;
    samples[i] = std::bit_cast<double>(read_u64_le(bytes.data() + at));
    if (!std::isfinite(samples[i])) throw ParseError("f64-raw: non-finite sample", at);
  }
  return ImageGrid(static_cast<int>(width), static_cast<int>(height), std::move(samples));
}

std::vector<std::uint8_t> encode_f64raw(const ImageGrid& img) {
  std::vector<std::uint8_t> out;
  out.reserve(kF64HeaderSize + img.size() * 8);
  write_u32_le(out, 0x4741464Du);  // "MFAG"
  write_u32_le(out, static_cast<std::uint32_t>(img.width()));
  write_u32_le(out, static_cast<std::uint32_t>(img.height()));
  write_u32_le(out, 0);
  for (double v : img.samples()) write_u64_le(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

std::vector<std::uint8_t> encode_pgm(const ImageGrid& img, PgmStretch* stretch_out) {
  const PgmStretch s{img.min(), img.max()};
  if (stretch_out) *stretch_out = s;
  const double range = s.high - s.low;

  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n65535\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + img.size() * 2);
  for (double v : img.samples()) {
    double q = range > 0.0 ? std::round((v - s.low) / range * 65535.0) : 0.0;
    q = std::clamp(q, 0.0, 65535.0);
    const auto g = static_cast<std::uint16_t>(q);
    out.push_back(static_cast<std::uint8_t>(g >> 8));
    out.push_back(static_cast<std::uint8_t>(g & 0xFF));
  }
  return out;
}

ImageGrid load(const std::filesystem::path& path, ImageFormat format) {
  const auto bytes = read_file(path);
  return format == ImageFormat::Pgm ? decode_pgm(bytes) : decode_f64raw(bytes);
}

void save(const ImageGrid& img, const std::filesystem::path& path, ImageFormat format) {
  if (format == ImageFormat::F64Raw) {
    write_file(path, encode_f64raw(img));
    return;
  }
  PgmStretch s;
  write_file(path, encode_pgm(img, &s));
  const std::string side = "low " + format_real(s.low) + "\nhigh " + format_real(s.high) + "\n";
  write_file(stretch_sidecar_path(path), std::vector<std::uint8_t>(side.begin(), side.end()));
}

}  // namespace mfa
