#include "mfa/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "mfa/convolve.hpp"
#include "mfa/error.hpp"

namespace mfa {
namespace {

template <typename T>
T read_field(std::istringstream& in, const char* what, std::size_t offset) {
  T v{};
  if (!(in >> v)) throw ParseError(std::string("phantom spec: expected ") + what, offset);
  return v;
}

}  // namespace

PhantomSpec parse_phantom_spec(const std::string& text) {
  PhantomSpec spec;
  bool have_width = false, have_height = false;
  std::size_t offset = 0;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const std::size_t at = offset;
    offset += line.size() + 1;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream in(line);
    std::string key;
    if (!(in >> key)) continue;
    if (key == "width") {
      spec.width = read_field<int>(in, "integer width", at);
      have_width = true;
    } else if (key == "height") {
      spec.height = read_field<int>(in, "integer height", at);
      have_height = true;
    } else if (key == "background") {
      spec.background = read_field<double>(in, "background intensity", at);
    } else if (key == "disk") {
      Disk d;
      d.center_row = read_field<double>(in, "disk center row", at);
      d.center_col = read_field<double>(in, "disk center col", at);
      d.radius = read_field<double>(in, "disk radius", at);
      d.intensity = read_field<double>(in, "disk intensity", at);
      spec.shapes.emplace_back(d);
    } else if (key == "rect") {
      RectShape r;
      r.area.row = read_field<int>(in, "rect row", at);
      r.area.col = read_field<int>(in, "rect col", at);
      r.area.height = read_field<int>(in, "rect height", at);
      r.area.width = read_field<int>(in, "rect width", at);
      r.intensity = read_field<double>(in, "rect intensity", at);
      spec.shapes.emplace_back(r);
    } else {
      throw ParseError("phantom spec: unknown key '" + key + "'", at);
    }
    std::string extra;
    if (in >> extra) throw ParseError("phantom spec: unexpected trailing field '" + extra + "'", at);
  }
  if (!have_width || !have_height) throw ParseError("phantom spec: width and height are required", offset);
  return spec;
}

PhantomSpec load_phantom_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open phantom spec " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_phantom_spec(ss.str());
}

void validate(const PhantomSpec& spec) {
  if (spec.width < 1 || spec.height < 1) throw DomainError("phantom: dimensions must be >= 1");
  if (!std::isfinite(spec.background) || spec.background < 0.0)
    throw DomainError("phantom: background must be finite and >= 0");
  for (std::size_t k = 0; k < spec.shapes.size(); ++k) {
    const std::string which = "phantom shape " + std::to_string(k);
    std::visit(
        [&](const auto& s) {
          if (!std::isfinite(s.intensity) || s.intensity < 0.0)
            throw DomainError(which + ": intensity must be finite and >= 0");
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Disk>) {
            if (!(s.radius >= 0.0) || s.center_row - s.radius < 0.0 || s.center_col - s.radius < 0.0 ||
                s.center_row + s.radius > spec.height - 1 || s.center_col + s.radius > spec.width - 1)
              throw DomainError(which + ": disk out of bounds");
          } else {
            if (s.area.height < 1 || s.area.width < 1 || s.area.row < 0 || s.area.col < 0 ||
                s.area.row + s.area.height > spec.height || s.area.col + s.area.width > spec.width)
              throw DomainError(which + ": rectangle out of bounds");
          }
        },
        spec.shapes[k]);
  }
}

ImageGrid render_phantom(const PhantomSpec& spec) {
  validate(spec);
  ImageGrid img(spec.width, spec.height, spec.background);
  for (const auto& shape : spec.shapes) {
    if (const auto* d = std::get_if<Disk>(&shape)) {
      const double r2 = d->radius * d->radius;
      for (int i = 0; i < spec.height; ++i)
        for (int j = 0; j < spec.width; ++j) {
          const double dr = i - d->center_row;
          const double dc = j - d->center_col;
          if (dr * dr + dc * dc <= r2) img(i, j) = d->intensity;
        }
    } else {
      const auto& r = std::get<RectShape>(shape);
      for (int i = r.area.row; i < r.area.row + r.area.height; ++i)
        for (int j = r.area.col; j < r.area.col + r.area.width; ++j) img(i, j) = r.intensity;
    }
  }
  return img;
}

ImageGrid degrade(const ImageGrid& ideal, const Psf& psf, const NoiseModel& noise, std::uint64_t seed,
                  NoiseKind kind) {
  ImageGrid out = convolve2d(ideal, psf.kernel(), Boundary::Reflect);
  std::mt19937_64 rng(seed);
  if (kind == NoiseKind::Gaussian) {
    if (noise.variance() == 0.0) return out;
    std::normal_distribution<double> dist(0.0, noise.stddev());
    for (double& v : out.samples()) v += dist(rng);
  } else {
    for (double& v : out.samples()) {
      if (v <= 0.0) {
        v = 0.0;
        continue;
      }
      std::poisson_distribution<long long> dist(v);
      v = static_cast<double>(dist(rng));
    }
  }
  return out;
}

}  // namespace mfa
