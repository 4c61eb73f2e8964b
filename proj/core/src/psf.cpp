#include "mfa/psf.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "mfa/log.hpp"
#include "mfa/text_format.hpp"

namespace mfa {
namespace {

double median_of(std::vector<double> v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  return m;
}

struct GaussParams {
  double amplitude;
  double row;
  double col;
  double sigma;
};

double sum_squared_residual(const ImageGrid& img, const GaussParams& p) {
  const double inv = 1.0 / (2.0 * p.sigma * p.sigma);
  double sse = 0.0;
  for (int i = 0; i < img.height(); ++i)
    for (int j = 0; j < img.width(); ++j) {
      const double dr = i - p.row;
      const double dc = j - p.col;
      const double r = p.amplitude * std::exp(-(dr * dr + dc * dc) * inv) - img(i, j);
      sse += r * r;
    }
  return sse;
}

PointSourceFit to_fit(const ImageGrid& img, const GaussParams& p, double sse, int iterations) {
  const double rms = std::sqrt(sse / static_cast<double>(img.size()));
  return {p.sigma, p.row, p.col, p.amplitude, rms / std::abs(p.amplitude), iterations};
}

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

Psf::Psf(Kernel kernel, double sigma) : kernel_(std::move(kernel)), sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("PSF sigma must be > 0");
  for (double w : kernel_.weights())
    if (w < 0.0) throw DomainError("PSF weights must be nonnegative");
  if (std::abs(kernel_.sum() - 1.0) > 1e-9) throw DomainError("PSF weights must sum to 1");
}

int recommended_radius(double sigma) { return std::max(1, static_cast<int>(std::ceil(3.0 * sigma))); }

Psf gaussian_psf(double sigma, int radius) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("gaussian_psf: sigma must be > 0");
  if (radius < 1) throw DomainError("gaussian_psf: radius must be >= 1");
  if (radius < static_cast<int>(std::ceil(3.0 * sigma))) {
    warn("gaussian_psf: radius " + std::to_string(radius) + " truncates sigma " + format_real(sigma) +
         " below 3 sigma");
  }
  const int side = 2 * radius + 1;
  std::vector<double> w(static_cast<std::size_t>(side) * side);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  double z = 0.0;
  for (int du = -radius; du <= radius; ++du)
    for (int dv = -radius; dv <= radius; ++dv) {
      const double v = std::exp(-(du * du + dv * dv) * inv);
      w[static_cast<std::size_t>(du + radius) * side + (dv + radius)] = v;
      z += v;
    }
  for (double& v : w) v /= z;
  return Psf(Kernel(radius, std::move(w)), sigma);
}

PointSourceFit fit_sigma_to_point_source(const ImageGrid& img, const PointSourceFitOptions& opts) {
  std::vector<double> values(img.samples().begin(), img.samples().end());
  const double background = median_of(values);
  std::vector<double> deviations(values.size());
  std::transform(values.begin(), values.end(), deviations.begin(),
                 [&](double v) { return std::abs(v - background); });
  const double noise = 1.4826 * median_of(deviations);
  const double peak_value = img.max();
  const double peak = peak_value - background;
  const bool clears_median = background <= 0.0 || peak_value > 5.0 * background;
  if (!(peak > 0.0) || !clears_median || peak <= 5.0 * noise) throw FitError("no dominant blob");

  // Initial guess: centroid and area of the region above half maximum.
  const double half = background + 0.5 * peak;
  double wsum = 0.0, rsum = 0.0, csum = 0.0;
  int above = 0;
  for (int i = 0; i < img.height(); ++i)
    for (int j = 0; j < img.width(); ++j) {
      const double w = img(i, j) - half;
      if (w <= 0.0) continue;
      ++above;
      wsum += w;
      rsum += w * i;
      csum += w * j;
    }
  GaussParams p{peak_value, rsum / wsum, csum / wsum,
                std::max(0.3, std::sqrt(above / (2.0 * std::numbers::pi * std::log(2.0))))};

  double sse = sum_squared_residual(img, p);
  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
    Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
    const double s2 = p.sigma * p.sigma;
    const double inv = 1.0 / (2.0 * s2);
    for (int i = 0; i < img.height(); ++i)
      for (int j = 0; j < img.width(); ++j) {
        const double dr = i - p.row;
        const double dc = j - p.col;
        const double d2 = dr * dr + dc * dc;
        const double e = std::exp(-d2 * inv);
        const double ae = p.amplitude * e;
        const Eigen::Vector4d grad(e, ae * dr / s2, ae * dc / s2, ae * d2 / (s2 * p.sigma));
        const double r = ae - img(i, j);
        jtj.noalias() += grad * grad.transpose();
        jtr += grad * r;
      }
    const Eigen::Vector4d step = jtj.ldlt().solve(-jtr);
    if (!step.allFinite()) throw FitError("point-source fit: singular normal equations", to_fit(img, p, sse, iter));

    double scale = 1.0;
    GaussParams trial = p;
    double trial_sse = std::numeric_limits<double>::infinity();
    for (int halving = 0; halving < 40; ++halving, scale *= 0.5) {
      trial = {p.amplitude + scale * step[0], p.row + scale * step[1], p.col + scale * step[2],
               p.sigma + scale * step[3]};
      if (trial.sigma <= 0.0) continue;
      trial_sse = sum_squared_residual(img, trial);
      if (trial_sse < sse) break;
    }
    // No halving of the Gauss-Newton step lowers the residual: the fit sits at
    // the floating-point floor of the objective, which is as converged as it gets.
    if (!(trial_sse < sse)) return to_fit(img, p, sse, iter);
    p = trial;
    sse = trial_sse;
    if (step.cwiseAbs().maxCoeff() < opts.step_tolerance) return to_fit(img, p, sse, iter);
  }
  throw FitError("point-source fit did not converge in " + std::to_string(opts.max_iterations) + " iterations",
                 to_fit(img, p, sse, opts.max_iterations));
}

double verify_line_source(const Psf& psf, const ImageGrid& acquired, LineOrientation orientation,
                          const LineVerifyOptions& opts) {
  if (!(opts.end_margin >= 0.0 && opts.end_margin < 0.5))
    throw DomainError("verify_line_source: end margin must be in [0, 0.5)");
  const int h = acquired.height();
  const int w = acquired.width();
  const bool horizontal = orientation == LineOrientation::Horizontal;

  // Orientation check from background-subtracted second moments.
  std::vector<double> values(acquired.samples().begin(), acquired.samples().end());
  const double background = median_of(values);
  double m0 = 0.0, mr = 0.0, mc = 0.0;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const double v = std::max(0.0, acquired(i, j) - background);
      m0 += v;
      mr += v * i;
      mc += v * j;
    }
  if (!(m0 > 0.0)) throw DomainError("verify_line_source: no line found");
  mr /= m0;
  mc /= m0;
  double vr = 0.0, vc = 0.0;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const double v = std::max(0.0, acquired(i, j) - background);
      vr += v * (i - mr) * (i - mr);
      vc += v * (j - mc) * (j - mc);
    }
  if ((horizontal && vr > vc) || (!horizontal && vc > vr))
    throw DomainError(std::string("verify_line_source: acquired line is not ") +
                      (horizontal ? "horizontal" : "vertical"));

  // Line position: peak of the profile across the line.
  const int across = horizontal ? h : w;
  const int along = horizontal ? w : h;
  std::vector<double> profile(static_cast<std::size_t>(across), 0.0);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) profile[static_cast<std::size_t>(horizontal ? i : j)] += acquired(i, j);
  const int line_at = static_cast<int>(std::max_element(profile.begin(), profile.end()) - profile.begin());

  ImageGrid ideal(w, h, 0.0);
  for (int t = 0; t < along; ++t) {
    if (horizontal) ideal(line_at, t) = 1.0;
    else ideal(t, line_at) = 1.0;
  }
  const ImageGrid model = convolve2d(ideal, psf.kernel(), Boundary::Reflect);

  const int band = static_cast<int>(std::ceil(3.0 * psf.sigma()));
  const int margin = static_cast<int>(std::lround(opts.end_margin * along));
  const int a0 = std::max(0, line_at - band), a1 = std::min(across - 1, line_at + band);
  const int l0 = margin, l1 = along - 1 - margin;
  if (l1 < l0) throw DomainError("verify_line_source: end margin leaves nothing to compare");

  auto at = [&](const ImageGrid& g, int a, int l) { return horizontal ? g(a, l) : g(l, a); };
  double mm = 0.0, mv = 0.0, model_peak = 0.0;
  for (int a = a0; a <= a1; ++a)
    for (int l = l0; l <= l1; ++l) {
      const double m = at(model, a, l);
      mm += m * m;
      mv += m * at(acquired, a, l);
      model_peak = std::max(model_peak, m);
    }
  const double scale = mv / mm;
  double ss = 0.0;
  int n = 0;
  for (int a = a0; a <= a1; ++a)
    for (int l = l0; l <= l1; ++l) {
      const double r = scale * at(model, a, l) - at(acquired, a, l);
      ss += r * r;
      ++n;
    }
  const double fitted_peak = std::abs(scale) * model_peak;
  if (!(fitted_peak > 0.0)) throw DomainError("verify_line_source: acquired line has no signal");
  return 100.0 * std::sqrt(ss / n) / fitted_peak;
}

DepthTrend fit_depth_trend(const std::vector<DepthPoint>& points) {
  if (points.size() < 2) throw DomainError("fit_depth_trend: need at least two points");
  const double n = static_cast<double>(points.size());
  double md = 0.0, ms = 0.0;
  for (const auto& p : points) {
    md += p.distance_cm;
    ms += p.sigma;
  }
  md /= n;
  ms /= n;
  double sdd = 0.0, sds = 0.0;
  for (const auto& p : points) {
    sdd += (p.distance_cm - md) * (p.distance_cm - md);
    sds += (p.distance_cm - md) * (p.sigma - ms);
  }
  if (!(sdd > 0.0)) throw DomainError("fit_depth_trend: degenerate fit, all distances identical");
  DepthTrend t;
  t.slope = sds / sdd;
  t.intercept = ms - t.slope * md;
  double ss = 0.0;
  for (const auto& p : points) {
    const double r = p.sigma - (t.slope * p.distance_cm + t.intercept);
    ss += r * r;
  }
  t.fit_residual = std::sqrt(ss / n);
  return t;
}

SigmaPrediction predict_sigma(const DepthTrend& trend, double distance_cm, double sigma_min) {
  if (!(sigma_min > 0.0)) throw DomainError("predict_sigma: sigma_min must be > 0");
  SigmaPrediction out;
  out.sigma = trend.slope * distance_cm + trend.intercept;
  if (out.sigma <= 0.0) {
    out.warning = "predicted sigma " + format_real(out.sigma) + " at " + format_real(distance_cm) +
                  " cm is not positive; clamped to " + format_real(sigma_min);
  }
  out.sigma = std::max(out.sigma, sigma_min);
  return out;
}

std::vector<DepthPoint> parse_depth_csv(const std::string& text) {
  std::vector<DepthPoint> points;
  std::istringstream in(text);
  std::string line;
  std::size_t offset = 0;
  bool first = true;
  while (std::getline(in, line)) {
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (auto comma = rest.find(','); ; comma = rest.find(',')) {
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    const auto d = parse_double(fields[0]);
    if (first && !d) {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() < 2 || fields.size() > 3) throw ParseError("depth CSV: expected 2 or 3 fields", line_offset);
    const auto s = parse_double(fields[1]);
    std::optional<double> r = fields.size() == 3 ? parse_double(fields[2]) : std::optional<double>(0.0);
    if (!d || !s || !r) throw ParseError("depth CSV: non-numeric field", line_offset);
    points.push_back({*d, *s, *r});
  }
  return points;
}

std::string format_depth_csv(const std::vector<DepthPoint>& points) {
  std::string out = "distance_cm,sigma,fit_rmse\n";
  for (const auto& p : points)
    out += format_real(p.distance_cm) + "," + format_real(p.sigma) + "," + format_real(p.fit_rmse) + "\n";
  return out;
}

}  // namespace mfa
