#include "mfa/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>

#include "mfa/text_format.hpp"

namespace mfa {
namespace {

// Second-difference stencils in convolution form. All three are symmetric
// under a 180 degree rotation, so convolution and correlation agree.
const Kernel& dxx_stencil() {
  static const Kernel k(1, {0, 0, 0, 1, -2, 1, 0, 0, 0});
  return k;
}
const Kernel& dyy_stencil() {
  static const Kernel k(1, {0, 1, 0, 0, -2, 0, 0, 1, 0});
  return k;
}
const Kernel& dxy_stencil() {
  static const Kernel k(1, {0.25, 0, -0.25, 0, 0, 0, -0.25, 0, 0.25});
  return k;
}

void require_restorable(const ImageGrid& f, const ImageGrid& g, const NoiseModel& noise, double temperature,
                        const char* what) {
  require_same_shape(f, g, what);
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw DomainError(std::string(what) + ": temperature must be > 0");
  if (!(noise.variance() > 0.0)) throw DomainError(std::string(what) + ": noise variance must be > 0");
}

double median_of(std::vector<double> v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  return m;
}

bool runaway(const ImageGrid& f, double limit) {
  for (double v : f.samples())
    if (!std::isfinite(v) || std::abs(v) > limit) return true;
  return false;
}

double max_abs(const ImageGrid& g) {
  double m = 0.0;
  for (double v : g.samples()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

void AnnealingSchedule::validate() const {
  if (!(t_initial > 0.0) || !std::isfinite(t_initial)) throw DomainError("schedule: t_initial must be > 0");
  if (!(t_final > 0.0) || t_final > t_initial) throw DomainError("schedule: need 0 < t_final <= t_initial");
  if (!(decay > 0.0 && decay < 1.0)) throw DomainError("schedule: decay must be in (0, 1)");
  if (steps_per_temperature < 1) throw DomainError("schedule: steps_per_temperature must be >= 1");
}

void MfaParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be finite and > 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and >= 0");
  schedule.validate();
  if (max_iterations < 1) throw DomainError("max_iterations must be >= 1");
  if (snapshot_every < 0) throw DomainError("snapshot_every must be >= 0");
  if (max_backtracks < 0) throw DomainError("max_backtracks must be >= 0");
  if (stop_window < 0 || stop_window == 1) throw DomainError("stop_window must be 0 or >= 2");
  if (!(divergence_factor > 0.0)) throw DomainError("divergence_factor must be > 0");
}

SecondDifferences second_differences(const ImageGrid& img) {
  if (img.width() < 3 || img.height() < 3)
    throw DomainError("second differences need an image of at least 3x3");
  return {convolve2d(img, dxx_stencil(), Boundary::Reflect), convolve2d(img, dxy_stencil(), Boundary::Reflect),
          convolve2d(img, dyy_stencil(), Boundary::Reflect)};
}

ImageGrid quadratic_variation(const ImageGrid& img) {
  const auto d = second_differences(img);
  ImageGrid out(img.width(), img.height());
  auto o = out.samples();
  auto xx = d.xx.samples(), xy = d.xy.samples(), yy = d.yy.samples();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = xx[i] * xx[i] + 2.0 * xy[i] * xy[i] + yy[i] * yy[i];
  return out;
}

double initial_temperature(const ImageGrid& g) {
  // Lambda is a derivative-type field centered on zero, so its robust spread is
  // taken about zero: 1.4826 * median |Lambda|.
  const auto lambda2 = quadratic_variation(g);
  std::vector<double> lambda(lambda2.size());
  std::transform(lambda2.samples().begin(), lambda2.samples().end(), lambda.begin(),
                 [](double v) { return std::sqrt(v); });
  return std::max(1.0, 1.4826 * median_of(std::move(lambda)));
}

MfaParams default_mfa_params(const ImageGrid& g, const NoiseModel& noise) {
  MfaParams p;
  p.alpha = 0.5 * noise.variance();
  p.beta = 1.0;
  p.schedule.t_initial = initial_temperature(g);
  p.schedule.t_final = 0.05 * p.schedule.t_initial;
  p.schedule.decay = 0.9;
  p.schedule.steps_per_temperature = 2;
  p.max_iterations = 20;
  return p;
}

HamiltonianTerms hamiltonian(const ImageGrid& f_est, const ImageGrid& g, const Psf& psf, const NoiseModel& noise,
                             double beta, double temperature, Boundary boundary) {
  require_restorable(f_est, g, noise, temperature, "hamiltonian");
  const ImageGrid blurred = convolve2d(f_est, psf.kernel(), boundary);
  const double inv_two_var = 1.0 / (2.0 * noise.variance());
  HamiltonianTerms h;
  auto bs = blurred.samples();
  auto gs = g.samples();
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const double r = bs[i] - gs[i];
    h.noise += r * r * inv_two_var;
  }
  const ImageGrid lambda2 = quadratic_variation(f_est);
  const double inv_two_t2 = 1.0 / (2.0 * temperature * temperature);
  for (double l2 : lambda2.samples()) h.prior -= std::exp(-l2 * inv_two_t2) / temperature;
  h.total = h.noise + beta * h.prior;
  return h;
}

ImageGrid gradient(const ImageGrid& f_est, const ImageGrid& g, const Psf& psf, const NoiseModel& noise, double beta,
                   double temperature, Boundary boundary) {
  require_restorable(f_est, g, noise, temperature, "gradient");

  ImageGrid residual = subtract(convolve2d(f_est, psf.kernel(), boundary), g);
  ImageGrid grad = scale_intensity(convolve2d_adjoint(residual, psf.kernel(), boundary), 1.0 / noise.variance());
  if (beta == 0.0) return grad;

  // d/dLambda^2 of -(1/T) exp(-Lambda^2 / 2T^2) is exp(...) / (2 T^3); the chain
  // rule through Lambda^2 = xx^2 + 2 xy^2 + yy^2 gives weights {xx, 2 xy, yy} * exp(...) / T^3.
  auto d = second_differences(f_est);
  const double inv_two_t2 = 1.0 / (2.0 * temperature * temperature);
  const double inv_t3 = 1.0 / (temperature * temperature * temperature);
  auto xx = d.xx.samples(), xy = d.xy.samples(), yy = d.yy.samples();
  for (std::size_t i = 0; i < xx.size(); ++i) {
    const double l2 = xx[i] * xx[i] + 2.0 * xy[i] * xy[i] + yy[i] * yy[i];
    const double w = std::exp(-l2 * inv_two_t2) * inv_t3;
    xx[i] *= w;
    xy[i] *= 2.0 * w;
    yy[i] *= w;
  }
  const ImageGrid prior = add_scaled(add_scaled(convolve2d_adjoint(d.xx, dxx_stencil(), Boundary::Reflect), 1.0,
                                                convolve2d_adjoint(d.xy, dxy_stencil(), Boundary::Reflect)),
                                     1.0, convolve2d_adjoint(d.yy, dyy_stencil(), Boundary::Reflect));
  return add_scaled(grad, beta, prior);
}

ImageGrid mfa_step(const ImageGrid& f_est, const ImageGrid& g, const Psf& psf, const NoiseModel& noise,
                   const MfaParams& params, double temperature) {
  ImageGrid next = add_scaled(f_est, -params.alpha,
                              gradient(f_est, g, psf, noise, params.beta, temperature, params.boundary));
  if (!next.all_finite()) throw DivergenceError("gradient step produced non-finite pixels", 0);
  return next;
}

Restoration anneal(const ImageGrid& g, const Psf& psf, const NoiseModel& noise, const MfaParams& params) {
  params.validate();
  if (!(noise.variance() > 0.0)) throw DomainError("anneal: noise variance must be > 0");
  if (g.width() < 3 || g.height() < 3) throw DomainError("anneal: image must be at least 3x3");

  const double limit = params.divergence_factor * (max_abs(g) + 1.0);
  RestorationTrace trace;
  trace.beta = params.beta;
  ImageGrid f = g;

  auto diverged = [&](int iteration, const std::string& why) {
    return AnnealDivergence("diverged at iteration " + std::to_string(iteration) + ": " + why, iteration,
                            std::move(trace));
  };

  int iteration = 0;
  double temperature = params.schedule.t_initial;
  const double t_stop = params.schedule.t_final * (1.0 - 1e-12);
  while (iteration < params.max_iterations && temperature >= t_stop) {
    std::optional<HamiltonianTerms> current;  // energy of f at this temperature
    for (int s = 0; s < params.schedule.steps_per_temperature && iteration < params.max_iterations; ++s) {
      ++iteration;
      const ImageGrid grad = gradient(f, g, psf, noise, params.beta, temperature, params.boundary);
      if (params.backtracking && !current)
        current = hamiltonian(f, g, psf, noise, params.beta, temperature, params.boundary);
      const HamiltonianTerms before = current.value_or(HamiltonianTerms{});

      double step = params.alpha;
      std::optional<ImageGrid> accepted;
      HamiltonianTerms h;
      for (int attempt = 0; attempt <= params.max_backtracks; ++attempt, step *= 0.5) {
        ImageGrid candidate = add_scaled(f, -step, grad);
        if (runaway(candidate, limit)) {
          if (!params.backtracking) {
            throw diverged(iteration, candidate.all_finite() ? "pixel magnitude exceeded divergence limit"
                                                              : "non-finite pixel");
          }
          continue;
        }
        h = hamiltonian(candidate, g, psf, noise, params.beta, temperature, params.boundary);
        if (!std::isfinite(h.total)) {
          if (!params.backtracking) throw diverged(iteration, "non-finite energy");
          continue;
        }
        if (!params.backtracking || h.total <= before.total) {
          accepted = std::move(candidate);
          break;
        }
      }
      if (!accepted) {
        // Every trial raised the energy: hold position for this iteration.
        step = 0.0;
        h = before;
        accepted = f;
      }
      f = std::move(*accepted);
      current = h;
      trace.records.push_back({iteration, temperature, h.noise, h.prior, h.total, step});
      if (params.snapshot_every > 0 && iteration % params.snapshot_every == 0) trace.snapshots.emplace_back(iteration, f);
      if (params.stop_window > 0 &&
          stopping_indicator(trace, params.stop_window, params.stop_epsilon) == StopDecision::Stop)
        return {std::move(f), std::move(trace)};
    }
    temperature *= params.schedule.decay;
  }
  return {std::move(f), std::move(trace)};
}

StopDecision stopping_indicator(const RestorationTrace& trace, int window, double epsilon) {
  if (window < 2 || trace.records.size() < static_cast<std::size_t>(window)) return StopDecision::Continue;
  const auto first = trace.records.end() - window;
  const double h0 = first->h_total;
  const double h1 = trace.records.back().h_total;
  const double relative_decrease = (h0 - h1) / std::max(std::abs(h0), 1e-300);
  if (relative_decrease < epsilon) return StopDecision::Stop;

  bool noise_rising = true;
  bool prior_falling = true;
  for (auto it = first + 1; it != trace.records.end(); ++it) {
    noise_rising = noise_rising && it->h_noise > (it - 1)->h_noise;
    prior_falling = prior_falling && it->h_prior <= (it - 1)->h_prior;
  }
  if (noise_rising && prior_falling && relative_decrease < 10.0 * epsilon) return StopDecision::Stop;
  return StopDecision::Continue;
}

void write_trace_csv(const RestorationTrace& trace, std::ostream& out) {
  out << "iteration,temperature,h_noise,h_prior,h_total\n";
  for (const auto& r : trace.records) {
    out << r.iteration << ',' << format_real(r.temperature) << ',' << format_real(r.h_noise) << ','
        << format_real(r.h_prior) << ',' << format_real(r.h_total) << '\n';
  }
}

}  // namespace mfa
