#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "mfa/convolve.hpp"
#include "mfa/error.hpp"
#include "mfa/image.hpp"
#include "mfa/noise_model.hpp"
#include "mfa/psf.hpp"

namespace mfa {

/// Geometric cooling: T_{k+1} = decay * T_k, `steps_per_temperature` descent steps at each T.
struct AnnealingSchedule {
  double t_initial = 1.0;
  double t_final = 0.05;
  double decay = 0.9;
  int steps_per_temperature = 2;

  void validate() const;
};

struct MfaParams {
  /// Gradient step size.
  double alpha = 0.5;
  /// Weight of the prior term against the noise term.
  double beta = 1.0;
  AnnealingSchedule schedule;
  int max_iterations = 20;
  /// Keep a copy of the estimate every N iterations (0 disables).
  int snapshot_every = 0;

  /// Halve the step until the energy at the current temperature does not increase.
  bool backtracking = false;
  int max_backtracks = 40;

  /// Trailing window for the stopping indicator; 0 runs the full schedule.
  int stop_window = 0;
  double stop_epsilon = 1e-4;

  /// The run is declared divergent once any |pixel| exceeds
  /// divergence_factor * (max|g| + 1), or any pixel is non-finite.
  double divergence_factor = 1e6;

  Boundary boundary = Boundary::Reflect;

  void validate() const;
};

/// max(1, 1.4826 * median of sqrt(quadratic_variation(g))): a robust standard
/// deviation of the zero-centered Lambda field, so noise starts in the smoothing regime.
double initial_temperature(const ImageGrid& g);

/// alpha = 0.5 * sigma^2, beta = 1, t_initial from `initial_temperature`,
/// t_final = 0.05 * t_initial, decay 0.9, two steps per temperature, 20 iterations.
MfaParams default_mfa_params(const ImageGrid& g, const NoiseModel& noise);

struct SecondDifferences {
  ImageGrid xx;  // along columns
  ImageGrid xy;
  ImageGrid yy;  // along rows
};

/// Central second differences with reflect boundary. Requires at least 3x3.
SecondDifferences second_differences(const ImageGrid& img);

/// Per-pixel f_xx^2 + 2 f_xy^2 + f_yy^2.
ImageGrid quadratic_variation(const ImageGrid& img);

struct HamiltonianTerms {
  double noise = 0.0;
  double prior = 0.0;
  double total = 0.0;  // noise + beta * prior
};

/// Energy of the estimate at temperature T:
///   noise = sum ((f (x) h) - g)^2 / (2 sigma^2)
///   prior = sum -(1/T) exp(-Lambda^2 / (2 T^2))
HamiltonianTerms hamiltonian(const ImageGrid& f_est, const ImageGrid& g, const Psf& psf, const NoiseModel& noise,
                             double beta, double temperature, Boundary boundary = Boundary::Reflect);

/// Analytic dH/df of `hamiltonian`, using the exact adjoints of the blur and
/// second-difference operators under the chosen boundary.
ImageGrid gradient(const ImageGrid& f_est, const ImageGrid& g, const Psf& psf, const NoiseModel& noise,
                   double beta, double temperature, Boundary boundary = Boundary::Reflect);

/// f_est - alpha * gradient. Throws DivergenceError if the result is non-finite.
ImageGrid mfa_step(const ImageGrid& f_est, const ImageGrid& g, const Psf& psf, const NoiseModel& noise,
                   const MfaParams& params, double temperature);

struct TraceRecord {
  int iteration = 0;
  double temperature = 0.0;
  double h_noise = 0.0;
  double h_prior = 0.0;
  double h_total = 0.0;
  /// Step size actually taken; smaller than MfaParams::alpha after backtracking, 0 if rejected.
  double step = 0.0;
};

struct RestorationTrace {
  double beta = 1.0;
  std::vector<TraceRecord> records;
  std::vector<std::pair<int, ImageGrid>> snapshots;
};

struct Restoration {
  ImageGrid f_star;
  RestorationTrace trace;
};

/// Divergence during `anneal`; carries the trace up to the failing iteration.
class AnnealDivergence : public DivergenceError {
 public:
  AnnealDivergence(const std::string& what, int iteration, RestorationTrace trace)
      : DivergenceError(what, iteration), trace_(std::move(trace)) {}
  const RestorationTrace& trace() const noexcept { return trace_; }

 private:
  RestorationTrace trace_;
};

/// Mean field annealing restoration starting from f = g.
Restoration anneal(const ImageGrid& g, const Psf& psf, const NoiseModel& noise, const MfaParams& params);

enum class StopDecision { Continue, Stop };

/// Looks at the trailing `window` records. Stops when the relative decrease of
/// h_total across the window is below `epsilon` (plateau), or when h_noise has
/// risen at every record while h_prior kept falling and h_total decreased by
/// less than 10 * epsilon (over-smoothing onset). Continues while the trace is
/// shorter than the window.
StopDecision stopping_indicator(const RestorationTrace& trace, int window, double epsilon = 1e-4);

/// "iteration,temperature,h_noise,h_prior,h_total" header plus one row per record.
void write_trace_csv(const RestorationTrace& trace, std::ostream& out);

}  // namespace mfa
