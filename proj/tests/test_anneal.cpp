#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mfa/anneal.hpp"
#include "oracles.hpp"

using namespace mfa;
using mfa::testing::brute_hamiltonian;
using mfa::testing::finite_difference_gradient;
using mfa::testing::max_relative_error;
using mfa::testing::random_grid;

namespace {

ImageGrid from_function(int w, int h, auto&& fn) {
  ImageGrid img(w, h);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) img(i, j) = fn(i, j);
  return img;
}

Psf delta_psf() { return Psf(Kernel::identity(), 1.0); }

double norm(const ImageGrid& a) { return std::sqrt(dot(a, a)); }

RestorationTrace make_trace(std::initializer_list<std::array<double, 3>> rows) {
  RestorationTrace t;
  int it = 0;
  for (const auto& r : rows) t.records.push_back({++it, 1.0, r[0], r[1], r[2], 0.1});
  return t;
}

}  // namespace

TEST(QuadraticVariation, VanishesOnConstantsAndRampInterior) {
  const auto qc = quadratic_variation(ImageGrid(7, 6, 3.25));
  for (double v : qc.samples()) EXPECT_EQ(v, 0.0);

  const auto ramp = from_function(9, 8, [](int i, int j) { return 3.0 * i - 2.0 * j + 1.0; });
  const auto qr = quadratic_variation(ramp);
  for (int i = 1; i < 7; ++i)
    for (int j = 1; j < 8; ++j) EXPECT_NEAR(qr(i, j), 0.0, 1e-20);
}

TEST(QuadraticVariation, ParabolaAlongRows) {
  // f = i^2 has a unit-free second difference of 2 along rows and no mixed term.
  const auto f = from_function(6, 9, [](int i, int) { return double(i) * i; });
  const auto d = second_differences(f);
  const auto q = quadratic_variation(f);
  for (int i = 1; i < 8; ++i)
    for (int j = 1; j < 5; ++j) {
      EXPECT_DOUBLE_EQ(d.yy(i, j), 2.0);
      EXPECT_DOUBLE_EQ(d.xx(i, j), 0.0);
      EXPECT_DOUBLE_EQ(d.xy(i, j), 0.0);
      EXPECT_DOUBLE_EQ(q(i, j), 4.0);
    }
  EXPECT_THROW(second_differences(ImageGrid(2, 5)), DomainError);
}

TEST(QuadraticVariation, MixedStencilOnProduct) {
  // f = i*j: f_xy = 1 in the interior.
  const auto d = second_differences(from_function(7, 7, [](int i, int j) { return double(i) * j; }));
  for (int i = 1; i < 6; ++i)
    for (int j = 1; j < 6; ++j) EXPECT_DOUBLE_EQ(d.xy(i, j), 1.0);
}

TEST(Hamiltonian, ConstantImageMatchingData) {
  const ImageGrid g(8, 5, 4.0);
  const NoiseModel noise(2.0);
  const auto h = hamiltonian(g, g, gaussian_psf(1.0), noise, 1.0, 0.5);
  EXPECT_NEAR(h.noise, 0.0, 1e-20);
  EXPECT_DOUBLE_EQ(h.prior, -40.0 / 0.5);
  EXPECT_DOUBLE_EQ(h.total, h.prior);

  const auto doubled = hamiltonian(g, g, gaussian_psf(1.0), noise, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(doubled.prior, h.prior / 2.0);
}

TEST(Hamiltonian, SinglePixelResidualWithDeltaPsf) {
  const ImageGrid g(5, 5, 1.0);
  ImageGrid f = g;
  f(2, 3) += 0.3;
  const auto h = hamiltonian(f, g, delta_psf(), NoiseModel(0.5), 0.0, 1.0);
  EXPECT_NEAR(h.noise, 0.09 / (2 * 0.5), 1e-15);
  EXPECT_DOUBLE_EQ(h.total, h.noise);
}

TEST(Hamiltonian, MatchesPixelwiseOracle) {
  const auto psf = gaussian_psf(1.2, 3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = random_grid(11, 9, seed, 0.0, 5.0);
    const auto g = random_grid(11, 9, seed + 100, 0.0, 5.0);
    for (double t : {0.3, 1.0, 4.0}) {
      const auto h = hamiltonian(f, g, psf, NoiseModel(0.7), 2.5, t);
      const auto o = brute_hamiltonian(f, g, 3, psf.kernel().weights(), 0.7, 2.5, t);
      EXPECT_NEAR(h.noise, o.noise, 1e-10 * std::abs(o.noise));
      EXPECT_NEAR(h.prior, o.prior, 1e-10 * std::abs(o.prior));
      EXPECT_NEAR(h.total, o.total, 1e-10 * std::abs(o.total));
      EXPECT_GE(h.prior, -99.0 / t - 1e-12);
      EXPECT_LE(h.prior, 0.0);
    }
  }
}

TEST(Gradient, DataTermMatchesFiniteDifferences) {
  const auto psf = gaussian_psf(1.0, 2);
  const NoiseModel noise(0.8);
  const auto f = random_grid(9, 8, 7, 0.0, 3.0);
  const auto g = random_grid(9, 8, 8, 0.0, 3.0);
  const auto analytic = gradient(f, g, psf, noise, 0.0, 1.0);
  const auto numeric = finite_difference_gradient(f, [&](const ImageGrid& x) {
    return brute_hamiltonian(x, g, 2, psf.kernel().weights(), 0.8, 0.0, 1.0).total;
  });
  EXPECT_LT(max_relative_error(analytic, numeric), 1e-5);
}

TEST(Gradient, FullEnergyMatchesFiniteDifferencesAcrossParameters) {
  for (double sigma : {0.7, 1.5}) {
    const int r = static_cast<int>(std::ceil(3 * sigma));
    const auto psf = gaussian_psf(sigma, r);
    for (double beta : {0.5, 5.0})
      for (double t : {0.5, 1.0, 3.0}) {
        const NoiseModel noise(1.3);
        const auto f = random_grid(10, 9, 31, 0.0, 2.0);
        const auto g = random_grid(10, 9, 32, 0.0, 2.0);
        const auto analytic = gradient(f, g, psf, noise, beta, t);
        const auto numeric = finite_difference_gradient(f, [&](const ImageGrid& x) {
          return brute_hamiltonian(x, g, r, psf.kernel().weights(), 1.3, beta, t).total;
        });
        EXPECT_LT(max_relative_error(analytic, numeric), 1e-4) << sigma << ' ' << beta << ' ' << t;
      }
  }
}

TEST(Gradient, ZeroAtConstantData) {
  const ImageGrid g(12, 10, 6.0);
  const auto grad = gradient(g, g, gaussian_psf(1.5), NoiseModel(1.0), 3.0, 0.7);
  for (double v : grad.samples()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(MfaStep, ZeroStepIsIdentityAndSmallStepDescends) {
  const auto psf = gaussian_psf(1.0);
  const NoiseModel noise(1.0);
  const auto f = random_grid(16, 16, 5, 0.0, 4.0);
  const auto g = random_grid(16, 16, 6, 0.0, 4.0);
  MfaParams p;
  p.alpha = 0.0;
  EXPECT_EQ(mfa_step(f, g, psf, noise, p, 1.0), f);

  p.alpha = 1e-3;
  p.beta = 2.0;
  const auto next = mfa_step(f, g, psf, noise, p, 1.0);
  EXPECT_LT(hamiltonian(next, g, psf, noise, 2.0, 1.0).total, hamiltonian(f, g, psf, noise, 2.0, 1.0).total);
}

TEST(MfaStep, NonFiniteStepThrowsDivergence) {
  MfaParams p;
  p.alpha = 1e308;
  const auto g = random_grid(8, 8, 1, 0.0, 100.0);
  auto f = g;
  f(3, 3) += 1e10;
  EXPECT_THROW(mfa_step(f, g, delta_psf(), NoiseModel(1e-300), p, 1.0), DivergenceError);
}

TEST(Anneal, ConstantDataIsAFixedPoint) {
  const ImageGrid g(10, 10, 2.5);
  MfaParams p;
  p.beta = 4.0;
  const auto r = anneal(g, delta_psf(), NoiseModel(1.0), p);
  EXPECT_EQ(r.f_star, g);
}

TEST(Anneal, DataOnlyResidualNeverGrows) {
  const auto psf = gaussian_psf(1.5);
  const NoiseModel noise(2.0);
  const auto g = random_grid(20, 18, 11, 0.0, 10.0);
  MfaParams p = default_mfa_params(g, noise);
  p.beta = 0.0;
  p.max_iterations = 40;
  const auto r = anneal(g, psf, noise, p);
  ASSERT_FALSE(r.trace.records.empty());
  for (std::size_t k = 1; k < r.trace.records.size(); ++k)
    EXPECT_LE(r.trace.records[k].h_noise, r.trace.records[k - 1].h_noise * (1 + 1e-12));
}

TEST(Anneal, TraceIdentityAndPriorBounds) {
  const auto psf = gaussian_psf(1.0);
  const NoiseModel noise(1.0);
  const auto g = random_grid(16, 12, 3, 0.0, 5.0);
  MfaParams p = default_mfa_params(g, noise);
  p.beta = 2.0;
  p.snapshot_every = 5;
  const auto r = anneal(g, psf, noise, p);
  EXPECT_EQ(r.trace.records.size(), 20u);
  EXPECT_EQ(r.trace.snapshots.size(), 4u);
  EXPECT_EQ(r.trace.beta, 2.0);
  const double n = 16.0 * 12.0;
  for (const auto& rec : r.trace.records) {
    EXPECT_NEAR(rec.h_total, rec.h_noise + 2.0 * rec.h_prior, 1e-9 * std::abs(rec.h_total) + 1e-12);
    EXPECT_LE(rec.h_prior, 0.0);
    EXPECT_GE(rec.h_prior, -n / rec.temperature - 1e-9);
  }
  for (std::size_t k = 0; k < r.trace.snapshots.size(); ++k)
    EXPECT_EQ(r.trace.snapshots[k].first, static_cast<int>(5 * (k + 1)));
  EXPECT_EQ(r.trace.snapshots.back().second, r.f_star);

  std::ostringstream csv;
  write_trace_csv(r.trace, csv);
  const std::string text = csv.str();
  EXPECT_EQ(text.rfind("iteration,temperature,h_noise,h_prior,h_total\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 21);
}

TEST(Anneal, ScheduleEndsAtFinalTemperature) {
  const auto g = random_grid(8, 8, 2, 0.0, 1.0);
  MfaParams p;
  p.schedule = {1.0, 0.5, 0.5, 3};
  p.max_iterations = 1000;
  const auto r = anneal(g, delta_psf(), NoiseModel(1.0), p);
  // Temperatures 1 and 0.5, three steps each.
  EXPECT_EQ(r.trace.records.size(), 6u);
  EXPECT_DOUBLE_EQ(r.trace.records.back().temperature, 0.5);
}

TEST(Anneal, DeterministicAcrossRuns) {
  const auto g = random_grid(14, 14, 9, 0.0, 8.0);
  const NoiseModel noise(1.0);
  auto p = default_mfa_params(g, noise);
  p.beta = 3.0;
  p.backtracking = true;
  const auto a = anneal(g, gaussian_psf(1.0), noise, p);
  const auto b = anneal(g, gaussian_psf(1.0), noise, p);
  EXPECT_EQ(a.f_star, b.f_star);
}

TEST(Anneal, HugeStepDivergesWithIteration) {
  const auto g = random_grid(16, 16, 4, 0.0, 50.0);
  MfaParams p;
  p.alpha = 1e6;
  try {
    anneal(g, gaussian_psf(2.0), NoiseModel(1.0), p);
    FAIL();
  } catch (const AnnealDivergence& e) {
    EXPECT_GE(e.iteration(), 1);
    EXPECT_EQ(e.trace().records.size(), static_cast<std::size_t>(e.iteration() - 1));
  }
}

TEST(Anneal, BacktrackingNeverRaisesEnergyWithinATemperature) {
  const auto g = random_grid(16, 16, 4, 0.0, 50.0);
  MfaParams p;
  p.alpha = 1e6;
  p.backtracking = true;
  p.schedule.steps_per_temperature = 4;
  const auto r = anneal(g, gaussian_psf(2.0), NoiseModel(1.0), p);
  for (std::size_t k = 1; k < r.trace.records.size(); ++k) {
    const auto& a = r.trace.records[k - 1];
    const auto& b = r.trace.records[k];
    if (a.temperature == b.temperature) EXPECT_LE(b.h_total, a.h_total);
  }
}

TEST(Anneal, RejectsInvalidSettings) {
  const auto g = random_grid(8, 8, 1, 0.0, 1.0);
  EXPECT_THROW(anneal(g, delta_psf(), NoiseModel(0.0), MfaParams{}), DomainError);
  EXPECT_THROW(anneal(ImageGrid(2, 8), delta_psf(), NoiseModel(1.0), MfaParams{}), DomainError);
  MfaParams p;
  p.schedule.decay = 1.0;
  EXPECT_THROW(anneal(g, delta_psf(), NoiseModel(1.0), p), DomainError);
  p = {};
  p.schedule.t_final = 2.0;
  EXPECT_THROW(anneal(g, delta_psf(), NoiseModel(1.0), p), DomainError);
  p = {};
  p.alpha = -1.0;
  EXPECT_THROW(anneal(g, delta_psf(), NoiseModel(1.0), p), DomainError);
}

TEST(DefaultParams, ScaleWithNoiseAndImage) {
  const auto g = random_grid(16, 16, 1, 0.0, 100.0);
  const auto p = default_mfa_params(g, NoiseModel(9.0));
  EXPECT_DOUBLE_EQ(p.alpha, 4.5);
  EXPECT_DOUBLE_EQ(p.schedule.t_initial, initial_temperature(g));
  EXPECT_GE(p.schedule.t_initial, 1.0);
  EXPECT_DOUBLE_EQ(p.schedule.t_final, 0.05 * p.schedule.t_initial);
  EXPECT_EQ(initial_temperature(ImageGrid(8, 8, 3.0)), 1.0);
}

TEST(StoppingIndicator, PlateauStops) {
  const auto t = make_trace({{10, -1, 9}, {10, -1, 9}, {10, -1, 9}});
  EXPECT_EQ(stopping_indicator(t, 3, 1e-4), StopDecision::Stop);
}

TEST(StoppingIndicator, SteadyDescentContinues) {
  const auto t = make_trace({{10, -1, 9}, {8, -1, 7}, {6, -1, 5}});
  EXPECT_EQ(stopping_indicator(t, 3, 1e-4), StopDecision::Continue);
}

TEST(StoppingIndicator, OversmoothingOnsetStops) {
  // Noise term climbing while the prior keeps falling and the total barely moves.
  const auto t = make_trace({{100.0, -50.0, 50.0}, {100.01, -50.0101, 49.9999}, {100.02, -50.0202, 49.9998}});
  EXPECT_EQ(stopping_indicator(t, 3, 1e-6), StopDecision::Stop);
  // Same change in total with noise flat does not trigger.
  const auto flat = make_trace({{100.0, -50.0, 50.0}, {100.0, -50.0001, 49.9999}, {100.0, -50.0002, 49.9998}});
  EXPECT_EQ(stopping_indicator(flat, 3, 1e-6), StopDecision::Continue);
}

TEST(StoppingIndicator, ShortTraceOrWindowContinues) {
  const auto t = make_trace({{10, -1, 9}});
  EXPECT_EQ(stopping_indicator(t, 3, 1e-4), StopDecision::Continue);
  EXPECT_EQ(stopping_indicator(t, 0, 1e-4), StopDecision::Continue);
}

TEST(StoppingIndicator, AnnealHonorsWindow) {
  const ImageGrid g(10, 10, 2.0);
  MfaParams p;
  p.stop_window = 3;
  p.max_iterations = 100;
  p.schedule = {1.0, 0.01, 0.95, 5};
  const auto r = anneal(g, delta_psf(), NoiseModel(1.0), p);
  EXPECT_EQ(r.trace.records.size(), 3u);
}
