#include <gtest/gtest.h>

#include "mfa/convolve.hpp"
#include "mfa/psf.hpp"
#include "oracles.hpp"

using namespace mfa;
using mfa::testing::random_grid;

namespace {

Kernel random_kernel(int r, std::uint64_t seed) {
  const auto g = random_grid(2 * r + 1, 2 * r + 1, seed, -1.0, 1.0);
  return Kernel(r, {g.samples().begin(), g.samples().end()});
}

}  // namespace

TEST(Kernel, ValidatesShape) {
  EXPECT_THROW(Kernel(1, std::vector<double>(8, 0.0)), DomainError);
  EXPECT_THROW(Kernel(-1, {}), DomainError);
}

TEST(ResolveIndex, BoundaryPolicies) {
  EXPECT_EQ(resolve_index(-1, 5, Boundary::Reflect), 1);
  EXPECT_EQ(resolve_index(5, 5, Boundary::Reflect), 3);
  EXPECT_EQ(resolve_index(-9, 5, Boundary::Reflect), 1);
  EXPECT_EQ(resolve_index(-3, 1, Boundary::Reflect), 0);
  EXPECT_EQ(resolve_index(-2, 5, Boundary::Replicate), 0);
  EXPECT_EQ(resolve_index(7, 5, Boundary::Replicate), 4);
  EXPECT_EQ(resolve_index(-1, 5, Boundary::Zero), -1);
}

TEST(Convolve, DeltaKernelIsIdentityUnderEveryBoundary) {
  const Kernel delta(1, {0, 0, 0, 0, 1, 0, 0, 0, 0});
  const auto img = random_grid(7, 5, 1);
  for (auto b : {Boundary::Reflect, Boundary::Replicate, Boundary::Zero}) EXPECT_EQ(convolve2d(img, delta, b), img);
}

TEST(Convolve, UnitSumKernelPreservesConstantWithReflect) {
  const auto psf = gaussian_psf(1.5, 5);
  const auto out = convolve2d(ImageGrid(9, 6, 3.25), psf.kernel(), Boundary::Reflect);
  for (double v : out.samples()) EXPECT_NEAR(v, 3.25, 1e-13);
}

TEST(Convolve, ImpulseResponseIsTheKernel) {
  const auto psf = gaussian_psf(1.0, 2);
  // Large enough that no mirrored copy of the impulse reaches the support.
  ImageGrid img(9, 9, 0.0);
  img(4, 4) = 1.0;
  const auto out = convolve2d(img, psf.kernel());
  for (int du = -2; du <= 2; ++du)
    for (int dv = -2; dv <= 2; ++dv) EXPECT_DOUBLE_EQ(out(4 + du, 4 + dv), psf.kernel().at(du, dv));
}

TEST(Convolve, AsymmetricKernelMatchesBruteForce) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto img = random_grid(8, 6, s);
    const auto k = random_kernel(2, 100 + s);
    const auto want_reflect = mfa::testing::brute_convolve(img, 2, k.weights(), true);
    const auto want_zero = mfa::testing::brute_convolve(img, 2, k.weights(), false);
    const auto got_reflect = convolve2d(img, k, Boundary::Reflect);
    const auto got_zero = convolve2d(img, k, Boundary::Zero);
    for (std::size_t i = 0; i < img.size(); ++i) {
      EXPECT_NEAR(got_reflect.samples()[i], want_reflect.samples()[i], 1e-13);
      EXPECT_NEAR(got_zero.samples()[i], want_zero.samples()[i], 1e-13);
    }
  }
}

TEST(Convolve, KernelLargerThanImage) {
  const auto img = random_grid(3, 2, 9);
  const auto k = random_kernel(4, 10);
  const auto got = convolve2d(img, k, Boundary::Reflect);
  const auto want = mfa::testing::brute_convolve(img, 4, k.weights(), true);
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(got.samples()[i], want.samples()[i], 1e-13);
}

TEST(Flip, RotatesBy180AndIsAnInvolution) {
  const Kernel k(1, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  EXPECT_EQ(flip(k).weights(), (std::vector<double>{9, 8, 7, 6, 5, 4, 3, 2, 1}));
  EXPECT_EQ(flip(flip(k)), k);
  const auto psf = gaussian_psf(2.0, 6);
  EXPECT_EQ(flip(psf.kernel()), psf.kernel());
}

TEST(Flip, ConvolvingWithFlipEqualsCorrelation) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto img = random_grid(8, 8, s);
    const auto k = random_kernel(1, 50 + s);
    const auto got = convolve2d(img, flip(k), Boundary::Zero);
    const auto want = mfa::testing::brute_correlate(img, 1, k.weights());
    for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(got.samples()[i], want.samples()[i], 1e-14);
    EXPECT_LT(mfa::testing::max_relative_error(correlate2d(img, k, Boundary::Zero), got), 1e-14);
  }
}

TEST(Convolve, Linearity) {
  const auto x = random_grid(10, 7, 1), y = random_grid(10, 7, 2);
  const auto k = random_kernel(2, 3);
  const double a = 1.7, b = -0.3;
  const auto lhs = convolve2d(add_scaled(scale_intensity(x, a), b, y), k);
  const auto rhs = add_scaled(scale_intensity(convolve2d(x, k), a), b, convolve2d(y, k));
  for (std::size_t i = 0; i < lhs.size(); ++i) EXPECT_NEAR(lhs.samples()[i], rhs.samples()[i], 1e-13);
}

TEST(Convolve, ShiftEquivarianceAwayFromBoundary) {
  const auto img = random_grid(20, 20, 4);
  ImageGrid shifted(20, 20, 0.0);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) shifted(i, j) = img(std::max(0, i - 2), std::max(0, j - 3));
  const auto k = random_kernel(2, 5);
  const auto a = convolve2d(img, k), b = convolve2d(shifted, k);
  for (int i = 6; i < 16; ++i)
    for (int j = 7; j < 16; ++j) EXPECT_NEAR(b(i, j), a(i - 2, j - 3), 1e-13);
}

TEST(ConvolveAdjoint, ZeroBoundaryIsFlippedConvolution) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto x = random_grid(8, 8, s), y = random_grid(8, 8, 1000 + s);
    const auto k = random_kernel(2, 2000 + s);
    const double lhs = dot(convolve2d(x, k, Boundary::Zero), y);
    const double rhs = dot(x, convolve2d(y, flip(k), Boundary::Zero));
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs)));
    EXPECT_LT(mfa::testing::max_relative_error(convolve2d_adjoint(y, k, Boundary::Zero),
                                               convolve2d(y, flip(k), Boundary::Zero)),
              1e-14);
  }
}

TEST(ConvolveAdjoint, ExactForReflectAndReplicate) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto x = random_grid(8, 7, s), y = random_grid(8, 7, 500 + s);
    const auto k = random_kernel(3, 900 + s);
    for (auto b : {Boundary::Reflect, Boundary::Replicate}) {
      const double lhs = dot(convolve2d(x, k, b), y);
      const double rhs = dot(x, convolve2d_adjoint(y, k, b));
      EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST(Convolve, Deterministic) {
  const auto img = random_grid(33, 17, 8);
  const auto k = random_kernel(3, 9);
  EXPECT_EQ(convolve2d(img, k), convolve2d(img, k));
  EXPECT_EQ(convolve2d_adjoint(img, k), convolve2d_adjoint(img, k));
}
