#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "homoglab/coeff.hpp"
#include "homoglab/error.hpp"

using namespace homoglab;

namespace {

std::vector<CoefficientPtr> all_builtins() {
  return {builtin(ConstantParams{Tensor4::identity(2, 1)}), builtin(LayeredParams{}),
          builtin(LayeredParams{2.0, 1.0, 1, 2}), builtin(TrigonometricParams{}), builtin(CheckerboardParams{}),
          builtin(UserParams{1, {"3 + cos(2*pi*y1)*sin(2*pi*y2)"}})};
}

}  // namespace

TEST(Validate, IdentityHasUnitQuotientsAndNoResidual) {
  const auto a = builtin(ConstantParams{Tensor4::identity(2, 1)});
  const ValidationReport r = validate(*a, 8);
  EXPECT_DOUBLE_EQ(r.min_rayleigh, 1.0);
  EXPECT_DOUBLE_EQ(r.max_rayleigh, 1.0);
  EXPECT_DOUBLE_EQ(r.measured_mu, 1.0);
  EXPECT_EQ(r.periodicity_residual, 0.0);
  EXPECT_EQ(r.holder_quotient, 0.0);
  EXPECT_DOUBLE_EQ(a->mu(), 1.0);
}

TEST(Validate, LayeredQuotientsAreTheRangeOfA) {
  const auto a = builtin(LayeredParams{});
  const ValidationReport r = validate(*a, 64);
  EXPECT_NEAR(r.min_rayleigh, 1.0, 1e-14);
  EXPECT_NEAR(r.max_rayleigh, 3.0, 1e-14);
  EXPECT_EQ(r.periodicity_residual, 0.0);
}

TEST(Validate, CheckerboardBoundsMatchDenseSampling) {
  const auto a = builtin(CheckerboardParams{10.0, 1.0 / 16.0, 1});
  const ValidationReport r = validate(*a, 128);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  const int n = 512;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double y[2] = {(i + 0.5) / n, (j + 0.5) / n};
      const double v = (*a)(y)(0, 0, 0, 0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  EXPECT_GE(r.measured_mu, 0.1);
  EXPECT_LE(r.measured_mu, 10.0);
  EXPECT_NEAR(r.min_rayleigh, lo, 0.05 * lo);
  EXPECT_NEAR(r.max_rayleigh, hi, 0.05 * hi);
  EXPECT_TRUE(std::isfinite(r.holder_quotient));
  EXPECT_GT(r.holder_quotient, 0.0);
}

TEST(Validate, TrigonometricLowerQuotient) {
  const auto a = builtin(TrigonometricParams{});
  const ValidationReport r = validate(*a, 256);
  EXPECT_GE(r.min_rayleigh, 2.0 / 3.0);
  EXPECT_NEAR(r.min_rayleigh, 1.5, 1e-12);
  EXPECT_NEAR(r.max_rayleigh, 2.5, 1e-12);
}

TEST(Validate, RejectsBadInput) {
  auto nan_field = std::make_shared<CoefficientField>(
      2, 1, [](std::span<const double>, Tensor4& out) { out(0, 0, 0, 0) = std::nan(""); }, Family::user, 1.0,
      HolderPair{}, true, "nan");
  EXPECT_THROW(validate(*nan_field, 4), InvalidArgument);
  auto degenerate = std::make_shared<CoefficientField>(
      2, 1, [](std::span<const double>, Tensor4& out) { out = Tensor4(2, 1); }, Family::user, 1.0, HolderPair{},
      true, "zero");
  EXPECT_THROW(validate(*degenerate, 4), InvalidArgument);
  EXPECT_THROW(validate(*builtin(LayeredParams{}), 1), InvalidArgument);
}

TEST(Rescale, Examples) {
  const auto id = builtin(ConstantParams{Tensor4::identity(2, 1)});
  const double x[2] = {0.3, 0.7};
  EXPECT_EQ(rescale(id, 0.125)(x).max_abs_diff(Tensor4::identity(2, 1)), 0.0);

  const auto lay = builtin(LayeredParams{});
  const double x2[2] = {0.125, 0.0};
  EXPECT_NEAR(rescale(lay, 0.25)(x2)(0, 0, 0, 0), 2.0, 1e-15);

  const double y[2] = {0.37, 0.81};
  EXPECT_EQ(rescale(lay, 1.0)(y).max_abs_diff((*lay)(y)), 0.0);

  EXPECT_THROW(rescale(lay, 0.0), InvalidArgument);
  EXPECT_THROW(rescale(lay, -1.0), InvalidArgument);
}

TEST(Rescale, CompositionWithUnitScaleIsIdentity) {
  const auto lay = builtin(TrigonometricParams{});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double x[2] = {u(rng), u(rng)};
    EXPECT_EQ(rescale(rescale(lay, 1.0), 0.0625)(x).max_abs_diff(rescale(lay, 0.0625)(x)), 0.0);
  }
}

TEST(Builtin, FamilyExamples) {
  const auto c = builtin(ConstantParams{Tensor4::identity(2, 1)});
  EXPECT_EQ(c->family(), Family::constant);
  EXPECT_DOUBLE_EQ(c->mu(), 1.0);
  const auto lay = builtin(LayeredParams{});
  EXPECT_DOUBLE_EQ(lay->mu(), 1.0 / 3.0);
  const auto tri = builtin(TrigonometricParams{});
  EXPECT_DOUBLE_EQ(tri->mu(), 0.4);
}

TEST(Builtin, DeclaredMuIsConsistentWithValidation) {
  for (const auto& a : all_builtins()) {
    const ValidationReport r = validate(*a, 64);
    EXPECT_GE(r.measured_mu, a->mu() * (1 - 1e-9)) << a->key();
  }
}

TEST(Builtin, RejectsInvalidParameters) {
  EXPECT_THROW(builtin(CheckerboardParams{0.0, 0.1, 1}), InvalidArgument);
  EXPECT_THROW(builtin(CheckerboardParams{5.0, 0.0, 1}), InvalidArgument);
  EXPECT_THROW(builtin(LayeredParams{1.0, 1.5, 0, 1}), InvalidArgument);
  EXPECT_THROW(builtin(ConstantParams{Tensor4(2, 1)}), InvalidArgument);
  EXPECT_THROW(builtin(UserParams{1, {"1", "2"}}), InvalidArgument);
  EXPECT_THROW(builtin(UserParams{1, {"-1 - y1*y1"}}), InvalidArgument);
}

TEST(Builtin, PeriodicityIsExactOnDyadicSamples) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> k(0, (1 << 20) - 1), z(-6, 6);
  for (const auto& a : all_builtins()) {
    for (int t = 0; t < 10000; ++t) {
      const double y[2] = {k(rng) / double(1 << 20), k(rng) / double(1 << 20)};
      const double yz[2] = {y[0] + z(rng), y[1] + z(rng)};
      ASSERT_EQ((*a)(y).max_abs_diff((*a)(yz)), 0.0) << a->key();
    }
  }
}

TEST(Builtin, SymmetricFamiliesAreSymmetricOnSamples) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& a : all_builtins()) {
    ASSERT_TRUE(a->symmetric());
    for (int t = 0; t < 500; ++t) {
      const double y[2] = {u(rng), u(rng)};
      const Tensor4 v = (*a)(y);
      ASSERT_EQ(v.max_abs_diff(v.adjoint()), 0.0);
    }
  }
}

TEST(Builtin, UserMatrixFieldAndAdjoint) {
  const auto a = builtin(UserParams{1, {"2", "0.3*sin(2*pi*(y1+y2))", "-0.3*sin(2*pi*(y1+y2))", "2"}});
  EXPECT_FALSE(a->symmetric());
  const auto at = a->adjoint();
  const double y[2] = {0.1, 0.2};
  EXPECT_EQ((*at)(y).max_abs_diff((*a)(y).adjoint()), 0.0);
  EXPECT_NEAR(a->mu(), 0.5, 1e-12);
  EXPECT_NE(at->key(), a->key());
}

TEST(Builtin, SystemsAreBlockDiagonal) {
  const auto a = builtin(LayeredParams{2.0, 1.0, 0, 2});
  EXPECT_EQ(a->components(), 2);
  const double y[2] = {0.25, 0.0};
  const Tensor4 v = (*a)(y);
  EXPECT_DOUBLE_EQ(v(0, 0, 1, 1), 3.0);
  EXPECT_DOUBLE_EQ(v(0, 0, 0, 1), 0.0);
  EXPECT_DOUBLE_EQ(v(0, 1, 0, 0), 0.0);
}

TEST(Family, RoundTripsThroughText) {
  for (Family f : {Family::constant, Family::layered, Family::trigonometric, Family::smoothed_checkerboard,
                   Family::user})
    EXPECT_EQ(family_from_string(to_string(f)), f);
  EXPECT_THROW(family_from_string("checkerboard"), InvalidArgument);
}
