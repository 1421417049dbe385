#include <gtest/gtest.h>

#include "homoglab/error.hpp"
#include "homoglab/tensor.hpp"

using namespace homoglab;

TEST(Tensor4, IdentityIsSymmetricWithUnitBounds) {
  const Tensor4 a = Tensor4::identity(2, 3);
  EXPECT_TRUE(a.is_symmetric());
  const auto [lo, hi] = a.rayleigh_bounds();
  EXPECT_DOUBLE_EQ(lo, 1.0);
  EXPECT_DOUBLE_EQ(hi, 1.0);
  EXPECT_EQ(a(0, 0, 1, 1), 1.0);
  EXPECT_EQ(a(0, 1, 1, 1), 0.0);
}

TEST(Tensor4, AdjointSwapsIndexPairs) {
  Tensor4 a(2, 2);
  a(0, 1, 0, 1) = 3.0;
  const Tensor4 b = a.adjoint();
  EXPECT_EQ(b(1, 0, 1, 0), 3.0);
  EXPECT_EQ(b(0, 1, 0, 1), 0.0);
  EXPECT_FALSE(a.is_symmetric());
}

TEST(Tensor4, NormalBlockContractsSpatialIndices) {
  Eigen::MatrixXd m(2, 2);
  m << 2.0, 0.5, 0.5, 3.0;
  const Tensor4 a = Tensor4::from_matrix(2, 1, m);
  const double n[2] = {0.6, 0.8};
  const Eigen::MatrixXd b = a.normal_block(n);
  EXPECT_NEAR(b(0, 0), 0.36 * 2.0 + 2 * 0.48 * 0.5 + 0.64 * 3.0, 1e-15);
}

TEST(Tensor4, FromMatrixRejectsWrongShape) {
  EXPECT_THROW(Tensor4::from_matrix(2, 2, Eigen::MatrixXd::Identity(3, 3)), InvalidArgument);
}
