// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <limits>

#include "sew/error.hpp"
#include "sew/matrix.hpp"

using sew::Matrix;

TEST(Matrix, ConstructorRejectsWrongDataLength) {
  EXPECT_THROW(Matrix(2, 3, std::vector<double>(5)), sew::DimensionError);
  EXPECT_NO_THROW(Matrix(2, 3, std::vector<double>(6)));
}

TEST(Matrix, RowMajorLayout) {
  const Matrix m{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m.data()[3], 4.0);
  EXPECT_EQ(m(1, 2), 6.0);
  EXPECT_EQ(m.row(1)[0], 4.0);
}

TEST(Matrix, TransposeAndIdentity) {
  const Matrix m{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(m.transpose(), (Matrix{{1, 4}, {2, 5}, {3, 6}}));
  EXPECT_EQ(Matrix::identity(2), (Matrix{{1, 0}, {0, 1}}));
  const std::vector<double> d{2, 3};
  EXPECT_EQ(Matrix::diagonal(d), (Matrix{{2, 0}, {0, 3}}));
}

TEST(Matrix, ArithmeticChecksShapes) {
  Matrix a{{1, 2}};
  const Matrix b{{3, 4}};
  a += b;
  EXPECT_EQ(a, (Matrix{{4, 6}}));
  EXPECT_EQ(a - b, (Matrix{{1, 2}}));
  EXPECT_EQ(2.0 * b, (Matrix{{6, 8}}));
  EXPECT_THROW(a += Matrix(2, 1), sew::DimensionError);
}

TEST(Matrix, ShapeErrorNamesBothShapes) {
  try {
    sew::require_same_shape(Matrix(2, 3), Matrix(3, 2), "test");
    FAIL() << "expected DimensionError";
  } catch (const sew::DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("3x2"), std::string::npos) << msg;
  }
}

TEST(Matrix, ColumnSlices) {
  const Matrix m{{1, 2, 3, 4}, {5, 6, 7, 8}};
  EXPECT_EQ(m.columns(1, 2), (Matrix{{2, 3}, {6, 7}}));
  const std::vector<std::size_t> idx{3, 0};
  EXPECT_EQ(m.gather_columns(idx), (Matrix{{4, 1}, {8, 5}}));
  EXPECT_THROW(m.columns(3, 2), sew::DimensionError);
}

TEST(Matrix, FiniteAndScalar) {
  Matrix m{{1.0}};
  EXPECT_TRUE(m.all_finite());
  EXPECT_EQ(m.scalar(), 1.0);
  m(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(m.all_finite());
  EXPECT_THROW((void)Matrix(2, 1).scalar(), sew::DimensionError);
}
