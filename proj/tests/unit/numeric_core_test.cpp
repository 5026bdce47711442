#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "rfdae/activations.hpp"
#include "rfdae/errors.hpp"
#include "rfdae/matrix.hpp"
#include "rfdae/rng.hpp"

using namespace rfdae;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.span()) v = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  const Matrix a{{1, 2}, {3, 4}};
  EXPECT_EQ(matmul(Matrix::identity(2), a), a);
}

TEST(Matmul, HandArithmetic) {
  const Matrix r = matmul(Matrix{{1, 2}}, Matrix{{3}, {4}});
  ASSERT_EQ(r.rows(), 1u);
  ASSERT_EQ(r.cols(), 1u);
  EXPECT_EQ(r(0, 0), 11.0);
}

TEST(Matmul, MatchesTripleLoopOracle) {
  Rng rng(11);
  for (auto [n, k, m] : {std::tuple<int, int, int>{7, 5, 3}, {32, 32, 32}, {1, 17, 9}, {13, 1, 4}}) {
    const Matrix a = random_matrix(n, k, rng);
    const Matrix b = random_matrix(k, m, rng);
    const Matrix c = matmul(a, b);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        long double acc = 0.0L;
        for (int t = 0; t < k; ++t) acc += static_cast<long double>(a(i, t)) * b(t, j);
        EXPECT_NEAR(c(i, j), static_cast<double>(acc), 1e-12);
      }
    }
  }
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
  try {
    matmul(Matrix(2, 3), Matrix(2, 3));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("2x3"), std::string::npos) << what;
  }
}

TEST(Matrix, RejectsNonFiniteValues) {
  EXPECT_THROW(Matrix(1, 2, std::vector<double>{1.0, std::nan("")}), NumericError);
  EXPECT_THROW(Matrix(1, 2, std::vector<double>{1.0, 2.0, 3.0}), ShapeError);
}

TEST(Sigmoid, SymmetryPoint) { EXPECT_EQ(sigmoid(Vector{0.0})[0], 0.5); }

TEST(Sigmoid, SaturatesWithoutOverflow) {
  const Vector s = sigmoid(Vector{-1000.0, 1000.0});
  EXPECT_TRUE(std::isfinite(s[0]));
  EXPECT_TRUE(std::isfinite(s[1]));
  EXPECT_NEAR(s[0], 0.0, 1e-300);
  EXPECT_EQ(s[1], 1.0);
}

TEST(Sigmoid, MatchesExtendedPrecision) {
  for (double x : {0.5, -0.5, 3.25, -7.0, 20.0}) {
    const long double oracle = 1.0L / (1.0L + std::exp(-static_cast<long double>(x)));
    EXPECT_NEAR(sigmoid(x), static_cast<double>(oracle), 1e-12) << x;
  }
}

TEST(Tanh, OddAndSaturating) {
  EXPECT_EQ(tanh_act(Vector{0.0})[0], 0.0);
  const double t = tanh_act(Vector{1000.0})[0];
  EXPECT_TRUE(std::isfinite(t));
  EXPECT_NEAR(t, 1.0, 1e-15);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-20.0, 20.0);
    EXPECT_EQ(tanh_act(Vector{x})[0], -tanh_act(Vector{-x})[0]);
  }
}

TEST(Softmax, UniformForEqualLogits) {
  const Vector p = softmax(Vector{0.0, 0.0, 0.0});
  for (double v : p) EXPECT_NEAR(v, 1.0 / 3.0, 1e-12);
}

TEST(Softmax, ShiftInvariant) {
  for (double c : {-50.0, 0.0, 3.5, 700.0}) {
    const Vector p = softmax(Vector{c, c + std::log(2.0)});
    EXPECT_NEAR(p[0], 1.0 / 3.0, 1e-12) << c;
    EXPECT_NEAR(p[1], 2.0 / 3.0, 1e-12) << c;
  }
}

TEST(Softmax, StableForLargeLogits) {
  const Vector p = softmax(Vector{1e4, 0.0});
  EXPECT_NEAR(p[0], 1.0, 1e-12);
  EXPECT_GT(p[1], -1e-300);
  EXPECT_TRUE(std::isfinite(p[1]));
}

TEST(Softmax, SumsToOneAndPositive) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Vector logits(1 + rng.below(12));
    const double scale = trial % 2 == 0 ? 1.0 : 1e4;
    for (double& v : logits.span()) v = rng.uniform(-scale, scale);
    const Vector p = softmax(logits);
    double sum = 0.0;
    for (double v : p) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  const Vector p = softmax(Vector{5.0, 1.0, -3.0});
  for (double v : p) EXPECT_GT(v, 0.0);
}

TEST(Relu, Examples) {
  EXPECT_EQ(relu(Vector{-1.0, 0.0, 2.0}), (Vector{0.0, 0.0, 2.0}));
  EXPECT_EQ(relu(Vector{-1.0, -2.0}), (Vector{0.0, 0.0}));
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.normal();
    EXPECT_EQ(relu(Vector{x})[0] + relu(Vector{-x})[0], std::abs(x));
  }
}

TEST(Activations, NeverNaNOnFiniteInput) {
  for (double x : {-1e308, -745.0, -1.0, 0.0, 1.0, 745.0, 1e308}) {
    EXPECT_FALSE(std::isnan(sigmoid(x))) << x;
    EXPECT_FALSE(std::isnan(tanh_act(Vector{x})[0])) << x;
  }
}

TEST(Rng, SameSeedSameSequence) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, SubstreamsDifferAndIgnorePosition) {
  Rng root(42);
  Rng x = root.substream("dropout");
  Rng y = root.substream("shuffle");
  EXPECT_NE(x.next_u64(), y.next_u64());

  Rng advanced(42);
  for (int i = 0; i < 10; ++i) advanced.next_u64();
  Rng x2 = advanced.substream("dropout");
  Rng x3 = Rng(42).substream("dropout");
  EXPECT_EQ(x2.next_u64(), x3.next_u64());
  EXPECT_NE(Rng(42).child(1).next_u64(), Rng(42).child(2).next_u64());
}

TEST(Rng, UniformMomentsAndRange) {
  Rng rng(7);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(Rng, NormalMoments) {
  Rng rng(8);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.015);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Rng, BelowCoversRangeUniformly) {
  Rng rng(9);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) counts[rng.below(7)] += 1;
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(10);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  rng.shuffle(std::span<int>(v));
  EXPECT_EQ(std::set<int>(v.begin(), v.end()).size(), 50u);
}
