#include <gtest/gtest.h>

#include "gradcheck.hpp"

using namespace itsr;
using namespace itsr::nn;
using itsr::helpers::check_layer;
using itsr::helpers::rel_error;

namespace {
constexpr double kTol = 1e-3;
constexpr int kDraws = 10;
}  // namespace

TEST(GradCheck, Conv2dValid) {
  std::mt19937_64 rng(1);
  for (int d = 0; d < kDraws; ++d) {
    Conv2d<double> conv("c", 2, 3, 3, 0);
    conv.init(rng);
    EXPECT_LT(check_layer(conv, {2, 6, 6}, rng).worst, kTol);
  }
}

TEST(GradCheck, Conv2dSamePadding) {
  std::mt19937_64 rng(2);
  for (int d = 0; d < kDraws; ++d) {
    Conv2d<double> conv("c", 3, 2, 3, 1);
    conv.init(rng);
    EXPECT_LT(check_layer(conv, {3, 5, 5}, rng).worst, kTol);
  }
}

TEST(GradCheck, Conv2dLargeKernel) {
  std::mt19937_64 rng(3);
  Conv2d<double> conv("c", 1, 2, 5, 0);
  conv.init(rng);
  EXPECT_LT(check_layer(conv, {1, 7, 7}, rng).worst, kTol);
}

TEST(GradCheck, MaxPool) {
  std::mt19937_64 rng(4);
  for (int d = 0; d < kDraws; ++d) {
    MaxPool2<double> pool;
    EXPECT_LT(check_layer(pool, {2, 7, 6}, rng).worst, kTol);
  }
}

TEST(GradCheck, Dense) {
  std::mt19937_64 rng(5);
  for (int d = 0; d < kDraws; ++d) {
    Dense<double> dense("d", 12, 5);
    dense.init(rng);
    EXPECT_LT(check_layer(dense, {12, 1, 1}, rng).worst, kTol);
  }
}

TEST(GradCheck, DenseOnFeatureMaps) {
  std::mt19937_64 rng(6);
  Dense<double> dense("d", 2 * 3 * 3, 4);
  dense.init(rng);
  EXPECT_LT(check_layer(dense, {2, 3, 3}, rng).worst, kTol);
}

TEST(GradCheck, Relu) {
  std::mt19937_64 rng(7);
  Relu<double> relu;
  for (int d = 0; d < kDraws; ++d) EXPECT_LT(check_layer(relu, {3, 4, 4}, rng).worst, kTol);
}

TEST(GradCheck, Tanh) {
  std::mt19937_64 rng(8);
  Tanh<double> t;
  for (int d = 0; d < kDraws; ++d) EXPECT_LT(check_layer(t, {10, 1, 1}, rng).worst, kTol);
}

TEST(GradCheck, MaskedSoftmaxCrossEntropy) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(0.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double h = 1e-6;
  for (int d = 0; d < 50; ++d) {
    const int n = 6;
    Vector<double> logits(n), target = Vector<double>::Zero(n);
    Eigen::Array<bool, Eigen::Dynamic, 1> mask(n);
    for (int i = 0; i < n; ++i) {
      logits(i) = normal(rng);
      mask(i) = i == 0 || unit(rng) < 0.7;
    }
    double mass = 0;
    for (int i = 0; i < n; ++i)
      if (mask(i)) mass += target(i) = unit(rng);
    target /= mass;
    Vector<double> grad, scratch;
    masked_softmax_cross_entropy(logits, mask, target, grad);
    for (int i = 0; i < n; ++i) {
      Vector<double> up = logits, down = logits;
      up(i) += h;
      down(i) -= h;
      const double numeric = (masked_softmax_cross_entropy(up, mask, target, scratch) -
                              masked_softmax_cross_entropy(down, mask, target, scratch)) /
                             (2 * h);
      EXPECT_LT(rel_error(grad(i), numeric), kTol);
      if (!mask(i)) EXPECT_EQ(grad(i), 0.0);
    }
  }
}

TEST(GradCheck, TanhMse) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> normal(0.0, 1.5);
  const double h = 1e-6;
  for (int d = 0; d < 100; ++d) {
    const double u = normal(rng), z = d % 2 ? 1.0 : -1.0;
    double g = 0, scratch = 0;
    tanh_mse(u, z, g);
    const double numeric = (tanh_mse(u + h, z, scratch) - tanh_mse(u - h, z, scratch)) / (2 * h);
    EXPECT_LT(rel_error(g, numeric), kTol);
  }
}

TEST(MaskedSoftmax, ZeroOnIllegalAndNormalised) {
  Vector<double> logits(4);
  logits << 1000.0, 2.0, -3.0, 1001.0;
  Eigen::Array<bool, Eigen::Dynamic, 1> mask(4);
  mask << false, true, true, false;
  const auto p = masked_softmax(logits, mask);
  EXPECT_EQ(p(0), 0.0);
  EXPECT_EQ(p(3), 0.0);
  EXPECT_NEAR(p.sum(), 1.0, 1e-12);
  EXPECT_NEAR(p(1) / p(2), std::exp(5.0), 1e-6);
}

TEST(Layers, ShapesAndValues) {
  Conv2d<double> conv("c", 1, 6, 5, 0);
  EXPECT_EQ(conv.output_shape({1, 27, 27}), (Shape3{6, 23, 23}));
  MaxPool2<double> pool;
  EXPECT_EQ(pool.output_shape({6, 23, 23}), (Shape3{6, 11, 11}));
  Conv2d<double> same("s", 4, 8, 3, 1);
  EXPECT_EQ(same.output_shape({4, 32, 32}), (Shape3{8, 32, 32}));

  // A 2x2 all-ones kernel over a known input.
  Conv2d<double> box("b", 1, 1, 2, 0);
  box.parameters()[0]->value.setOnes();
  box.parameters()[1]->value.setConstant(0.5);
  nn::Tensor<double> in(1, 9), out;
  in << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  box.forward(in, {1, 3, 3}, out);
  ASSERT_EQ(out.cols(), 4);
  EXPECT_DOUBLE_EQ(out(0, 0), 12.5);
  EXPECT_DOUBLE_EQ(out(0, 3), 28.5);

  pool.forward(in, {1, 3, 3}, out);
  ASSERT_EQ(out.cols(), 1);
  EXPECT_DOUBLE_EQ(out(0, 0), 5.0);
}

TEST(Layers, XavierBounds) {
  std::mt19937_64 rng(11);
  Matrix<double> w(50, 40);
  xavier_uniform(w, 40, 50, rng);
  const double a = std::sqrt(6.0 / 90.0);
  EXPECT_LE(w.cwiseAbs().maxCoeff(), a);
  EXPECT_GT(w.cwiseAbs().maxCoeff(), 0.9 * a);
  EXPECT_NEAR(w.mean(), 0.0, 0.02);
}
