#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace itsr::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Activations are row-major (channels x height*width) matrices; dense activations
/// are (units x 1). Row-major flattening is channel-major, pixel index y*width + x.
template <typename Scalar>
using Tensor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Shape3 {
  int channels = 1;
  int height = 1;
  int width = 1;

  int pixels() const { return height * width; }
  int size() const { return channels * height * width; }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

template <typename Scalar>
struct Parameter {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;
  Matrix<Scalar> momentum;

  Parameter(std::string n, int rows, int cols)
      : name(std::move(n)),
        value(Matrix<Scalar>::Zero(rows, cols)),
        grad(Matrix<Scalar>::Zero(rows, cols)),
        momentum(Matrix<Scalar>::Zero(rows, cols)) {}
};

/// Glorot/Xavier uniform: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
template <typename Scalar, typename Rng>
void xavier_uniform(Matrix<Scalar>& w, int fan_in, int fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  for (Eigen::Index j = 0; j < w.cols(); ++j)
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<Scalar>(dist(rng));
}

template <typename Scalar>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::unique_ptr<Layer> clone() const = 0;
  virtual Shape3 output_shape(Shape3 in) const = 0;
  virtual void forward(const Tensor<Scalar>& in, Shape3 in_shape, Tensor<Scalar>& out) const = 0;
  /// Accumulates parameter gradients and writes the gradient w.r.t. the input.
  virtual void backward(const Tensor<Scalar>& in, Shape3 in_shape, const Tensor<Scalar>& out,
                        const Tensor<Scalar>& grad_out, Tensor<Scalar>& grad_in) = 0;
  virtual std::vector<Parameter<Scalar>*> parameters() { return {}; }
  virtual std::vector<const Parameter<Scalar>*> parameters() const { return {}; }
};

// Unrolls k x k patches into columns: row (c*k + ky)*k + kx, column oy*out_w + ox.
template <typename Scalar>
void im2col(const Tensor<Scalar>& in, Shape3 s, int k, int pad, Tensor<Scalar>& cols) {
  const int oh = s.height + 2 * pad - k + 1;
  const int ow = s.width + 2 * pad - k + 1;
  cols.setZero(s.channels * k * k, oh * ow);
  for (int c = 0; c < s.channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const int row = (c * k + ky) * k + kx;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy + ky - pad;
          if (iy < 0 || iy >= s.height) continue;
          const int ox_lo = std::max(0, pad - kx);
          const int ox_hi = std::min(ow, s.width + pad - kx);
          for (int ox = ox_lo; ox < ox_hi; ++ox) cols(row, oy * ow + ox) = in(c, iy * s.width + ox + kx - pad);
        }
      }
    }
  }
}

template <typename Scalar>
void col2im(const Tensor<Scalar>& cols, Shape3 s, int k, int pad, Tensor<Scalar>& out) {
  const int oh = s.height + 2 * pad - k + 1;
  const int ow = s.width + 2 * pad - k + 1;
  out.setZero(s.channels, s.pixels());
  for (int c = 0; c < s.channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const int row = (c * k + ky) * k + kx;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy + ky - pad;
          if (iy < 0 || iy >= s.height) continue;
          const int ox_lo = std::max(0, pad - kx);
          const int ox_hi = std::min(ow, s.width + pad - kx);
          for (int ox = ox_lo; ox < ox_hi; ++ox) out(c, iy * s.width + ox + kx - pad) += cols(row, oy * ow + ox);
        }
      }
    }
  }
}

/// Stride-1 square convolution with zero padding.
template <typename Scalar>
class Conv2d final : public Layer<Scalar> {
 public:
  Conv2d(std::string name, int in_channels, int out_channels, int kernel, int padding)
      : in_channels_(in_channels),
        kernel_(kernel),
        padding_(padding),
        weight_(name + ".weight", out_channels, in_channels * kernel * kernel),
        bias_(name + ".bias", out_channels, 1) {}

  std::unique_ptr<Layer<Scalar>> clone() const override { return std::make_unique<Conv2d>(*this); }

  template <typename Rng>
  void init(Rng& rng) {
    const int k2 = kernel_ * kernel_;
    xavier_uniform(weight_.value, in_channels_ * k2, static_cast<int>(weight_.value.rows()) * k2, rng);
    bias_.value.setZero();
  }

  Shape3 output_shape(Shape3 in) const override {
    if (in.channels != in_channels_) throw std::invalid_argument("conv input channel mismatch");
    const int oh = in.height + 2 * padding_ - kernel_ + 1;
    const int ow = in.width + 2 * padding_ - kernel_ + 1;
    if (oh < 1 || ow < 1) throw std::invalid_argument("conv kernel larger than input");
    return {static_cast<int>(weight_.value.rows()), oh, ow};
  }

  void forward(const Tensor<Scalar>& in, Shape3 s, Tensor<Scalar>& out) const override {
    Tensor<Scalar> cols;
    im2col(in, s, kernel_, padding_, cols);
    out.noalias() = weight_.value * cols;
    out.colwise() += bias_.value.col(0);
  }

  void backward(const Tensor<Scalar>& in, Shape3 s, const Tensor<Scalar>&, const Tensor<Scalar>& grad_out,
                Tensor<Scalar>& grad_in) override {
    Tensor<Scalar> cols;
    im2col(in, s, kernel_, padding_, cols);
    weight_.grad.noalias() += grad_out * cols.transpose();
    bias_.grad.col(0) += grad_out.rowwise().sum();
    Tensor<Scalar> grad_cols = weight_.value.transpose() * grad_out;
    col2im(grad_cols, s, kernel_, padding_, grad_in);
  }

  std::vector<Parameter<Scalar>*> parameters() override { return {&weight_, &bias_}; }
  std::vector<const Parameter<Scalar>*> parameters() const override { return {&weight_, &bias_}; }

 private:
  int in_channels_;
  int kernel_;
  int padding_;
  Parameter<Scalar> weight_;
  Parameter<Scalar> bias_;
};

/// 2x2 max pooling, stride 2; odd trailing rows/columns are dropped.
template <typename Scalar>
class MaxPool2 final : public Layer<Scalar> {
 public:
  std::unique_ptr<Layer<Scalar>> clone() const override { return std::make_unique<MaxPool2>(*this); }

  Shape3 output_shape(Shape3 in) const override {
    if (in.height < 2 || in.width < 2) throw std::invalid_argument("pool input smaller than window");
    return {in.channels, in.height / 2, in.width / 2};
  }

  void forward(const Tensor<Scalar>& in, Shape3 s, Tensor<Scalar>& out) const override {
    const Shape3 o = output_shape(s);
    out.resize(s.channels, o.pixels());
    for (int c = 0; c < s.channels; ++c)
      for (int y = 0; y < o.height; ++y)
        for (int x = 0; x < o.width; ++x) out(c, y * o.width + x) = in(c, argmax(s, c, y, x, in));
  }

  void backward(const Tensor<Scalar>& in, Shape3 s, const Tensor<Scalar>&, const Tensor<Scalar>& grad_out,
                Tensor<Scalar>& grad_in) override {
    const Shape3 o = output_shape(s);
    grad_in.setZero(s.channels, s.pixels());
    for (int c = 0; c < s.channels; ++c)
      for (int y = 0; y < o.height; ++y)
        for (int x = 0; x < o.width; ++x) grad_in(c, argmax(s, c, y, x, in)) += grad_out(c, y * o.width + x);
  }

 private:
  // First maximum in row-major window order.
  static int argmax(Shape3 s, int c, int y, int x, const Tensor<Scalar>& in) {
    int best = (2 * y) * s.width + 2 * x;
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const int p = (2 * y + dy) * s.width + 2 * x + dx;
        if (in(c, p) > in(c, best)) best = p;
      }
    return best;
  }
};

/// Fully connected layer over the flattened input.
template <typename Scalar>
class Dense final : public Layer<Scalar> {
 public:
  Dense(std::string name, int in_features, int out_features)
      : weight_(name + ".weight", out_features, in_features), bias_(name + ".bias", out_features, 1) {}

  std::unique_ptr<Layer<Scalar>> clone() const override { return std::make_unique<Dense>(*this); }

  template <typename Rng>
  void init(Rng& rng) {
    xavier_uniform(weight_.value, static_cast<int>(weight_.value.cols()), static_cast<int>(weight_.value.rows()), rng);
    bias_.value.setZero();
  }

  const Parameter<Scalar>& weight() const { return weight_; }
  const Parameter<Scalar>& bias() const { return bias_; }
  int in_features() const { return static_cast<int>(weight_.value.cols()); }
  int out_features() const { return static_cast<int>(weight_.value.rows()); }

  Shape3 output_shape(Shape3 in) const override {
    if (in.size() != in_features()) throw std::invalid_argument("dense input size mismatch");
    return {out_features(), 1, 1};
  }

  void forward(const Tensor<Scalar>& in, Shape3, Tensor<Scalar>& out) const override {
    const Eigen::Map<const Vector<Scalar>> x(in.data(), in.size());
    out.resize(out_features(), 1);
    out.col(0).noalias() = weight_.value * x + bias_.value.col(0);
  }

  void backward(const Tensor<Scalar>& in, Shape3 s, const Tensor<Scalar>&, const Tensor<Scalar>& grad_out,
                Tensor<Scalar>& grad_in) override {
    const Eigen::Map<const Vector<Scalar>> x(in.data(), in.size());
    weight_.grad.noalias() += grad_out.col(0) * x.transpose();
    bias_.grad.col(0) += grad_out.col(0);
    grad_in.resize(s.channels, s.pixels());
    Eigen::Map<Vector<Scalar>>(grad_in.data(), grad_in.size()).noalias() = weight_.value.transpose() * grad_out.col(0);
  }

  std::vector<Parameter<Scalar>*> parameters() override { return {&weight_, &bias_}; }
  std::vector<const Parameter<Scalar>*> parameters() const override { return {&weight_, &bias_}; }

 private:
  Parameter<Scalar> weight_;
  Parameter<Scalar> bias_;
};

template <typename Scalar>
class Relu final : public Layer<Scalar> {
 public:
  std::unique_ptr<Layer<Scalar>> clone() const override { return std::make_unique<Relu>(*this); }
  Shape3 output_shape(Shape3 in) const override { return in; }
  void forward(const Tensor<Scalar>& in, Shape3, Tensor<Scalar>& out) const override { out = in.cwiseMax(Scalar(0)); }
  void backward(const Tensor<Scalar>& in, Shape3, const Tensor<Scalar>&, const Tensor<Scalar>& grad_out,
                Tensor<Scalar>& grad_in) override {
    grad_in = (in.array() > Scalar(0)).select(grad_out.array(), Scalar(0)).matrix();
  }
};

template <typename Scalar>
class Tanh final : public Layer<Scalar> {
 public:
  std::unique_ptr<Layer<Scalar>> clone() const override { return std::make_unique<Tanh>(*this); }
  Shape3 output_shape(Shape3 in) const override { return in; }
  void forward(const Tensor<Scalar>& in, Shape3, Tensor<Scalar>& out) const override { out = in.array().tanh().matrix(); }
  void backward(const Tensor<Scalar>&, Shape3, const Tensor<Scalar>& out, const Tensor<Scalar>& grad_out,
                Tensor<Scalar>& grad_in) override {
    grad_in = (grad_out.array() * (Scalar(1) - out.array().square())).matrix();
  }
};

/// Softmax restricted to the legal entries of `mask`; illegal entries are exactly 0.
template <typename Scalar, typename Mask>
Vector<Scalar> masked_softmax(const Vector<Scalar>& logits, const Mask& mask) {
  Vector<Scalar> p = Vector<Scalar>::Zero(logits.size());
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    if (mask(i)) best = std::max(best, logits(i));
  if (!std::isfinite(static_cast<double>(best))) return p;
  Scalar total = 0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (!mask(i)) continue;
    p(i) = std::exp(logits(i) - best);
    total += p(i);
  }
  p /= total;
  return p;
}

/// -sum_a target(a) log p(a) with p the masked softmax of `logits`. Writes dL/dlogits.
template <typename Scalar, typename Mask>
Scalar masked_softmax_cross_entropy(const Vector<Scalar>& logits, const Mask& mask, const Vector<Scalar>& target,
                                    Vector<Scalar>& grad_logits) {
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    if (mask(i)) best = std::max(best, logits(i));
  Scalar total = 0;
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    if (mask(i)) total += std::exp(logits(i) - best);
  const Scalar log_z = best + std::log(total);
  Scalar loss = 0;
  Scalar target_mass = 0;
  grad_logits.setZero(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (!mask(i)) continue;
    const Scalar log_p = logits(i) - log_z;
    loss -= target(i) * log_p;
    target_mass += target(i);
    grad_logits(i) = std::exp(log_p);
  }
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    if (mask(i)) grad_logits(i) = target_mass * grad_logits(i) - target(i);
  return loss;
}

/// (tanh(u) - target)^2. Writes dL/du.
template <typename Scalar>
Scalar tanh_mse(Scalar u, Scalar target, Scalar& grad_u) {
  const Scalar v = std::tanh(u);
  grad_u = Scalar(2) * (v - target) * (Scalar(1) - v * v);
  return (v - target) * (v - target);
}

}  // namespace itsr::nn
