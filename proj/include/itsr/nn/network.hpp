#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "itsr/image.hpp"
#include "itsr/nn/layers.hpp"
#include "itsr/replay.hpp"

namespace itsr::nn {

enum class LayerKind { Conv, MaxPool, Dense, Relu, Tanh };

struct LayerSpec {
  LayerKind kind = LayerKind::Relu;
  int size = 0;  // output channels (conv) or units (dense)
  int kernel = 0;
  int padding = 0;
};

enum class HeadKind { ActorCritic, Classifier };

struct NetworkConfig {
  int image_side = 27;
  std::vector<LayerSpec> backbone;
  int action_count = 0;
  int reduction_width = 128;
  HeadKind head = HeadKind::ActorCritic;
  double learning_rate = 0.001;
  double momentum = 0.8;
};

/// LeNet-5-shaped backbone: two conv(5x5)+pool blocks and a 120-unit dense layer.
NetworkConfig lenet5_config(int image_side, int action_count, HeadKind head = HeadKind::ActorCritic);
/// Four conv(3x3, same)+pool blocks with 8/16/16/32 channels.
NetworkConfig small_cnn_config(int image_side, int action_count, HeadKind head = HeadKind::ActorCritic);

struct LossReport {
  double policy_ce = 0.0;
  double value_mse = 0.0;
  double total = 0.0;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raw head outputs for one merged feature vector.
template <typename Scalar>
struct HeadOutput {
  Vector<Scalar> logits;
  Vector<Scalar> policy;
  Scalar value = 0;
};

/// Pixel v maps to v / 127.5 - 1.
template <typename Scalar>
Tensor<Scalar> preprocess(const Image& image) {
  Tensor<Scalar> t(1, image.size());
  const auto* p = image.data();
  for (int i = 0; i < image.size(); ++i) t(0, i) = static_cast<Scalar>(p[i]) / Scalar(127.5) - Scalar(1);
  return t;
}

/// Siamese actor-critic network. Both images go through the same backbone; the
/// merged feature is embed(current) - embed(target), followed by a ReLU dense
/// reduction layer and a softmax actor head plus (optionally) a tanh critic head.
template <typename Scalar>
class PolicyValueNet {
 public:
  PolicyValueNet(NetworkConfig config, std::uint64_t seed);
  PolicyValueNet(const PolicyValueNet& other);
  PolicyValueNet& operator=(const PolicyValueNet& other);
  PolicyValueNet(PolicyValueNet&&) noexcept = default;
  PolicyValueNet& operator=(PolicyValueNet&&) noexcept = default;

  const NetworkConfig& config() const { return config_; }
  bool has_critic() const { return critic_ != nullptr; }
  int embedding_size() const { return shapes_.back().size(); }

  Vector<Scalar> embed(const Image& image) const;
  template <typename Mask>
  HeadOutput<Scalar> head(const Vector<Scalar>& merged, const Mask& mask) const;
  template <typename Mask>
  HeadOutput<Scalar> forward(const Image& current, const Image& target, const Mask& mask) const {
    return head(Vector<Scalar>(embed(current) - embed(target)), mask);
  }

  /// Mean losses over the batch without touching gradients.
  LossReport loss(std::span<const ReplayItem* const> batch) const;
  /// Zeroes, then accumulates mean-loss gradients into every parameter.
  LossReport compute_gradients(std::span<const ReplayItem* const> batch);
  /// SGD with momentum: m = mu m + g; w -= lr m.
  void sgd_step();
  /// Gradients, then one optimizer step. Returns the pre-update losses.
  LossReport train_step(std::span<const ReplayItem* const> batch);

  std::vector<Parameter<Scalar>*> parameters();
  std::vector<const Parameter<Scalar>*> parameters() const;

 private:
  void check_image(const Image& image) const;
  void backbone_forward(const Image& image, std::vector<Tensor<Scalar>>& trace) const;
  void backbone_backward(const std::vector<Tensor<Scalar>>& trace, Tensor<Scalar> grad);
  LossReport item_loss(const ReplayItem& item, bool accumulate, Scalar scale);

  NetworkConfig config_;
  std::vector<std::unique_ptr<Layer<Scalar>>> backbone_;
  std::vector<Shape3> shapes_;  // shapes_[i] is the input of backbone_[i]; back() is the embedding
  std::unique_ptr<Dense<Scalar>> reduction_;
  std::unique_ptr<Dense<Scalar>> actor_;
  std::unique_ptr<Dense<Scalar>> critic_;
};

// ---------------------------------------------------------------------------

inline NetworkConfig lenet5_config(int image_side, int action_count, HeadKind head) {
  NetworkConfig cfg;
  cfg.image_side = image_side;
  cfg.action_count = action_count;
  cfg.head = head;
  cfg.backbone = {
      {LayerKind::Conv, 6, 5, 0},  {LayerKind::Relu},   {LayerKind::MaxPool},
      {LayerKind::Conv, 16, 5, 0}, {LayerKind::Relu},   {LayerKind::MaxPool},
      {LayerKind::Dense, 120},     {LayerKind::Relu},
  };
  return cfg;
}

inline NetworkConfig small_cnn_config(int image_side, int action_count, HeadKind head) {
  NetworkConfig cfg;
  cfg.image_side = image_side;
  cfg.action_count = action_count;
  cfg.head = head;
  for (int channels : {8, 16, 16, 32}) {
    cfg.backbone.push_back({LayerKind::Conv, channels, 3, 1});
    cfg.backbone.push_back({LayerKind::Relu});
    cfg.backbone.push_back({LayerKind::MaxPool});
  }
  return cfg;
}

template <typename Scalar>
PolicyValueNet<Scalar>::PolicyValueNet(NetworkConfig config, std::uint64_t seed) : config_(std::move(config)) {
  if (config_.action_count < 1) throw std::invalid_argument("network needs at least one action");
  std::mt19937_64 rng(seed);
  Shape3 shape{1, config_.image_side, config_.image_side};
  shapes_.push_back(shape);
  for (std::size_t i = 0; i < config_.backbone.size(); ++i) {
    const auto& spec = config_.backbone[i];
    const std::string name = "backbone." + std::to_string(i);
    std::unique_ptr<Layer<Scalar>> layer;
    switch (spec.kind) {
      case LayerKind::Conv: {
        auto conv = std::make_unique<Conv2d<Scalar>>(name, shape.channels, spec.size, spec.kernel, spec.padding);
        conv->init(rng);
        layer = std::move(conv);
        break;
      }
      case LayerKind::Dense: {
        auto dense = std::make_unique<Dense<Scalar>>(name, shape.size(), spec.size);
        dense->init(rng);
        layer = std::move(dense);
        break;
      }
      case LayerKind::MaxPool: layer = std::make_unique<MaxPool2<Scalar>>(); break;
      case LayerKind::Relu: layer = std::make_unique<Relu<Scalar>>(); break;
      case LayerKind::Tanh: layer = std::make_unique<Tanh<Scalar>>(); break;
    }
    shape = layer->output_shape(shape);
    shapes_.push_back(shape);
    backbone_.push_back(std::move(layer));
  }
  reduction_ = std::make_unique<Dense<Scalar>>("reduction", shape.size(), config_.reduction_width);
  reduction_->init(rng);
  actor_ = std::make_unique<Dense<Scalar>>("actor", config_.reduction_width, config_.action_count);
  actor_->init(rng);
  if (config_.head == HeadKind::ActorCritic) {
    critic_ = std::make_unique<Dense<Scalar>>("critic", config_.reduction_width, 1);
    critic_->init(rng);
  }
}

template <typename Scalar>
PolicyValueNet<Scalar>::PolicyValueNet(const PolicyValueNet& other)
    : config_(other.config_),
      shapes_(other.shapes_),
      reduction_(std::make_unique<Dense<Scalar>>(*other.reduction_)),
      actor_(std::make_unique<Dense<Scalar>>(*other.actor_)),
      critic_(other.critic_ ? std::make_unique<Dense<Scalar>>(*other.critic_) : nullptr) {
  for (const auto& layer : other.backbone_) backbone_.push_back(layer->clone());
}

template <typename Scalar>
PolicyValueNet<Scalar>& PolicyValueNet<Scalar>::operator=(const PolicyValueNet& other) {
  if (this != &other) *this = PolicyValueNet(other);
  return *this;
}

template <typename Scalar>
std::vector<Parameter<Scalar>*> PolicyValueNet<Scalar>::parameters() {
  std::vector<Parameter<Scalar>*> out;
  for (auto& layer : backbone_)
    for (auto* p : layer->parameters()) out.push_back(p);
  for (auto* p : reduction_->parameters()) out.push_back(p);
  for (auto* p : actor_->parameters()) out.push_back(p);
  if (critic_)
    for (auto* p : critic_->parameters()) out.push_back(p);
  return out;
}

template <typename Scalar>
std::vector<const Parameter<Scalar>*> PolicyValueNet<Scalar>::parameters() const {
  std::vector<const Parameter<Scalar>*> out;
  for (auto* p : const_cast<PolicyValueNet*>(this)->parameters()) out.push_back(p);
  return out;
}

template <typename Scalar>
void PolicyValueNet<Scalar>::check_image(const Image& image) const {
  if (image.side() != config_.image_side) {
    throw DimensionMismatch("network expects side " + std::to_string(config_.image_side) + ", got " +
                            std::to_string(image.side()));
  }
}

template <typename Scalar>
void PolicyValueNet<Scalar>::backbone_forward(const Image& image, std::vector<Tensor<Scalar>>& trace) const {
  check_image(image);
  trace.resize(backbone_.size() + 1);
  trace[0] = preprocess<Scalar>(image);
  for (std::size_t i = 0; i < backbone_.size(); ++i) backbone_[i]->forward(trace[i], shapes_[i], trace[i + 1]);
}

template <typename Scalar>
Vector<Scalar> PolicyValueNet<Scalar>::embed(const Image& image) const {
  std::vector<Tensor<Scalar>> trace;
  backbone_forward(image, trace);
  const auto& last = trace.back();
  return Eigen::Map<const Vector<Scalar>>(last.data(), last.size());
}

template <typename Scalar>
template <typename Mask>
HeadOutput<Scalar> PolicyValueNet<Scalar>::head(const Vector<Scalar>& merged, const Mask& mask) const {
  HeadOutput<Scalar> out;
  const Vector<Scalar> hidden = (reduction_->weight().value * merged + reduction_->bias().value.col(0)).cwiseMax(Scalar(0));
  out.logits = actor_->weight().value * hidden + actor_->bias().value.col(0);
  out.policy = masked_softmax(out.logits, mask);
  if (critic_) {
    out.value = std::tanh((critic_->weight().value.row(0).dot(hidden)) + critic_->bias().value(0, 0));
  }
  return out;
}

template <typename Scalar>
void PolicyValueNet<Scalar>::backbone_backward(const std::vector<Tensor<Scalar>>& trace, Tensor<Scalar> grad) {
  Tensor<Scalar> grad_in;
  for (std::size_t i = backbone_.size(); i-- > 0;) {
    backbone_[i]->backward(trace[i], shapes_[i], trace[i + 1], grad, grad_in);
    std::swap(grad, grad_in);
  }
}

template <typename Scalar>
LossReport PolicyValueNet<Scalar>::item_loss(const ReplayItem& item, bool accumulate, Scalar scale) {
  std::vector<Tensor<Scalar>> current_trace, target_trace;
  backbone_forward(item.state.current.image, current_trace);
  backbone_forward(item.state.target, target_trace);
  const auto& ec = current_trace.back();
  const auto& et = target_trace.back();
  const Vector<Scalar> merged =
      Eigen::Map<const Vector<Scalar>>(ec.data(), ec.size()) - Eigen::Map<const Vector<Scalar>>(et.data(), et.size());

  Tensor<Scalar> merged_t = merged;
  Tensor<Scalar> pre_hidden, hidden, logits_t;
  const Shape3 merged_shape{static_cast<int>(merged.size()), 1, 1};
  const Shape3 hidden_shape{config_.reduction_width, 1, 1};
  reduction_->forward(merged_t, merged_shape, pre_hidden);
  hidden = pre_hidden.cwiseMax(Scalar(0));
  actor_->forward(hidden, hidden_shape, logits_t);

  const Vector<Scalar> logits = logits_t.col(0);
  const Vector<Scalar> target_policy = item.policy.template cast<Scalar>();
  Vector<Scalar> grad_logits;
  const Scalar ce = masked_softmax_cross_entropy(logits, item.legal, target_policy, grad_logits);

  LossReport report;
  report.policy_ce = static_cast<double>(ce);
  Scalar grad_u = 0;
  Tensor<Scalar> u_t;
  if (critic_) {
    critic_->forward(hidden, hidden_shape, u_t);
    const Scalar mse = tanh_mse(u_t(0, 0), static_cast<Scalar>(item.value), grad_u);
    report.value_mse = static_cast<double>(mse);
  }
  report.total = report.policy_ce + report.value_mse;
  if (!accumulate) return report;

  Tensor<Scalar> grad_hidden = Tensor<Scalar>::Zero(config_.reduction_width, 1);
  Tensor<Scalar> tmp;
  actor_->backward(hidden, hidden_shape, logits_t, Tensor<Scalar>(grad_logits * scale), tmp);
  grad_hidden += tmp;
  if (critic_) {
    Tensor<Scalar> gu(1, 1);
    gu(0, 0) = grad_u * scale;
    critic_->backward(hidden, hidden_shape, u_t, gu, tmp);
    grad_hidden += tmp;
  }
  const Tensor<Scalar> grad_pre = (pre_hidden.array() > Scalar(0)).select(grad_hidden.array(), Scalar(0)).matrix();
  Tensor<Scalar> grad_merged;
  reduction_->backward(merged_t, merged_shape, pre_hidden, grad_pre, grad_merged);

  const Shape3 embed_shape = shapes_.back();
  Tensor<Scalar> grad_embed(embed_shape.channels, embed_shape.pixels());
  Eigen::Map<Vector<Scalar>>(grad_embed.data(), grad_embed.size()) =
      Eigen::Map<const Vector<Scalar>>(grad_merged.data(), grad_merged.size());
  backbone_backward(current_trace, grad_embed);
  backbone_backward(target_trace, Tensor<Scalar>(-grad_embed));
  return report;
}

template <typename Scalar>
LossReport PolicyValueNet<Scalar>::loss(std::span<const ReplayItem* const> batch) const {
  LossReport mean;
  auto* self = const_cast<PolicyValueNet*>(this);  // item_loss(accumulate=false) does not mutate
  for (const auto* item : batch) {
    const auto r = self->item_loss(*item, false, Scalar(0));
    mean.policy_ce += r.policy_ce;
    mean.value_mse += r.value_mse;
  }
  const double n = static_cast<double>(batch.size());
  mean.policy_ce /= n;
  mean.value_mse /= n;
  mean.total = mean.policy_ce + mean.value_mse;
  return mean;
}

template <typename Scalar>
LossReport PolicyValueNet<Scalar>::compute_gradients(std::span<const ReplayItem* const> batch) {
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  for (auto* p : parameters()) p->grad.setZero();
  LossReport mean;
  const Scalar scale = Scalar(1) / static_cast<Scalar>(batch.size());
  for (const auto* item : batch) {
    const auto r = item_loss(*item, true, scale);
    mean.policy_ce += r.policy_ce;
    mean.value_mse += r.value_mse;
  }
  const double n = static_cast<double>(batch.size());
  mean.policy_ce /= n;
  mean.value_mse /= n;
  mean.total = mean.policy_ce + mean.value_mse;
  return mean;
}

template <typename Scalar>
void PolicyValueNet<Scalar>::sgd_step() {
  const auto lr = static_cast<Scalar>(config_.learning_rate);
  const auto mu = static_cast<Scalar>(config_.momentum);
  for (auto* p : parameters()) {
    p->momentum = mu * p->momentum + p->grad;
    p->value -= lr * p->momentum;
  }
}

template <typename Scalar>
LossReport PolicyValueNet<Scalar>::train_step(std::span<const ReplayItem* const> batch) {
  const LossReport report = compute_gradients(batch);
  if (!std::isfinite(report.total)) throw NumericalError("non-finite training loss");
  sgd_step();
  return report;
}

}  // namespace itsr::nn
