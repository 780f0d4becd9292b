#include "itsr/model.hpp"

#include <algorithm>
#include <cmath>

namespace itsr {

namespace {

constexpr double kValueBound = 1.0 - 1e-7;

class NetworkEvaluator final : public PairEvaluator {
 public:
  NetworkEvaluator(const nn::PolicyValueNet<float>& net, const Image& target)
      : net_(net), target_embedding_(net.embed(target)) {}

  NetworkOutput evaluate(const State& current, const ActionMask& legal) override {
    const nn::Vector<float> merged = net_.embed(current.image) - target_embedding_;
    const auto head = net_.head(merged, legal);
    NetworkOutput out;
    out.policy = head.policy.cast<double>();
    const double total = out.policy.sum();
    if (total > 0) out.policy /= total;
    out.value = std::clamp(static_cast<double>(head.value), -kValueBound, kValueBound);
    return out;
  }

 private:
  const nn::PolicyValueNet<float>& net_;
  nn::Vector<float> target_embedding_;
};

class UniformEvaluator final : public PairEvaluator {
 public:
  NetworkOutput evaluate(const State&, const ActionMask& legal) override {
    NetworkOutput out;
    out.policy = legal.cast<double>().matrix();
    const double total = out.policy.sum();
    if (total > 0) out.policy /= total;
    return out;
  }
};

}  // namespace

std::unique_ptr<PairEvaluator> NetworkModel::bind(const Image& target) const {
  return std::make_unique<NetworkEvaluator>(net_, target);
}

std::unique_ptr<PairEvaluator> UniformModel::bind(const Image&) const { return std::make_unique<UniformEvaluator>(); }

}  // namespace itsr
